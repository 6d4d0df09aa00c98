//! Robust stochastic approximation and its finite-sample confidence bounds.
//!
//! The program `min_{x, tau} E[H(x, tau, xi)]` with
//! `H = w0 G + sum_i wi (tau_i + [G - tau_i]_+ / (1 - alpha_i))` (plus the
//! program's deterministic regularizer) is run through projected stochastic
//! subgradient steps with a constant step and uniform averaging. The
//! average `G_bar` of `H` along the trajectory then yields the interval
//! `[G_bar - b(theta2) - a(theta3), G_bar + a(theta1)]`.

use crate::error::{contract, domain, Result};
use crate::hyptest::{ConfidenceInterval, IntervalMethod};
use crate::program::StochasticProgram;
use crate::risk::{phi_unchecked, RiskSpec};
use crate::samplers::SampleMatrix;

/// Problem constants behind the bounds: `L` bounds the mean subgradient,
/// `M1` the deviation of `H` from its mean, `M2` the deviation of the
/// stochastic subgradient, `D` the distance from the start point to any
/// feasible point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsaConstants {
    l: f64,
    m1: f64,
    m2: f64,
    d: f64,
    k1: f64,
    k2: f64,
}

impl RsaConstants {
    pub fn new(l: f64, m1: f64, m2: f64, d: f64) -> Result<Self> {
        for (name, v) in [("L", l), ("M1", m1), ("M2", m2), ("D", d)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(contract(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        let s = (2.0 * (m2 * m2 + l * l)).sqrt();
        let (k1, k2) = if s > 0.0 {
            (
                d * (m2 * m2 + 2.0 * l * l) / s,
                d * m2 * m2 / s + 2.0 * d * m2 + m1,
            )
        } else {
            (0.0, m1)
        };
        Ok(Self {
            l,
            m1,
            m2,
            d,
            k1,
            k2,
        })
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn m1(&self) -> f64 {
        self.m1
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    /// `theta M1 / sqrt(N)`.
    pub fn a(&self, theta: f64, n: usize) -> f64 {
        theta * self.m1 / (n as f64).sqrt()
    }

    /// `(K1 + theta (K2 - M1)) / sqrt(N)`.
    pub fn b(&self, theta: f64, n: usize) -> f64 {
        (self.k1 + theta * (self.k2 - self.m1)) / (n as f64).sqrt()
    }

    /// Constant step `D / sqrt(N (M2^2 + L^2))`; zero when the gradient
    /// bounds vanish.
    pub fn step(&self, n: usize) -> f64 {
        let s = self.m2 * self.m2 + self.l * self.l;
        if s > 0.0 {
            self.d / (n as f64 * s).sqrt()
        } else {
            0.0
        }
    }
}

/// Confidence multipliers for a target level `1 - beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thetas {
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub beta: f64,
}

/// `theta1 = 2 sqrt(ln(2/beta))`, `theta3 = 2 sqrt(ln(4/beta))` and `theta2`
/// the root of `exp(1 - t^2) + exp(-t^2/4) = beta/4`, found by bisection on
/// `[0, 20]`.
pub fn compute_thetas(beta: f64) -> Result<Thetas> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(domain(format!("beta must lie in (0, 1), got {beta}")));
    }
    let target = beta / 4.0;
    let f = |t: f64| (1.0 - t * t).exp() + (-t * t / 4.0).exp() - target;
    let (mut lo, mut hi) = (0.0_f64, 20.0_f64);
    if f(lo) <= 0.0 || f(hi) >= 0.0 {
        return Err(domain(format!("no root for beta = {beta}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    Ok(Thetas {
        theta1: 2.0 * (2.0 / beta).ln().sqrt(),
        theta2: 0.5 * (lo + hi),
        theta3: 2.0 * (4.0 / beta).ln().sqrt(),
        beta,
    })
}

/// Interval `[G_bar - b(theta2) - a(theta3), G_bar + a(theta1)]` at level
/// `1 - beta`.
pub fn bounds(
    g_bar: f64,
    constants: &RsaConstants,
    thetas: &Thetas,
    n: usize,
) -> Result<ConfidenceInterval> {
    if n == 0 {
        return Err(contract("bounds need at least one observation"));
    }
    if !g_bar.is_finite() {
        return Err(domain("average objective is not finite"));
    }
    let low = g_bar - constants.b(thetas.theta2, n) - constants.a(thetas.theta3, n);
    let up = g_bar + constants.a(thetas.theta1, n);
    ConfidenceInterval::new(low, up, 1.0 - thetas.beta, IntervalMethod::Rsa)
}

/// Constants plus the box `[tau_lower, tau_upper]` holding the quantile
/// block.
#[derive(Debug, Clone, PartialEq)]
pub struct RsaSetup {
    pub constants: RsaConstants,
    pub tau_lower: Vec<f64>,
    pub tau_upper: Vec<f64>,
    /// Keep every visited state in [`RsaRun::trajectory`].
    pub record_trajectory: bool,
}

impl RsaSetup {
    pub fn new(constants: RsaConstants, tau_lower: Vec<f64>, tau_upper: Vec<f64>) -> Result<Self> {
        if tau_lower.len() != tau_upper.len() {
            return Err(contract("tau bounds differ in length"));
        }
        if tau_lower
            .iter()
            .zip(&tau_upper)
            .any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u))
        {
            return Err(contract("tau box must be finite and ordered"));
        }
        Ok(Self {
            constants,
            tau_lower,
            tau_upper,
            record_trajectory: false,
        })
    }

    pub fn with_trajectory(mut self) -> Self {
        self.record_trajectory = true;
        self
    }

    pub fn tau_start(&self) -> Vec<f64> {
        self.tau_lower
            .iter()
            .zip(&self.tau_upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }
}

/// Output of one RSA pass.
#[derive(Debug, Clone, PartialEq)]
pub struct RsaRun {
    /// `H(x_t, tau_t, xi_t)` for `t = 1..N`.
    pub g_values: Vec<f64>,
    pub g_bar: f64,
    /// Uniform average of the visited decisions.
    pub x_avg: Vec<f64>,
    pub tau_avg: Vec<f64>,
    /// Visited states `[x_t; tau_t]`, when requested.
    pub trajectory: Option<Vec<Vec<f64>>>,
    pub step: f64,
}

/// One pass of projected stochastic subgradient over the rows of `sample`,
/// starting from the program's start point and the middle of the tau box.
pub fn run_rsa<P: StochasticProgram + ?Sized>(
    program: &P,
    spec: &RiskSpec,
    setup: &RsaSetup,
    sample: &SampleMatrix,
) -> Result<RsaRun> {
    let n = sample.rows();
    if n == 0 {
        return Err(contract("RSA needs at least one scenario"));
    }
    let k = spec.k();
    if setup.tau_lower.len() != k {
        return Err(contract(format!(
            "tau box has {} entries for {} AVaR terms",
            setup.tau_lower.len(),
            k
        )));
    }
    let dim = program.dim();
    let set = program.feasible_set();
    let reg = program.regularizer();
    let tau_lambda = reg.tau_lambda();
    let w0 = spec.w0();
    let terms: Vec<(f64, f64)> = spec.terms().collect();
    let step = setup.constants.step(n);

    let mut x = program.start();
    let mut tau = setup.tau_start();
    let mut gx = vec![0.0; dim];
    let mut x_sum = vec![0.0; dim];
    let mut tau_sum = vec![0.0; k];
    let mut g_values = Vec::with_capacity(n);
    let mut trajectory = setup.record_trajectory.then(|| Vec::with_capacity(n));

    for xi in sample.iter_rows() {
        if let Some(tr) = trajectory.as_mut() {
            let mut state = x.clone();
            state.extend_from_slice(&tau);
            tr.push(state);
        }
        for (s, v) in x_sum.iter_mut().zip(&x) {
            *s += v;
        }
        for (s, v) in tau_sum.iter_mut().zip(&tau) {
            *s += v;
        }

        let g = program.loss(&x, xi);
        g_values.push(phi_unchecked(g, spec, &tau) + reg.value(&x, &tau));

        let mut slope = w0;
        for (i, &(w, a)) in terms.iter().enumerate() {
            let hit = g >= tau[i];
            if hit {
                slope += w / (1.0 - a);
            }
            let gt =
                w * (1.0 - if hit { 1.0 / (1.0 - a) } else { 0.0 }) + 2.0 * tau_lambda * tau[i];
            tau[i] = (tau[i] - step * gt).clamp(setup.tau_lower[i], setup.tau_upper[i]);
        }
        if dim > 0 {
            program.loss_subgradient(&x, xi, &mut gx);
            for (xj, gj) in x.iter_mut().zip(&gx) {
                *xj -= step * (slope * gj + 2.0 * reg.lambda * *xj);
            }
            set.project(&mut x);
        }
    }

    let inv = 1.0 / n as f64;
    let g_bar = g_values.iter().sum::<f64>() * inv;
    Ok(RsaRun {
        g_values,
        g_bar,
        x_avg: x_sum.into_iter().map(|v| v * inv).collect(),
        tau_avg: tau_sum.into_iter().map(|v| v * inv).collect(),
        trajectory,
        step,
    })
}

/// Bounds on mean and variance of `G(x, xi)` over the feasible set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentBounds {
    pub mean_min: f64,
    pub mean_max: f64,
    pub var_max: f64,
}

/// What the constants of a risk-averse program are computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskProgramBounds {
    /// `m0 <= G(x, xi) <= M0` on the feasible set and the support.
    pub loss_min: f64,
    pub loss_max: f64,
    /// Without moment bounds the tau box is `[m0, M0]`.
    pub moments: Option<MomentBounds>,
    /// Componentwise bounds on the stochastic subgradient `G'_x`.
    pub subgradient_lower: Vec<f64>,
    pub subgradient_upper: Vec<f64>,
    /// Maximal distance from the start point to the feasible set.
    pub diameter: f64,
}

impl RiskProgramBounds {
    /// A fixed decision whose loss has support `[lower, upper]`.
    pub fn scalar(lower: f64, upper: f64) -> Self {
        Self {
            loss_min: lower,
            loss_max: upper,
            moments: None,
            subgradient_lower: Vec::new(),
            subgradient_upper: Vec::new(),
            diameter: 0.0,
        }
    }
}

/// Tau box and constants `L`, `M1`, `M2`, `D` for the reformulated
/// program on `X x [tau_lower, tau_upper]`. `D` is measured from the
/// middle of the tau box, matching where [`run_rsa`] starts.
pub fn constants_risk_program(spec: &RiskSpec, bounds: &RiskProgramBounds) -> Result<RsaSetup> {
    let (m0, big_m0) = (bounds.loss_min, bounds.loss_max);
    if !(m0.is_finite() && big_m0.is_finite() && m0 <= big_m0) {
        return Err(contract("loss range must be finite and ordered"));
    }
    if bounds.subgradient_lower.len() != bounds.subgradient_upper.len() {
        return Err(contract("subgradient bounds differ in length"));
    }
    if bounds
        .subgradient_lower
        .iter()
        .chain(&bounds.subgradient_upper)
        .any(|v| !v.is_finite())
    {
        return Err(contract("subgradient bounds must be finite"));
    }
    if !(bounds.diameter.is_finite() && bounds.diameter >= 0.0) {
        return Err(contract("diameter must be finite and nonnegative"));
    }

    let mut tau_lower = Vec::with_capacity(spec.k());
    let mut tau_upper = Vec::with_capacity(spec.k());
    for a in spec.alphas() {
        match bounds.moments {
            Some(mb) => {
                if !(mb.mean_min.is_finite()
                    && mb.mean_max.is_finite()
                    && mb.var_max.is_finite()
                    && mb.var_max >= 0.0
                    && mb.mean_min <= mb.mean_max)
                {
                    return Err(contract("moment bounds must be finite and ordered"));
                }
                let sd = mb.var_max.sqrt();
                tau_lower.push(mb.mean_min - ((1.0 - a) / a).sqrt() * sd);
                tau_upper.push(mb.mean_max + (a / (1.0 - a)).sqrt() * sd);
            }
            None => {
                tau_lower.push(m0);
                tau_upper.push(big_m0);
            }
        }
    }

    let w0 = spec.w0();
    let mut m1 = w0 * (big_m0 - m0);
    let mut tail = 0.0;
    let mut l_sq = 0.0;
    let mut m2_sq = 0.0;
    for ((w, a), tl) in spec.terms().zip(&tau_lower) {
        let c = w / (1.0 - a);
        m1 += c * (big_m0 - tl);
        tail += c;
        let r = a / (1.0 - a);
        l_sq += w * w * (r * r).max(1.0);
        m2_sq += c * c;
    }
    for (lo, hi) in bounds
        .subgradient_lower
        .iter()
        .zip(&bounds.subgradient_upper)
    {
        let a = w0 * hi + tail * hi.max(0.0);
        let b = w0 * lo + tail * lo.min(0.0);
        l_sq += (a * a).max(b * b);
        m2_sq += (a - b) * (a - b);
    }
    let box_sq: f64 = tau_lower
        .iter()
        .zip(&tau_upper)
        .map(|(l, u)| (u - l) * (u - l))
        .sum();
    let d = (bounds.diameter * bounds.diameter + box_sq / 4.0).sqrt();
    let constants = RsaConstants::new(l_sq.sqrt(), m1, m2_sq.sqrt(), d)?;
    RsaSetup::new(constants, tau_lower, tau_upper)
}

/// Constants for the portfolio program on the `n`-simplex with `+-1`
/// returns, ridge weight `lambda` on `(x, tau)` and `tau` in `[-1, 1]`.
pub fn constants_portfolio(spec: &RiskSpec, n: usize, lambda: f64) -> Result<RsaSetup> {
    if spec.k() != 1 {
        return Err(contract("portfolio constants need exactly one AVaR term"));
    }
    if n == 0 {
        return Err(contract("portfolio with no assets"));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(contract("ridge weight must be finite and nonnegative"));
    }
    let (w1, alpha) = spec.terms().next().expect("one term");
    let c = spec.w0() + w1 / (1.0 - alpha);
    let nf = n as f64;
    let l = ((w1 * alpha / (1.0 - alpha)).powi(2) + nf * c * c).sqrt() + 2.0 * lambda;
    let m2 = ((w1 / (1.0 - alpha)).powi(2) + 4.0 * nf * c * c).sqrt();
    let m1 = 2.0 * c;
    let d = (2.0 - 1.0 / nf).sqrt();
    RsaSetup::new(RsaConstants::new(l, m1, m2, d)?, vec![-1.0], vec![1.0])
}
