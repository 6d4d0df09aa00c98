//! Sample average approximation of `min_x R(G(x, xi))`.
//!
//! For a [`RiskSpec`] with levels `a_1..a_k` the SAA problem is
//!
//! ```text
//! min_{x in X, tau in R^k}  N^-1 sum_j phi(G(x, xi_j), tau) + lambda (|x|^2 [+ |tau|^2]) + c0
//! ```
//!
//! For fixed `x` the minimization over `tau` separates by level and is solved
//! exactly, so the outer method only sees the convex function of `x` that is
//! left. Two outer solvers are used:
//!
//! * for any program, projected subgradient steps of Polyak type toward a
//!   target level below the best value so far, lowered whenever progress
//!   stalls; the linear minimization oracle of `X` gives a lower bound that
//!   certifies the gap;
//! * for linear losses with a ridge term on both `x` and `tau` and a single
//!   level (the portfolio program), accelerated projected gradient on the
//!   smooth dual over `s in [0, 1]^N`, whose duality gap certifies the
//!   returned value.

use crate::error::{contract, degenerate, domain, Result};
use crate::hyptest::{ConfidenceInterval, IntervalMethod};
use crate::program::{project_simplex, FeasibleSet, StochasticProgram};
use crate::risk::{level_rank, phi_unchecked, RiskSpec};
use crate::samplers::SampleMatrix;
use crate::stats::normal_quantile;

/// Outcome of [`solve_saa`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Optimal value `v_N` of the SAA problem, deterministic terms included.
    pub value: f64,
    pub x_hat: Vec<f64>,
    pub tau_hat: Vec<f64>,
    /// Sample standard deviation of `phi(G(x_hat, xi_j), tau_hat)`; zero when
    /// `N = 1`.
    pub nu_hat: f64,
    pub n: usize,
    pub iterations: usize,
    /// Certified bound on `value - v_N`.
    pub objective_gap: f64,
    /// False when the iteration cap was hit before `objective_gap <= tol`.
    pub converged: bool,
}

/// The default accuracy target `1e-6 (1 + |scale|)`.
pub fn default_tol(scale: f64) -> f64 {
    1e-6 * (1.0 + scale.abs())
}

/// Minimizer over `t` in `bounds` of
/// `w (t + ((1 - alpha) N)^-1 sum_j [z_j - t]_+) + lambda t^2`,
/// with `z` sorted. Without the quadratic term this is the left
/// `alpha`-quantile.
pub(crate) fn level_tau(
    sorted: &[f64],
    w: f64,
    alpha: f64,
    lambda: f64,
    bounds: Option<(f64, f64)>,
) -> f64 {
    let n = sorted.len();
    let t = if lambda <= 0.0 {
        sorted[level_rank(alpha, n) - 1]
    } else {
        let c = w / ((1.0 - alpha) * n as f64);
        let above = |t: f64| n - sorted.partition_point(|&v| v <= t);
        // right derivative, nondecreasing in t
        let slope = |t: f64| w - c * above(t) as f64 + 2.0 * lambda * t;
        let p = sorted.partition_point(|&v| slope(v) < 0.0);
        if p == n {
            (-w / (2.0 * lambda)).max(sorted[n - 1])
        } else {
            let count = if p == 0 { n } else { above(sorted[p - 1]) };
            let mut t = -(w - c * count as f64) / (2.0 * lambda);
            t = t.min(sorted[p]);
            if p > 0 {
                t = t.max(sorted[p - 1]);
            }
            t
        }
    };
    match bounds {
        Some((lo, hi)) => t.clamp(lo, hi),
        None => t,
    }
}

/// Exact quantile block for the loss values `z` (sorted in place).
fn tau_block(z: &mut [f64], spec: &RiskSpec, lambda: f64, bounds: Option<(f64, f64)>) -> Vec<f64> {
    z.sort_by(f64::total_cmp);
    spec.terms()
        .map(|(w, a)| level_tau(z, w, a, lambda, bounds))
        .collect()
}

/// `d phi / d z` (right derivative).
fn phi_slope(z: f64, spec: &RiskSpec, tau: &[f64]) -> f64 {
    spec.w0()
        + spec
            .terms()
            .zip(tau)
            .filter(|(_, t)| z > **t)
            .map(|((w, a), _)| w / (1.0 - a))
            .sum::<f64>()
}

/// The SAA objective with `tau` minimized out, without the constant shift.
struct Evaluation {
    value: f64,
    tau: Vec<f64>,
}

fn evaluate<P: StochasticProgram + ?Sized>(
    program: &P,
    spec: &RiskSpec,
    sample: &SampleMatrix,
    x: &[f64],
    losses: &mut Vec<f64>,
) -> Evaluation {
    losses.clear();
    losses.extend(sample.iter_rows().map(|xi| program.loss(x, xi)));
    let reg = program.regularizer();
    let mut sorted = losses.clone();
    let tau = tau_block(&mut sorted, spec, reg.tau_lambda(), program.tau_bounds());
    let value = mean_phi(losses, spec, &tau) + reg.quadratic(x, &tau);
    Evaluation { value, tau }
}

fn mean_phi(losses: &[f64], spec: &RiskSpec, tau: &[f64]) -> f64 {
    losses
        .iter()
        .map(|&z| phi_unchecked(z, spec, tau))
        .sum::<f64>()
        / losses.len() as f64
}

fn sample_sd(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1.0)).sqrt()
}

fn check_inputs<P: StochasticProgram + ?Sized>(
    program: &P,
    sample: &SampleMatrix,
    tol: f64,
) -> Result<()> {
    if sample.rows() == 0 {
        return Err(contract("SAA needs at least one scenario"));
    }
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    if program.start().len() != program.dim() {
        return Err(contract("start point does not match the program dimension"));
    }
    Ok(())
}

/// Solves the SAA problem of `program` under `spec` on `sample` (one scenario
/// per row) to objective accuracy `tol`.
///
/// ```
/// use riskopt::{solve_saa, RiskSpec, SampleMatrix, SingletonProgram};
///
/// let spec = RiskSpec::mean_avar(0.0, 1.0, 0.5).unwrap();
/// let sample = SampleMatrix::from_column(vec![4.0, 1.0, 3.0, 2.0]);
/// let report = solve_saa(&SingletonProgram::new(), &spec, &sample, 1e-9).unwrap();
/// assert_eq!(report.value, 3.5);
/// assert_eq!(report.tau_hat, vec![2.0]);
/// ```
pub fn solve_saa<P: StochasticProgram + ?Sized>(
    program: &P,
    spec: &RiskSpec,
    sample: &SampleMatrix,
    tol: f64,
) -> Result<SolveReport> {
    check_inputs(program, sample, tol)?;
    let set = program.feasible_set();
    let reg = program.regularizer();
    let dual_ready = program.is_linear()
        && spec.k() == 1
        && reg.lambda > 0.0
        && reg.includes_tau
        && matches!(set, FeasibleSet::Simplex { .. })
        && program.tau_bounds().is_some();
    let (x, iterations, gap, converged) = if set.is_singleton() || program.dim() == 0 {
        let mut x = program.start();
        set.project(&mut x);
        (x, 0, 0.0, true)
    } else if dual_ready {
        solve_linear_ridge(program, spec, sample, tol)?
    } else {
        solve_subgradient(program, spec, sample, tol)
    };
    finish(program, spec, sample, x, iterations, gap, converged)
}

fn finish<P: StochasticProgram + ?Sized>(
    program: &P,
    spec: &RiskSpec,
    sample: &SampleMatrix,
    x: Vec<f64>,
    iterations: usize,
    objective_gap: f64,
    converged: bool,
) -> Result<SolveReport> {
    let mut losses = Vec::with_capacity(sample.rows());
    let eval = evaluate(program, spec, sample, &x, &mut losses);
    let nu_hat = if losses.len() > 1 {
        sample_sd(losses.iter().map(|&z| phi_unchecked(z, spec, &eval.tau)))
    } else {
        0.0
    };
    if !eval.value.is_finite() {
        return Err(crate::error::Error::Numerical(
            "SAA objective is not finite".into(),
        ));
    }
    Ok(SolveReport {
        value: eval.value + program.regularizer().shift,
        x_hat: x,
        tau_hat: eval.tau,
        nu_hat,
        n: sample.rows(),
        iterations,
        objective_gap,
        converged,
    })
}

fn iteration_cap(n: usize, dim: usize) -> usize {
    (50.0 * (n as f64).sqrt() * dim.max(1) as f64).ceil() as usize
}

fn solve_subgradient<P: StochasticProgram + ?Sized>(
    program: &P,
    spec: &RiskSpec,
    sample: &SampleMatrix,
    tol: f64,
) -> (Vec<f64>, usize, f64, bool) {
    let set = program.feasible_set();
    let reg = program.regularizer();
    let dim = program.dim();
    let n = sample.rows() as f64;
    let cap = iteration_cap(sample.rows(), dim);

    let mut x = program.start();
    set.project(&mut x);
    let mut best_x = x.clone();
    let mut best = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let mut losses = Vec::with_capacity(sample.rows());
    let mut g = vec![0.0; dim];
    let mut gi = vec![0.0; dim];
    // target level best - delta; delta halves whenever a run of steps
    // fails to improve on the best value by delta / 2
    let mut delta = f64::NAN;
    let mut record = f64::INFINITY;
    let mut stalled = 0;

    for k in 0..cap {
        let eval = evaluate(program, spec, sample, &x, &mut losses);
        g.iter_mut()
            .zip(&x)
            .for_each(|(gj, xj)| *gj = 2.0 * reg.lambda * xj);
        for (xi, &z) in sample.iter_rows().zip(losses.iter()) {
            let slope = phi_slope(z, spec, &eval.tau);
            if slope != 0.0 {
                program.loss_subgradient(&x, xi, &mut gi);
                g.iter_mut().zip(&gi).for_each(|(a, b)| *a += slope * b / n);
            }
        }
        if eval.value < best {
            best = eval.value;
            best_x.clone_from(&x);
        }
        let vertex = set.linear_minimizer(&g);
        let fw: f64 = g
            .iter()
            .zip(vertex.iter().zip(&x))
            .map(|(a, (v, y))| a * (v - y))
            .sum();
        lower = lower.max(eval.value + fw);
        if best - lower <= tol {
            return (best_x, k + 1, (best - lower).max(0.0), true);
        }
        if delta.is_nan() {
            delta = 0.5 * (best - lower);
        }
        if best <= record - 0.5 * delta {
            record = best;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled >= 20 {
                delta *= 0.5;
                stalled = 0;
                record = best;
                x.clone_from(&best_x);
                if delta < 1e-3 * tol {
                    break;
                }
                continue;
            }
        }
        let norm2: f64 = g.iter().map(|v| v * v).sum();
        let target = (best - delta).max(lower);
        let step = (eval.value - target) / norm2;
        x.iter_mut().zip(&g).for_each(|(a, b)| *a -= step * b);
        set.project(&mut x);
    }
    (best_x, cap, best - lower, false)
}

/// Largest eigenvalue of `M^T M` for `M = [Xi, -1]`, by power iteration.
fn augmented_norm_sq(sample: &SampleMatrix) -> f64 {
    let cols = sample.cols() + 1;
    let mut v = vec![1.0 / (cols as f64).sqrt(); cols];
    let mut estimate = 0.0;
    let mut mv = vec![0.0; sample.rows()];
    for _ in 0..100 {
        for (out, row) in mv.iter_mut().zip(sample.iter_rows()) {
            *out = row.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() - v[cols - 1];
        }
        let mut w = vec![0.0; cols];
        for (m, row) in mv.iter().zip(sample.iter_rows()) {
            w[..cols - 1]
                .iter_mut()
                .zip(row)
                .for_each(|(a, b)| *a += m * b);
            w[cols - 1] -= m;
        }
        let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = norm;
        v = w.into_iter().map(|a| a / norm).collect();
        if (next - estimate).abs() <= 1e-6 * next {
            estimate = next;
            break;
        }
        estimate = next;
    }
    estimate
}

/// Accelerated projected gradient on the dual of
/// `min_{x in simplex, t in [lo, hi]} w0 <mu, x> + w1 t + c sum_j [<xi_j, x> - t]_+
///   + lambda (|x|^2 + t^2)` with `c = w1 / ((1 - alpha) N)`, using
/// `[u]_+ = max_{s in [0, 1]} s u`.
fn solve_linear_ridge<P: StochasticProgram + ?Sized>(
    program: &P,
    spec: &RiskSpec,
    sample: &SampleMatrix,
    tol: f64,
) -> Result<(Vec<f64>, usize, f64, bool)> {
    let reg = program.regularizer();
    let lambda = reg.lambda;
    let (lo, hi) = program.tau_bounds().expect("checked by the caller");
    let (w1, alpha) = spec.terms().next().expect("one level");
    let w0 = spec.w0();
    let rows = sample.rows();
    let dim = sample.cols();
    if program.dim() != dim {
        return Err(contract(format!(
            "scenarios have {dim} entries, the program {}",
            program.dim()
        )));
    }
    let c = w1 / ((1.0 - alpha) * rows as f64);
    let mut mu = vec![0.0; dim];
    for row in sample.iter_rows() {
        mu.iter_mut()
            .zip(row)
            .for_each(|(m, v)| *m += v / rows as f64);
    }

    // primal minimizers of the Lagrangian for multipliers s
    let primal = |s: &[f64], x: &mut Vec<f64>| -> f64 {
        x.iter_mut().zip(&mu).for_each(|(a, m)| *a = w0 * m);
        let mut total = 0.0;
        for (sj, row) in s.iter().zip(sample.iter_rows()) {
            if *sj != 0.0 {
                x.iter_mut().zip(row).for_each(|(a, v)| *a += c * sj * v);
                total += sj;
            }
        }
        x.iter_mut().for_each(|a| *a /= -2.0 * lambda);
        project_simplex(x);
        (-(w1 - c * total) / (2.0 * lambda)).clamp(lo, hi)
    };

    let lipschitz = (c * c * augmented_norm_sq(sample) / (2.0 * lambda)) * 1.05 + f64::MIN_POSITIVE;
    let cap = iteration_cap(rows, dim).max(1000);
    let mut s = vec![0.0; rows];
    let mut y = s.clone();
    let mut theta: f64 = 1.0;
    let mut x = vec![0.0; dim];
    let mut best_x = x.clone();
    let mut best = f64::INFINITY;
    let mut dual_best = f64::NEG_INFINITY;
    let mut losses = Vec::with_capacity(rows);

    for k in 0..cap {
        let t = primal(&y, &mut x);
        losses.clear();
        losses.extend(sample.iter_rows().map(|row| program.loss(&x, row)));
        let sq: f64 = x.iter().map(|v| v * v).sum::<f64>() + t * t;
        let linear: f64 = x.iter().zip(&mu).map(|(a, m)| a * m).sum();
        let coupling: f64 = y.iter().zip(&losses).map(|(sj, z)| sj * (z - t)).sum();
        let dual = w0 * linear + w1 * t + c * coupling + lambda * sq;
        dual_best = dual_best.max(dual);

        let mut sorted = losses.clone();
        sorted.sort_by(f64::total_cmp);
        let tau = level_tau(&sorted, w1, alpha, lambda, Some((lo, hi)));
        let tau_vec = [tau];
        let value = mean_phi(&losses, spec, &tau_vec) + reg.quadratic(&x, &tau_vec);
        if value < best {
            best = value;
            best_x.clone_from(&x);
        }
        if best - dual_best <= tol {
            return Ok((best_x, k + 1, (best - dual_best).max(0.0), true));
        }

        let next: Vec<f64> = y
            .iter()
            .zip(&losses)
            .map(|(yj, z)| (yj + c * (z - t) / lipschitz).clamp(0.0, 1.0))
            .collect();
        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let momentum = (theta - 1.0) / theta_next;
        y = next
            .iter()
            .zip(&s)
            .map(|(a, b)| (a + momentum * (a - b)).clamp(0.0, 1.0))
            .collect();
        s = next;
        theta = theta_next;
    }
    Ok((best_x, cap, best - dual_best, false))
}

/// `nu_N`: sample standard deviation (divisor `N - 1`) of
/// `phi(G(x_hat, xi_j), tau_hat)` over the sample the report was built from.
pub fn variance_estimate<P: StochasticProgram + ?Sized>(
    report: &SolveReport,
    program: &P,
    spec: &RiskSpec,
    sample: &SampleMatrix,
) -> Result<f64> {
    if sample.rows() < 2 {
        return Err(degenerate("variance estimate needs at least two scenarios"));
    }
    if report.tau_hat.len() != spec.k() {
        return Err(contract("quantile block does not match the risk measure"));
    }
    let values: Vec<f64> = sample
        .iter_rows()
        .map(|xi| phi_unchecked(program.loss(&report.x_hat, xi), spec, &report.tau_hat))
        .collect();
    Ok(sample_sd(values.iter().copied()))
}

/// `[v_N -+ Phi^-1(1 - beta/2) nu_N / sqrt(N)]`.
pub fn asymptotic_ci(report: &SolveReport, beta: f64) -> Result<ConfidenceInterval> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(domain(format!("level {beta} outside (0, 1)")));
    }
    let half = normal_quantile(1.0 - beta / 2.0)? * report.nu_hat / (report.n as f64).sqrt();
    ConfidenceInterval::new(
        report.value - half,
        report.value + half,
        1.0 - beta,
        IntervalMethod::Asymptotic,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{PortfolioProgram, SingletonProgram};
    use crate::risk::{quantile_interval, risk_plugin, EmpiricalDistribution};

    /// Brute-force minimizer of the penalized level objective on a fine grid.
    fn grid_tau(z: &[f64], w: f64, alpha: f64, lambda: f64, lo: f64, hi: f64) -> f64 {
        let n = z.len() as f64;
        let f = |t: f64| {
            w * (t + z.iter().map(|v| (v - t).max(0.0)).sum::<f64>() / ((1.0 - alpha) * n))
                + lambda * t * t
        };
        let steps = 200_000;
        (0..=steps)
            .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
            .min_by(|a, b| f(*a).total_cmp(&f(*b)))
            .unwrap()
    }

    #[test]
    fn penalized_tau_matches_grid() {
        let z = [-0.9, -0.4, -0.35, -0.1, 0.0, 0.2, 0.25, 0.7];
        for &(w, alpha, lambda) in &[
            (0.1, 0.9, 2.0),
            (0.9, 0.5, 0.3),
            (0.5, 0.2, 0.05),
            (1.0, 0.75, 10.0),
            (0.0, 0.5, 1.0),
        ] {
            let exact = level_tau(&z, w, alpha, lambda, Some((-1.0, 1.0)));
            let grid = grid_tau(&z, w, alpha, lambda, -1.0, 1.0);
            assert!(
                (exact - grid).abs() < 2e-5,
                "{w} {alpha} {lambda}: {exact} vs {grid}"
            );
        }
    }

    #[test]
    fn unpenalized_tau_is_left_quantile() {
        let z = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(level_tau(&z, 0.7, 0.5, 0.0, None), 2.0);
        assert_eq!(level_tau(&z, 0.7, 0.6, 0.0, None), 3.0);
    }

    #[test]
    fn singleton_reduces_to_plugin() {
        let values = vec![3.0, 9.0, 1.0, 4.0, 4.0, 7.5, 2.0];
        let spec = RiskSpec::mean_avar(0.3, 0.7, 0.6).unwrap();
        let sample = SampleMatrix::from_column(values.clone());
        let report = solve_saa(&SingletonProgram::new(), &spec, &sample, 1e-9).unwrap();
        let dist = EmpiricalDistribution::new(values).unwrap();
        assert!((report.value - risk_plugin(&dist, &spec)).abs() < 1e-12);
        let (l, r) = quantile_interval(&dist, 0.6).unwrap();
        assert!(report.tau_hat[0] >= l && report.tau_hat[0] <= r);
        assert_eq!(report.iterations, 0);
    }

    #[test]
    fn pure_expectation_variance_is_sample_sd() {
        let values = vec![1.0, 2.0, 4.0, 8.0];
        let sample = SampleMatrix::from_column(values);
        let spec = RiskSpec::expectation();
        let r = solve_saa(&SingletonProgram::new(), &spec, &sample, 1e-9).unwrap();
        let mean = 3.75;
        let var = [1.0f64, 2.0, 4.0, 8.0]
            .iter()
            .map(|v| (v - mean).powi(2))
            .sum::<f64>()
            / 3.0;
        assert!((r.nu_hat - var.sqrt()).abs() < 1e-12);
        let direct = variance_estimate(&r, &SingletonProgram::new(), &spec, &sample).unwrap();
        assert_eq!(direct, r.nu_hat);
    }

    #[test]
    fn ci_is_symmetric_and_degenerate_without_spread() {
        let sample = SampleMatrix::from_column(vec![5.0; 10]);
        let r = solve_saa(
            &SingletonProgram::new(),
            &RiskSpec::expectation(),
            &sample,
            1e-9,
        )
        .unwrap();
        let ci = asymptotic_ci(&r, 0.1).unwrap();
        assert_eq!((ci.low, ci.up), (5.0, 5.0));
    }

    /// Two assets, scenarios chosen by hand; compare the dual solver with
    /// the subgradient solver and with a search over the simplex.
    #[test]
    fn dual_and_primal_solvers_agree() {
        let rows = vec![
            1.0, -1.0, //
            -1.0, 1.0, //
            1.0, 1.0, //
            -1.0, -1.0, //
            1.0, -1.0, //
            -1.0, -1.0,
        ];
        let sample = SampleMatrix::new(6, 2, rows).unwrap();
        let spec = RiskSpec::mean_avar(0.5, 0.5, 0.5).unwrap();
        let program = PortfolioProgram::new(2, 0.2, 0.0).unwrap();
        let dual = solve_saa(&program, &spec, &sample, 1e-10).unwrap();
        assert!(dual.converged);

        let primal = solve_subgradient(&program, &spec, &sample, 1e-8);
        let primal_report = finish(
            &program, &spec, &sample, primal.0, primal.1, primal.2, primal.3,
        )
        .unwrap();
        // the subgradient method is slow on this kinked objective but can
        // never beat the certified dual value
        assert!(primal_report.value >= dual.value - 1e-9);
        assert!(primal_report.value - dual.value < 1e-2);

        let mut best = f64::INFINITY;
        for i in 0..=20_000 {
            let p = i as f64 / 20_000.0;
            let x = [p, 1.0 - p];
            let r = finish(&program, &spec, &sample, x.to_vec(), 0, 0.0, true).unwrap();
            best = best.min(r.value);
        }
        assert!((dual.value - best).abs() < 1e-6, "{} vs {best}", dual.value);
    }

    #[test]
    fn subgradient_solver_on_a_box() {
        // G(x, xi) = |x - xi|, X = [-5, 5]: for pure expectation the optimum
        // is any median of the scenarios.
        struct AbsLoss(FeasibleSet);
        impl StochasticProgram for AbsLoss {
            fn feasible_set(&self) -> &FeasibleSet {
                &self.0
            }
            fn loss(&self, x: &[f64], xi: &[f64]) -> f64 {
                (x[0] - xi[0]).abs()
            }
            fn loss_subgradient(&self, x: &[f64], xi: &[f64], out: &mut [f64]) {
                out[0] = if x[0] >= xi[0] { 1.0 } else { -1.0 };
            }
        }
        let program = AbsLoss(FeasibleSet::interval(-5.0, 5.0).unwrap());
        let sample = SampleMatrix::from_column(vec![-1.0, 0.5, 2.0, 3.0, 4.5]);
        let r = solve_saa(&program, &RiskSpec::expectation(), &sample, 1e-8).unwrap();
        // sum of |2 - xi| / 5
        assert!((r.value - 1.6).abs() < 1e-6, "{}", r.value);
        assert!((r.x_hat[0] - 2.0).abs() < 1e-5);
    }
}
