//! Discrete-Kusuoka risk measures and their empirical (plug-in) estimates.
//!
//! A [`RiskSpec`] fixes weights `w = (w0, w1, ..., wk)` on the simplex and
//! levels `0 < a1 < ... < ak < 1`; the measure is
//!
//! ```text
//! R(Z) = w0 E[Z] + sum_i wi AVaR_{ai}(Z)
//! ```
//!
//! where `AVaR_a(Z) = (1 - a)^-1 \int_a^1 F^-1(u) du`. Everything here is
//! evaluated on the empirical distribution of a sample, which puts mass
//! `1/N` on every draw (ties are kept).

use crate::error::{contract, domain, Result};

/// Slack used when deciding whether `alpha * n` is an integer.
const INTEGER_SLACK: f64 = 1e-9;

/// Weights and levels of a discrete-Kusuoka risk measure with a singleton
/// weight set.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskSpec {
    weights: Vec<f64>,
    alphas: Vec<f64>,
}

impl RiskSpec {
    /// `weights` has length `k + 1` (`w0` first), `alphas` has length `k`.
    pub fn new(weights: Vec<f64>, alphas: Vec<f64>) -> Result<Self> {
        if weights.len() != alphas.len() + 1 {
            return Err(contract(format!(
                "expected {} weights for {} levels, got {}",
                alphas.len() + 1,
                alphas.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(contract("weights must be finite and nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(contract(format!("weights must sum to 1, got {total}")));
        }
        if alphas.iter().any(|a| !(*a > 0.0 && *a < 1.0)) {
            return Err(domain("levels must lie in (0, 1)"));
        }
        if alphas.windows(2).any(|p| p[0] >= p[1]) {
            return Err(contract("levels must be strictly increasing"));
        }
        Ok(Self { weights, alphas })
    }

    /// The pure expectation (`k = 0`).
    pub fn expectation() -> Self {
        Self {
            weights: vec![1.0],
            alphas: Vec::new(),
        }
    }

    /// `w0 E[Z] + w1 AVaR_alpha(Z)`, the two-term family used throughout the
    /// experiments.
    pub fn mean_avar(w0: f64, w1: f64, alpha: f64) -> Result<Self> {
        Self::new(vec![w0, w1], vec![alpha])
    }

    /// Number of AVaR terms.
    pub fn k(&self) -> usize {
        self.alphas.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Weight on the expectation.
    pub fn w0(&self) -> f64 {
        self.weights[0]
    }

    /// `(w_i, alpha_i)` pairs of the AVaR terms.
    pub fn terms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.weights[1..]
            .iter()
            .copied()
            .zip(self.alphas.iter().copied())
    }
}

/// Empirical distribution of a sample: the order statistics `Z(1) <= ... <= Z(N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    values: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Sorts the sample. Fails on an empty sample or non-finite values.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(contract("empirical distribution needs at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(domain("sample contains non-finite values"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(values.to_vec())
    }

    /// Sorted values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.len() - 1]
    }

    /// `Z + a`, order preserved.
    pub fn shifted(&self, a: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v + a).collect(),
        }
    }

    /// `t Z` for `t >= 0`, order preserved.
    pub fn scaled(&self, t: f64) -> Self {
        assert!(t >= 0.0, "scale must be nonnegative");
        Self {
            values: self.values.iter().map(|v| v * t).collect(),
        }
    }

    /// Left `alpha`-quantile `inf{t : F(t) >= alpha} = Z(ceil(alpha N))`.
    pub fn quantile(&self, alpha: f64) -> Result<f64> {
        empirical_quantile(self, alpha)
    }

    /// Closed-form AVaR; see [`avar_closed`].
    pub fn avar(&self, alpha: f64) -> Result<f64> {
        avar_closed(self, alpha)
    }
}

/// `ceil(alpha * n)` with products within rounding of an integer treated as
/// that integer (`0.9 * 20` is 18, not 19). Clamped to `1..=n`.
pub(crate) fn level_rank(alpha: f64, n: usize) -> usize {
    let t = alpha * n as f64;
    let r = t.round();
    let rank = if (t - r).abs() <= INTEGER_SLACK * t.max(1.0) {
        r
    } else {
        t.ceil()
    };
    (rank as usize).clamp(1, n)
}

/// Whether `alpha * n` is an integer up to rounding.
fn level_is_integral(alpha: f64, n: usize) -> bool {
    let t = alpha * n as f64;
    (t - t.round()).abs() <= INTEGER_SLACK * t.max(1.0)
}

/// Left `alpha`-quantile of the empirical cdf.
pub fn empirical_quantile(dist: &EmpiricalDistribution, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(domain(format!("quantile level {alpha} outside (0, 1]")));
    }
    Ok(dist.values[level_rank(alpha, dist.len()) - 1])
}

/// The interval of `alpha`-quantiles `[left, right]`, where
/// `right = inf{t : F(t) > alpha}`. The two ends coincide unless `alpha N` is
/// an integer.
pub fn quantile_interval(dist: &EmpiricalDistribution, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("quantile level {alpha} outside (0, 1)")));
    }
    let n = dist.len();
    let k = level_rank(alpha, n);
    let left = dist.values[k - 1];
    let right = if level_is_integral(alpha, n) && k < n {
        dist.values[k]
    } else {
        left
    };
    Ok((left, right))
}

/// `AVaR_alpha` of the empirical distribution as the exact integral of the
/// step quantile function over `[alpha, 1]`.
///
/// The order statistic straddling `alpha` enters with the fractional weight
/// `ceil(alpha N)/N - alpha`; all higher ones with weight `1/N`.
pub fn avar_closed(dist: &EmpiricalDistribution, alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0 && alpha < 1.0) {
        return Err(domain(format!("AVaR level {alpha} outside [0, 1)")));
    }
    let n = dist.len();
    if alpha == 0.0 {
        return Ok(dist.mean());
    }
    let nf = n as f64;
    let k = level_rank(alpha, n);
    let straddle = ((k as f64 - alpha * nf) / nf).max(0.0);
    let tail: f64 = dist.values[k..].iter().sum::<f64>() / nf;
    Ok((straddle * dist.values[k - 1] + tail) / (1.0 - alpha))
}

/// Minimum of `t + ((1 - alpha) N)^-1 sum_j [Z_j - t]_+` over `t`, and the set
/// of minimizers.
///
/// The objective is convex and piecewise linear with kinks at the sample
/// points, so the minimum is found by evaluating every breakpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariationalAvar {
    pub value: f64,
    /// Smallest and largest minimizer.
    pub minimizers: (f64, f64),
}

pub fn avar_variational(dist: &EmpiricalDistribution, alpha: f64) -> Result<VariationalAvar> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!("AVaR level {alpha} outside (0, 1)")));
    }
    let z = &dist.values;
    let n = z.len();
    let scale = 1.0 / ((1.0 - alpha) * n as f64);

    // suffix[m] = sum of z[m..]
    let mut suffix = vec![0.0; n + 1];
    for m in (0..n).rev() {
        suffix[m] = suffix[m + 1] + z[m];
    }
    let mut best = f64::INFINITY;
    for m in 0..n {
        // every z[j] with j > m is >= z[m]; ties contribute zero
        let excess = suffix[m + 1] - (n - m - 1) as f64 * z[m];
        let value = z[m] + scale * excess;
        if value < best {
            best = value;
        }
    }

    // The slope on (z[m-1], z[m]) is 1 - (n - m)/((1 - alpha) n); it vanishes
    // on a whole segment exactly when alpha n is an integer.
    let minimizers = quantile_interval(dist, alpha)?;
    Ok(VariationalAvar {
        value: best,
        minimizers,
    })
}

/// The integrand `phi(z, tau) = w0 z + sum_i wi (tau_i + [z - tau_i]_+ / (1 - alpha_i))`.
pub fn phi(z: f64, spec: &RiskSpec, tau: &[f64]) -> Result<f64> {
    if tau.len() != spec.k() {
        return Err(contract(format!(
            "tau has length {}, risk spec has {} levels",
            tau.len(),
            spec.k()
        )));
    }
    Ok(phi_unchecked(z, spec, tau))
}

#[inline]
pub(crate) fn phi_unchecked(z: f64, spec: &RiskSpec, tau: &[f64]) -> f64 {
    let mut acc = spec.w0() * z;
    for ((w, a), t) in spec.terms().zip(tau) {
        acc += w * (t + (z - t).max(0.0) / (1.0 - a));
    }
    acc
}

/// Plug-in estimate `w0 mean + sum_i wi AVaR_{alpha_i}` on the empirical
/// distribution.
pub fn risk_plugin(dist: &EmpiricalDistribution, spec: &RiskSpec) -> f64 {
    let mut acc = spec.w0() * dist.mean();
    for (w, a) in spec.terms() {
        if w != 0.0 {
            // spec levels are validated to lie in (0, 1)
            acc += w * avar_closed(dist, a).expect("validated level");
        }
    }
    acc
}

/// Plug-in value of `sup_{w in W} R_w` over a finite set of weight rows
/// sharing the same levels.
pub fn risk_plugin_maxset(dist: &EmpiricalDistribution, specs: &[RiskSpec]) -> Result<f64> {
    let first = specs
        .first()
        .ok_or_else(|| contract("uncertainty set must contain at least one row"))?;
    if specs.iter().any(|s| s.alphas() != first.alphas()) {
        return Err(contract("all weight rows must share the same levels"));
    }
    Ok(specs
        .iter()
        .map(|s| risk_plugin(dist, s))
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Empirical quantiles at every level of `spec`, i.e. the minimizing `tau`
/// of the plug-in representation.
pub fn quantile_block(dist: &EmpiricalDistribution, spec: &RiskSpec) -> Vec<f64> {
    spec.alphas()
        .iter()
        .map(|&a| dist.values[level_rank(a, dist.len()) - 1])
        .collect()
}
