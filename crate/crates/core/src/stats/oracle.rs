use crate::error::{contract, domain, Result};

/// Variance of `[Z - tau]_+` from the cdf of `Z` alone:
///
/// ```text
/// Var([Z - tau]_+) = \int\int_{tau}^{upper} F(min(x, y)) - F(x) F(y) dx dy
/// ```
///
/// evaluated with the product trapezoidal rule on `steps` intervals per axis.
/// `upper` must be far enough in the right tail that `1 - F(upper)` is
/// negligible. The double sum collapses to `O(steps)` work: with trapezoid
/// weights `h_i` and `F_i = F(x_i)`,
/// `sum_ij h_i h_j F_min(i,j) = sum_i h_i F_i (h_i + 2 sum_{j>i} h_j)`.
///
/// ```
/// use riskopt::stats::cov_pospart_oracle;
/// // uniform on [0, 1], tau = 0: Var(Z) = 1/12
/// let v = cov_pospart_oracle(|x: f64| x.clamp(0.0, 1.0), 0.0, 1.0, 1000).unwrap();
/// assert!((v - 1.0 / 12.0).abs() < 1e-6);
/// ```
pub fn cov_pospart_oracle<F>(cdf: F, tau: f64, upper: f64, steps: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if steps == 0 {
        return Err(contract("quadrature needs at least one step"));
    }
    if !(tau.is_finite() && upper.is_finite()) {
        return Err(domain("integration limits must be finite"));
    }
    if tau >= upper {
        return Ok(0.0);
    }
    let h = (upper - tau) / steps as f64;
    let values: Vec<f64> = (0..=steps).map(|i| cdf(tau + i as f64 * h)).collect();
    if let Some(i) = values.windows(2).position(|w| w[1] < w[0] - 1e-14) {
        return Err(domain(format!(
            "cdf decreases between {} and {}",
            tau + i as f64 * h,
            tau + (i + 1) as f64 * h
        )));
    }
    let weight = |i: usize| if i == 0 || i == steps { 0.5 * h } else { h };

    let mut tail_weight = 0.0; // sum_{j > i} h_j
    let mut min_part = 0.0;
    let mut lin = 0.0;
    for i in (0..=steps).rev() {
        let wi = weight(i);
        min_part += wi * values[i] * (wi + 2.0 * tail_weight);
        lin += wi * values[i];
        tail_weight += wi;
    }
    Ok((min_part - lin * lin).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_mass_has_zero_variance() {
        let c = 4.0;
        let cdf = |x: f64| if x >= c { 1.0 } else { 0.0 };
        assert!(cov_pospart_oracle(cdf, 1.0, 10.0, 900).unwrap().abs() < 1e-10);
    }

    #[test]
    fn empty_domain() {
        assert_eq!(cov_pospart_oracle(|x| x, 5.0, 2.0, 10).unwrap(), 0.0);
    }

    #[test]
    fn exponential_closed_form() {
        // Z ~ Exp(1): [Z - tau]_+ is 0 w.p. 1 - e^-tau and Exp(1) otherwise,
        // so Var = e^-tau (2 - e^-tau).
        let tau: f64 = 0.7;
        let cdf = |x: f64| if x <= 0.0 { 0.0 } else { 1.0 - (-x).exp() };
        let v = cov_pospart_oracle(cdf, tau, 60.0, 200_000).unwrap();
        let p = (-tau).exp();
        assert!((v - p * (2.0 - p)).abs() < 1e-7);
    }

    #[test]
    fn rejects_nonmonotone_cdf() {
        let bad = |x: f64| (x * 3.0).sin().abs();
        assert!(cov_pospart_oracle(bad, 0.0, 3.0, 100).is_err());
    }
}
