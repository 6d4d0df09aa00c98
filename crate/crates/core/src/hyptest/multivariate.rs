//! Linear and conic hypotheses on `theta = (v_1, ..., v_K)` from `M`
//! replications `theta_1, ..., theta_M` of the estimator.

use nalgebra::{DMatrix, DVector};

use super::{TestKind, TestOutcome};
use crate::error::{contract, degenerate, domain, Result};
use crate::samplers::SampleMatrix;
use crate::stats::{chi2_ratio_sf, f_quantile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConeKind {
    /// `A theta = 0`.
    Subspace,
    /// `A theta <= 0`.
    Cone,
}

/// `{theta : A theta = 0}` or `{theta : A theta <= 0}` with `A` of full row
/// rank.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSpec {
    a: DMatrix<f64>,
    kind: ConeKind,
}

impl ConeSpec {
    pub fn new(a: DMatrix<f64>, kind: ConeKind) -> Result<Self> {
        let (k0, k) = a.shape();
        if k0 == 0 || k0 > k {
            return Err(contract(format!("constraint matrix of shape {k0} x {k}")));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(domain("constraint matrix has non-finite entries"));
        }
        if a.rank(1e-10 * a.norm().max(1.0)) < k0 {
            return Err(contract("constraint matrix does not have full row rank"));
        }
        Ok(Self { a, kind })
    }

    pub fn from_rows(rows: &[Vec<f64>], kind: ConeKind) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != k) {
            return Err(contract("constraint rows of different lengths"));
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(rows.len(), k, &data), kind)
    }

    fn differences(
        k: usize,
        pairs: impl Iterator<Item = (usize, usize)>,
        kind: ConeKind,
    ) -> Result<Self> {
        let rows: Vec<Vec<f64>> = pairs
            .map(|(i, j)| {
                let mut r = vec![0.0; k];
                r[i] = 1.0;
                r[j] = -1.0;
                r
            })
            .collect();
        Self::from_rows(&rows, kind)
    }

    /// `theta_1 = ... = theta_K` as `theta_i - theta_{i+1} = 0`.
    pub fn equality(k: usize) -> Result<Self> {
        Self::differences(
            k,
            (0..k.saturating_sub(1)).map(|i| (i, i + 1)),
            ConeKind::Subspace,
        )
    }

    /// `theta_1 <= ... <= theta_K`.
    pub fn ordered(k: usize) -> Result<Self> {
        Self::differences(
            k,
            (0..k.saturating_sub(1)).map(|i| (i, i + 1)),
            ConeKind::Cone,
        )
    }

    /// `theta_i <= theta_j` for every `j != i`.
    pub fn dominance(k: usize, i: usize) -> Result<Self> {
        if i >= k {
            return Err(contract(format!(
                "index {i} out of range for dimension {k}"
            )));
        }
        Self::differences(
            k,
            (0..k).filter(|&j| j != i).map(|j| (i, j)),
            ConeKind::Cone,
        )
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn kind(&self) -> ConeKind {
        self.kind
    }

    pub fn constraints(&self) -> usize {
        self.a.nrows()
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }
}

/// Leading factor of the Hotelling statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum HotellingScaling {
    /// The number of replications `M`: the classical statistic, whose null
    /// law is `k0 (M - 1) / (M - k0) F_{k0, M - k0}`.
    #[default]
    SampleSize,
    /// The number of programs `K`. Equals the classical statistic scaled by
    /// `K / M`; the F threshold is then far from calibrated unless `K = M`.
    ProblemCount,
}

fn mean_and_covariance(samples: &SampleMatrix) -> (DVector<f64>, DMatrix<f64>) {
    let (m, k) = (samples.rows(), samples.cols());
    let data = DMatrix::from_row_slice(m, k, samples.as_slice());
    let mean = DVector::from_iterator(k, data.column_iter().map(|c| c.sum() / m as f64));
    let mut centered = data;
    for mut row in centered.row_iter_mut() {
        row -= mean.transpose();
    }
    let cov = centered.transpose() * &centered / (m as f64 - 1.0);
    (mean, cov)
}

fn check_replications(samples: &SampleMatrix, cone: &ConeSpec, min_extra: usize) -> Result<()> {
    if samples.cols() != cone.dim() {
        return Err(contract(format!(
            "replications have {} coordinates, the hypothesis {}",
            samples.cols(),
            cone.dim()
        )));
    }
    if samples.rows() < samples.cols() + min_extra {
        return Err(contract(format!(
            "need at least K + {min_extra} = {} replications, got {}",
            samples.cols() + min_extra,
            samples.rows()
        )));
    }
    Ok(())
}

/// Hotelling test of `A theta = 0`:
/// `T^2 = c min_{A theta = 0} (theta_hat - theta)' Sigma_hat^-1 (theta_hat - theta)`,
/// rejecting when `T^2` exceeds `k0 (M - 1) / (M - k0) F^-1_{k0, M - k0}(1 - beta)`.
/// The minimum is `(A theta_hat)' (A Sigma_hat A')^-1 (A theta_hat)`.
pub fn hotelling_subspace_test(
    samples: &SampleMatrix,
    cone: &ConeSpec,
    beta: f64,
    scaling: HotellingScaling,
) -> Result<TestOutcome> {
    if cone.kind() != ConeKind::Subspace {
        return Err(contract("Hotelling test needs a subspace hypothesis"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(domain(format!("significance level {beta} outside (0, 1)")));
    }
    check_replications(samples, cone, 1)?;
    let (m, k) = (samples.rows(), samples.cols());
    let k0 = cone.constraints();
    let (mean, cov) = mean_and_covariance(samples);
    if cov.clone().cholesky().is_none() {
        return Err(degenerate("replication covariance is singular"));
    }
    let a = cone.matrix();
    let inner = a * &cov * a.transpose();
    let chol = inner
        .cholesky()
        .ok_or_else(|| degenerate("projected covariance is singular"))?;
    let am = a * &mean;
    let distance = am.dot(&chol.solve(&am));
    let factor = match scaling {
        HotellingScaling::SampleSize => m as f64,
        HotellingScaling::ProblemCount => k as f64,
    };
    let (mf, k0f) = (m as f64, k0 as f64);
    let threshold =
        k0f * (mf - 1.0) / (mf - k0f) * f_quantile(1.0 - beta, k0 as u32, (m - k0) as u32)?;
    Ok(TestOutcome::decide(
        TestKind::Hotelling,
        factor * distance,
        threshold,
    ))
}

/// `-2 ln Lambda = K ln(1 + T^2 / (M - 1))`, reported alongside the Hotelling
/// test.
pub fn hotelling_lr_diagnostic(t2: f64, k: usize, m: usize) -> f64 {
    k as f64 * (t2 / (m as f64 - 1.0)).ln_1p()
}

/// Projection of `x` onto `{A theta = 0}` or `{A theta <= 0}` in the metric
/// `|y|_S^2 = y' S^-1 y`, with the squared distance. `A` need not have full
/// row rank here; faces with a singular system are skipped.
///
/// Every face `{A_J theta = 0}` is tried: its KKT point is
/// `theta = x - S A_J' lambda` with `(A_J S A_J') lambda = A_J x`, and it is
/// the projection when `lambda >= 0` and `A theta <= 0`. The squared distance
/// is `lambda' A_J S A_J' lambda`.
pub fn project_onto_cone(
    x: &DVector<f64>,
    metric: &DMatrix<f64>,
    a: &DMatrix<f64>,
    kind: ConeKind,
) -> Result<(DVector<f64>, f64)> {
    let k0 = a.nrows();
    if x.len() != a.ncols() || metric.shape() != (x.len(), x.len()) {
        return Err(contract("dimensions of point, metric and cone disagree"));
    }
    if k0 > 20 {
        return Err(contract("face enumeration limited to 20 constraints"));
    }
    let tol = 1e-10 * (1.0 + x.amax()) * (1.0 + a.amax());
    let face = |rows: &[usize]| -> Option<(DVector<f64>, DVector<f64>, f64)> {
        if rows.is_empty() {
            return Some((x.clone(), DVector::zeros(0), 0.0));
        }
        let aj = a.select_rows(rows);
        let gram = &aj * metric * aj.transpose();
        if gram.rank(1e-12 * gram.amax().max(f64::MIN_POSITIVE)) < rows.len() {
            return None;
        }
        let lambda = gram.clone().lu().solve(&(&aj * x))?;
        if lambda.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let theta = x - metric * aj.transpose() * &lambda;
        let dist = lambda.dot(&(&gram * &lambda));
        Some((theta, lambda, dist))
    };

    match kind {
        ConeKind::Subspace => {
            let all: Vec<usize> = (0..k0).collect();
            let (theta, _, dist) =
                face(&all).ok_or_else(|| degenerate("metric is singular on the constraints"))?;
            Ok((theta, dist.max(0.0)))
        }
        ConeKind::Cone => {
            let mut best: Option<(DVector<f64>, f64)> = None;
            for mask in 0u32..(1u32 << k0) {
                let rows: Vec<usize> = (0..k0).filter(|i| mask & (1 << i) != 0).collect();
                let Some((theta, lambda, dist)) = face(&rows) else {
                    continue;
                };
                if lambda.iter().any(|&l| l < -tol) {
                    continue;
                }
                if (a * &theta).iter().any(|&v| v > tol) {
                    continue;
                }
                if best.as_ref().is_none_or(|(_, d)| dist < *d) {
                    best = Some((theta, dist));
                }
            }
            best.map(|(t, d)| (t, d.max(0.0)))
                .ok_or_else(|| degenerate("no face yields a feasible projection"))
        }
    }
}

/// `Err(u) = (P(G_{K-1, M-K-1} >= u) + P(G_{K, M-K} >= u)) / 2`.
pub fn perlman_err(u: f64, k: usize, m: usize) -> Result<f64> {
    if m < k + 2 {
        return Err(contract("the error bound needs M >= K + 2"));
    }
    Ok(0.5
        * (chi2_ratio_sf(u, (k - 1) as u32, (m - k - 1) as u32)?
            + chi2_ratio_sf(u, k as u32, (m - k) as u32)?))
}

/// Perlman's test of `A theta <= 0`: `U = |theta_hat - Pi_S(theta_hat)|_S^2`
/// with `S = (M - 1) / M Sigma_hat`, rejecting when `U > u_beta`,
/// `Err(u_beta) = beta`.
pub fn perlman_cone_test(
    samples: &SampleMatrix,
    cone: &ConeSpec,
    beta: f64,
) -> Result<TestOutcome> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(domain(format!("significance level {beta} outside (0, 1)")));
    }
    check_replications(samples, cone, 2)?;
    let (m, k) = (samples.rows(), samples.cols());
    let (mean, cov) = mean_and_covariance(samples);
    let s = cov * ((m as f64 - 1.0) / m as f64);
    if s.clone().cholesky().is_none() {
        return Err(degenerate("replication covariance is singular"));
    }
    let (_, u) = project_onto_cone(&mean, &s, cone.matrix(), cone.kind())?;

    let mut hi = 1.0;
    while perlman_err(hi, k, m)? > beta {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(crate::error::Error::Numerical(
                "critical value not bracketed".into(),
            ));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if perlman_err(mid, k, m)? > beta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(TestOutcome::decide(TestKind::Perlman, u, 0.5 * (lo + hi)))
}
