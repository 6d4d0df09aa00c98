use crate::error::{contract, degenerate, Result};

use super::special::chi2_sf;

/// Sample moments.
///
/// `variance` uses the `n - 1` divisor. `skewness` and `kurtosis` are the
/// moment ratios `m3 / m2^1.5` and `m4 / m2^2` of the central moments with
/// divisor `n`, the form the Jarque-Bera statistic is written in. They are
/// `None` for a constant sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
}

impl MomentSummary {
    pub fn from_sample(sample: &[f64]) -> Result<Self> {
        let n = sample.len();
        if n == 0 {
            return Err(contract("moments of an empty sample"));
        }
        let nf = n as f64;
        let mean = sample.iter().sum::<f64>() / nf;
        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        for &x in sample {
            let d = x - mean;
            let d2 = d * d;
            m2 += d2;
            m3 += d2 * d;
            m4 += d2 * d2;
        }
        let variance = if n > 1 { m2 / (nf - 1.0) } else { 0.0 };
        let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
        // relative threshold: a constant sample leaves only rounding noise
        let nondegenerate = m2 > 1e-24 * (mean * mean).max(f64::MIN_POSITIVE);
        let (skewness, kurtosis) = if nondegenerate {
            (Some(m3 / m2.powf(1.5)), Some(m4 / (m2 * m2)))
        } else {
            (None, None)
        };
        Ok(Self {
            n,
            mean,
            variance,
            skewness,
            kurtosis,
        })
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn is_degenerate(&self) -> bool {
        self.kurtosis.is_none()
    }
}

/// Jarque-Bera normality test result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JarqueBera {
    pub statistic: f64,
    /// Asymptotic chi-square(2) upper-tail probability.
    pub p_value: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

/// `JB = n/6 (S^2 + (K - 3)^2 / 4)`, with the asymptotic chi-square(2) p-value.
pub fn jarque_bera(sample: &[f64]) -> Result<JarqueBera> {
    if sample.len() < 8 {
        return Err(contract(format!(
            "Jarque-Bera needs at least 8 observations, got {}",
            sample.len()
        )));
    }
    let m = MomentSummary::from_sample(sample)?;
    let (Some(s), Some(k)) = (m.skewness, m.kurtosis) else {
        return Err(degenerate("Jarque-Bera on a constant sample"));
    };
    let statistic = m.n as f64 / 6.0 * (s * s + 0.25 * (k - 3.0) * (k - 3.0));
    Ok(JarqueBera {
        statistic,
        p_value: chi2_sf(statistic, 2.0)?,
        skewness: s,
        kurtosis: k,
    })
}
