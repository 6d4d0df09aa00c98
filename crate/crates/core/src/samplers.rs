//! Samplers for the experiment distributions: truncated normals and vectors
//! of independent `+-1` Bernoulli losses.

use rand::RngCore;

use crate::error::{contract, domain, Result};
use crate::rng::RngStream;
use crate::stats::{normal_cdf, normal_pdf, normal_quantile, normal_sf};

/// A row-major `rows x cols` block of scenarios; row `j` is the draw `xi_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl SampleMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(contract(format!(
                "{} values do not fill a {rows} x {cols} sample",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// A one-column sample from scalar draws.
    pub fn from_column(values: Vec<f64>) -> Self {
        Self {
            rows: values.len(),
            cols: 1,
            data: values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.data[j * self.cols..(j + 1) * self.cols]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// The first `rows` rows.
    pub fn head(&self, rows: usize) -> Self {
        let rows = rows.min(self.rows);
        Self {
            rows,
            cols: self.cols,
            data: self.data[..rows * self.cols].to_vec(),
        }
    }
}

/// `N(m, s2)` conditioned on `[a0, b0]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncNormalSpec {
    m: f64,
    s2: f64,
    a0: f64,
    b0: f64,
}

impl TruncNormalSpec {
    pub fn new(m: f64, s2: f64, a0: f64, b0: f64) -> Result<Self> {
        if !(m.is_finite() && s2.is_finite() && a0.is_finite() && b0.is_finite()) {
            return Err(domain("truncated normal parameters must be finite"));
        }
        if s2 <= 0.0 {
            return Err(domain(format!("variance must be positive, got {s2}")));
        }
        if a0 >= b0 {
            return Err(domain(format!("empty support [{a0}, {b0}]")));
        }
        let spec = Self { m, s2, a0, b0 };
        if spec.mass() <= 0.0 {
            return Err(domain("support carries no probability mass"));
        }
        Ok(spec)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn s2(&self) -> f64 {
        self.s2
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a0, self.b0)
    }

    fn s(&self) -> f64 {
        self.s2.sqrt()
    }

    fn standardized(&self, x: f64) -> f64 {
        (x - self.m) / self.s()
    }

    fn alpha(&self) -> f64 {
        self.standardized(self.a0)
    }

    fn beta(&self) -> f64 {
        self.standardized(self.b0)
    }

    /// Standard normal mass of `[lo, hi]`, using whichever tail keeps digits.
    fn std_mass(lo: f64, hi: f64) -> f64 {
        if hi <= 0.0 {
            normal_cdf(hi) - normal_cdf(lo)
        } else if lo >= 0.0 {
            normal_sf(lo) - normal_sf(hi)
        } else {
            1.0 - normal_cdf(lo) - normal_sf(hi)
        }
    }

    fn mass(&self) -> f64 {
        Self::std_mass(self.alpha(), self.beta())
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.a0 {
            return 0.0;
        }
        if x >= self.b0 {
            return 1.0;
        }
        (Self::std_mass(self.alpha(), self.standardized(x)) / self.mass()).clamp(0.0, 1.0)
    }

    /// Inverse cdf for `u` in `(0, 1)`. Supports lying in the upper tail are
    /// handled on the mirrored distribution, where `Phi` has its precision.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(domain(format!("quantile level {u} outside (0, 1)")));
        }
        let (a, b) = (self.alpha(), self.beta());
        let mass = self.mass();
        let x = if a > 0.0 {
            let t = normal_cdf(-b) + (1.0 - u) * mass;
            self.m - self.s() * normal_quantile(t.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON))?
        } else {
            let t = normal_cdf(a) + u * mass;
            self.m + self.s() * normal_quantile(t.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON))?
        };
        Ok(x.clamp(self.a0, self.b0))
    }

    pub fn mean(&self) -> f64 {
        let (a, b) = (self.alpha(), self.beta());
        self.m + self.s() * (normal_pdf(a) - normal_pdf(b)) / self.mass()
    }

    pub fn variance(&self) -> f64 {
        let (a, b) = (self.alpha(), self.beta());
        let z = self.mass();
        let r = (normal_pdf(a) - normal_pdf(b)) / z;
        self.s2 * (1.0 + (a * normal_pdf(a) - b * normal_pdf(b)) / z - r * r)
    }

    /// `AVaR_alpha` of the distribution itself, `alpha` in `[0, 1)`.
    pub fn avar(&self, alpha: f64) -> Result<f64> {
        if !(alpha >= 0.0 && alpha < 1.0) {
            return Err(domain(format!("AVaR level {alpha} outside [0, 1)")));
        }
        if alpha == 0.0 {
            return Ok(self.mean());
        }
        let q = self.standardized(self.quantile(alpha)?);
        let b = self.beta();
        // \int_q^b (m + s t) phi(t) dt over the total mass
        let upper = self.m * Self::std_mass(q, b) + self.s() * (normal_pdf(q) - normal_pdf(b));
        Ok(upper / self.mass() / (1.0 - alpha))
    }

    /// `count` independent draws by inversion.
    pub fn sample(&self, stream: &mut RngStream, count: usize) -> Vec<f64> {
        (0..count)
            .map(|_| {
                self.quantile(stream.uniform_open())
                    .expect("open-interval uniforms are valid levels")
            })
            .collect()
    }
}

pub fn truncnorm_cdf(spec: &TruncNormalSpec, x: f64) -> f64 {
    spec.cdf(x)
}

pub fn truncnorm_sample(spec: &TruncNormalSpec, stream: &mut RngStream, count: usize) -> Vec<f64> {
    spec.sample(stream, count)
}

/// Independent losses `xi_i` in `{-1, +1}` with `P(xi_i = 1) = psi_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliVectorSpec {
    psi: Vec<f64>,
}

impl BernoulliVectorSpec {
    pub fn new(psi: Vec<f64>) -> Result<Self> {
        if psi.is_empty() {
            return Err(contract("Bernoulli vector of length zero"));
        }
        if psi.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(domain("probabilities must lie in [0, 1]"));
        }
        Ok(Self { psi })
    }

    pub fn psi(&self) -> &[f64] {
        &self.psi
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    /// `E[xi_i] = 2 psi_i - 1`.
    pub fn means(&self) -> Vec<f64> {
        self.psi.iter().map(|p| 2.0 * p - 1.0).collect()
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.psi.iter().map(|p| p * factor).collect())
    }
}

/// `count x n` matrix of `+-1` entries. Each entry compares a 32-bit draw
/// against `psi_i 2^32`, so `psi_i = 0` and `psi_i = 1` are exact.
pub fn bernoulli_vector_sample(
    spec: &BernoulliVectorSpec,
    stream: &mut RngStream,
    count: usize,
) -> SampleMatrix {
    let thresholds: Vec<u64> = spec
        .psi
        .iter()
        .map(|p| (p * 4_294_967_296.0).round() as u64)
        .collect();
    let mut data = Vec::with_capacity(count * thresholds.len());
    for _ in 0..count {
        for &t in &thresholds {
            let hit = u64::from(stream.next_u32()) < t;
            data.push(if hit { 1.0 } else { -1.0 });
        }
    }
    SampleMatrix {
        rows: count,
        cols: thresholds.len(),
        data,
    }
}
