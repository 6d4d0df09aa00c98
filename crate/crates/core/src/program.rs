//! Convex stochastic programs `min_{x in X} R(G(x, xi))`.
//!
//! A program supplies the loss `G(x, xi)`, a subgradient in `x`, the
//! feasible set `X` with its Euclidean projection, and an optional
//! deterministic add-on `lambda (|x|^2 [+ |tau|^2]) + c0`.

use crate::error::{contract, Result};

/// Feasible sets with exact Euclidean projections.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    /// A single point; nothing to optimize.
    Point(Vec<f64>),
    /// The box `lower <= x <= upper`.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// The unit simplex `{x >= 0, sum x = 1}` in dimension `dim`.
    Simplex { dim: usize },
    /// Cartesian product; blocks are laid out consecutively.
    Product(Vec<FeasibleSet>),
}

impl FeasibleSet {
    pub fn interval(lower: f64, upper: f64) -> Result<Self> {
        Self::boxed(vec![lower], vec![upper])
    }

    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(contract("box bounds of different lengths"));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite())
        {
            return Err(contract("box bounds must be finite with lower <= upper"));
        }
        Ok(Self::Box { lower, upper })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Point(p) => p.len(),
            Self::Box { lower, .. } => lower.len(),
            Self::Simplex { dim } => *dim,
            Self::Product(parts) => parts.iter().map(Self::dim).sum(),
        }
    }

    pub fn is_singleton(&self) -> bool {
        match self {
            Self::Point(_) => true,
            Self::Box { lower, upper } => lower == upper,
            Self::Simplex { dim } => *dim == 1,
            Self::Product(parts) => parts.iter().all(Self::is_singleton),
        }
    }

    /// A canonical interior start: the point, the box midpoint, the
    /// barycenter of the simplex.
    pub fn center(&self) -> Vec<f64> {
        match self {
            Self::Point(p) => p.clone(),
            Self::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| 0.5 * (l + u))
                .collect(),
            Self::Simplex { dim } => vec![1.0 / *dim as f64; *dim],
            Self::Product(parts) => parts.iter().flat_map(Self::center).collect(),
        }
    }

    /// Euclidean projection, in place.
    pub fn project(&self, x: &mut [f64]) {
        match self {
            Self::Point(p) => x.copy_from_slice(p),
            Self::Box { lower, upper } => {
                for ((xi, l), u) in x.iter_mut().zip(lower).zip(upper) {
                    *xi = xi.clamp(*l, *u);
                }
            }
            Self::Simplex { .. } => project_simplex(x),
            Self::Product(parts) => {
                let mut offset = 0;
                for part in parts {
                    let d = part.dim();
                    part.project(&mut x[offset..offset + d]);
                    offset += d;
                }
            }
        }
    }

    /// A minimizer of `<g, y>` over the set.
    pub fn linear_minimizer(&self, g: &[f64]) -> Vec<f64> {
        match self {
            Self::Point(p) => p.clone(),
            Self::Box { lower, upper } => g
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(gi, (l, u))| if *gi > 0.0 { *l } else { *u })
                .collect(),
            Self::Simplex { dim } => {
                let mut y = vec![0.0; *dim];
                let best = g
                    .iter()
                    .enumerate()
                    .min_by(|a, b| a.1.total_cmp(b.1))
                    .map_or(0, |(i, _)| i);
                if *dim > 0 {
                    y[best] = 1.0;
                }
                y
            }
            Self::Product(parts) => {
                let mut y = Vec::with_capacity(g.len());
                let mut offset = 0;
                for part in parts {
                    let d = part.dim();
                    y.extend(part.linear_minimizer(&g[offset..offset + d]));
                    offset += d;
                }
                y
            }
        }
    }

    /// `max_{y in X} |y - x|`, computed exactly.
    pub fn max_distance_from(&self, x: &[f64]) -> f64 {
        self.max_sq_distance_from(x).sqrt()
    }

    fn max_sq_distance_from(&self, x: &[f64]) -> f64 {
        match self {
            Self::Point(p) => p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum(),
            Self::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(xi, (l, u))| (xi - l).abs().max((u - xi).abs()).powi(2))
                .sum(),
            Self::Simplex { .. } => {
                // a convex function peaks at a vertex
                let sq: f64 = x.iter().map(|v| v * v).sum();
                x.iter()
                    .map(|v| sq - v * v + (1.0 - v) * (1.0 - v))
                    .fold(0.0, f64::max)
            }
            Self::Product(parts) => {
                let mut offset = 0;
                let mut total = 0.0;
                for part in parts {
                    let d = part.dim();
                    total += part.max_sq_distance_from(&x[offset..offset + d]);
                    offset += d;
                }
                total
            }
        }
    }
}

/// Projection onto the unit simplex by sorting and thresholding.
pub fn project_simplex(x: &mut [f64]) {
    if x.is_empty() {
        return;
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    for v in x.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
}

/// Deterministic part of the objective: `lambda (|x|^2 [+ |tau|^2]) + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Regularizer {
    pub lambda: f64,
    /// Whether the quadratic term also penalizes the quantile block.
    pub includes_tau: bool,
    pub shift: f64,
}

impl Regularizer {
    pub fn value(&self, x: &[f64], tau: &[f64]) -> f64 {
        self.quadratic(x, tau) + self.shift
    }

    /// The ridge term alone.
    pub fn quadratic(&self, x: &[f64], tau: &[f64]) -> f64 {
        let mut sq: f64 = x.iter().map(|v| v * v).sum();
        if self.includes_tau {
            sq += tau.iter().map(|v| v * v).sum::<f64>();
        }
        self.lambda * sq
    }

    /// Quadratic coefficient acting on each `tau_i`.
    pub fn tau_lambda(&self) -> f64 {
        if self.includes_tau {
            self.lambda
        } else {
            0.0
        }
    }
}

/// A convex stochastic program. `loss` must be convex in `x` for every
/// scenario; scenarios are rows of a sample matrix.
pub trait StochasticProgram: Sync {
    fn feasible_set(&self) -> &FeasibleSet;

    fn loss(&self, x: &[f64], xi: &[f64]) -> f64;

    /// Writes a subgradient of `loss(., xi)` at `x` into `out`.
    fn loss_subgradient(&self, x: &[f64], xi: &[f64], out: &mut [f64]);

    fn dim(&self) -> usize {
        self.feasible_set().dim()
    }

    fn start(&self) -> Vec<f64> {
        self.feasible_set().center()
    }

    fn regularizer(&self) -> Regularizer {
        Regularizer::default()
    }

    /// Bounds known to contain an optimal quantile block, if any.
    fn tau_bounds(&self) -> Option<(f64, f64)> {
        None
    }

    /// True when `loss(x, xi) = <xi, x>`, which enables the dual solver.
    fn is_linear(&self) -> bool {
        false
    }

    /// Maximal distance from the start point to a feasible point.
    fn diameter(&self) -> f64 {
        self.feasible_set().max_distance_from(&self.start())
    }
}

/// The degenerate program whose only decision is fixed: `G(x*, xi) = xi_1`.
/// Solving it estimates the risk of the scenario distribution itself.
#[derive(Debug, Clone, PartialEq)]
pub struct SingletonProgram {
    set: FeasibleSet,
    support: Option<(f64, f64)>,
}

impl SingletonProgram {
    pub fn new() -> Self {
        Self {
            set: FeasibleSet::Point(Vec::new()),
            support: None,
        }
    }

    /// Declares the support of `xi_1`, which bounds every quantile.
    pub fn with_support(lower: f64, upper: f64) -> Self {
        Self {
            set: FeasibleSet::Point(Vec::new()),
            support: Some((lower, upper)),
        }
    }
}

impl Default for SingletonProgram {
    fn default() -> Self {
        Self::new()
    }
}

impl StochasticProgram for SingletonProgram {
    fn feasible_set(&self) -> &FeasibleSet {
        &self.set
    }

    fn loss(&self, _x: &[f64], xi: &[f64]) -> f64 {
        xi[0]
    }

    fn loss_subgradient(&self, _x: &[f64], _xi: &[f64], _out: &mut [f64]) {}

    fn tau_bounds(&self) -> Option<(f64, f64)> {
        self.support
    }
}

/// Portfolio selection on the simplex with linear loss `<xi, x>`,
/// ridge term `lambda (|x|^2 + |tau|^2)` and constant `c0`; the quantile
/// block is restricted to `[-1, 1]`, which contains every loss value when
/// `|xi_i| <= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioProgram {
    set: FeasibleSet,
    lambda: f64,
    shift: f64,
}

impl PortfolioProgram {
    pub fn new(n: usize, lambda: f64, shift: f64) -> Result<Self> {
        if n == 0 {
            return Err(contract("portfolio with no assets"));
        }
        if !(lambda >= 0.0 && lambda.is_finite() && shift.is_finite()) {
            return Err(contract("ridge weight must be finite and nonnegative"));
        }
        Ok(Self {
            set: FeasibleSet::Simplex { dim: n },
            lambda,
            shift,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }
}

impl StochasticProgram for PortfolioProgram {
    fn feasible_set(&self) -> &FeasibleSet {
        &self.set
    }

    fn loss(&self, x: &[f64], xi: &[f64]) -> f64 {
        x.iter().zip(xi).map(|(a, b)| a * b).sum()
    }

    fn loss_subgradient(&self, _x: &[f64], xi: &[f64], out: &mut [f64]) {
        out.copy_from_slice(xi);
    }

    fn regularizer(&self) -> Regularizer {
        Regularizer {
            lambda: self.lambda,
            includes_tau: true,
            shift: self.shift,
        }
    }

    fn tau_bounds(&self) -> Option<(f64, f64)> {
        Some((-1.0, 1.0))
    }

    fn is_linear(&self) -> bool {
        true
    }
}
