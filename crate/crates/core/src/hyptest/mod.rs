//! Tests on the optimal values `v_1, ..., v_K` of several programs.
//!
//! Nonasymptotic tests compare confidence intervals `[Low_i, Up_i]`, for
//! instance those built by [`crate::rsa::bounds`]. Asymptotic tests use the
//! normal limit of the SAA value with the estimated standard deviation
//! `nu_N`. For general linear hypotheses on `theta = (v_1, ..., v_K)` from
//! `M` replications of the estimator see [`hotelling_subspace_test`] and
//! [`perlman_cone_test`].

mod multivariate;

pub use multivariate::{
    hotelling_lr_diagnostic, hotelling_subspace_test, perlman_cone_test, perlman_err,
    project_onto_cone, ConeKind, ConeSpec, HotellingScaling,
};

use crate::error::{contract, domain, Result};
use crate::saa::SolveReport;
use crate::stats::normal_quantile;

/// How an interval was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntervalMethod {
    Asymptotic,
    Rsa,
}

/// `[low, up]` with nominal coverage `level`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceInterval {
    pub low: f64,
    pub up: f64,
    pub level: f64,
    pub method: IntervalMethod,
}

impl ConfidenceInterval {
    pub fn new(low: f64, up: f64, level: f64, method: IntervalMethod) -> Result<Self> {
        if !(low <= up) {
            return Err(contract(format!("interval [{low}, {up}] is empty")));
        }
        if !(level > 0.0 && level < 1.0) {
            return Err(domain(format!("confidence level {level} outside (0, 1)")));
        }
        Ok(Self {
            low,
            up,
            level,
            method,
        })
    }

    pub fn width(&self) -> f64 {
        self.up - self.low
    }

    pub fn contains(&self, v: f64) -> bool {
        self.low <= v && v <= self.up
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self {
            low: self.low + c,
            up: self.up + c,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestKind {
    IntervalEquality,
    IntervalDominance,
    IntervalOrdered,
    IntervalValue,
    AsymptoticValue,
    AsymptoticTwoSample,
    Hotelling,
    Perlman,
}

/// A test decision. `reject` holds exactly when `statistic > threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub test: TestKind,
    pub reject: bool,
    pub statistic: f64,
    pub threshold: f64,
}

impl TestOutcome {
    fn decide(test: TestKind, statistic: f64, threshold: f64) -> Self {
        Self {
            test,
            reject: statistic > threshold,
            statistic,
            threshold,
        }
    }
}

/// Alternatives for a test on a single optimal value against `rho0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueHypothesis {
    /// `H0: v = rho0`.
    TwoSided,
    /// `H0: v <= rho0`.
    AtMost,
    /// `H0: v >= rho0`.
    AtLeast,
}

/// `H0` for two independent programs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TwoSampleHypothesis {
    /// `H0: v_1 = v_2`.
    Equality,
    /// `H0: v_1 <= v_2`.
    Dominance,
}

fn common_level(intervals: &[ConfidenceInterval]) -> Result<f64> {
    let level = intervals[0].level;
    if intervals.iter().any(|c| (c.level - level).abs() > 1e-12) {
        return Err(contract(
            "intervals were built at different confidence levels",
        ));
    }
    Ok(level)
}

/// `H0: v_1 = ... = v_K`; rejects when the intervals have no common point,
/// i.e. `max_i Low_i > min_i Up_i`.
pub fn na_test_equality(intervals: &[ConfidenceInterval]) -> Result<TestOutcome> {
    if intervals.len() < 2 {
        return Err(contract("equality test needs at least two intervals"));
    }
    common_level(intervals)?;
    let max_low = intervals
        .iter()
        .map(|c| c.low)
        .fold(f64::NEG_INFINITY, f64::max);
    let min_up = intervals.iter().map(|c| c.up).fold(f64::INFINITY, f64::min);
    Ok(TestOutcome::decide(
        TestKind::IntervalEquality,
        max_low - min_up,
        0.0,
    ))
}

/// `H0: v_i <= v_j` for all `j`; rejects when `Low_i > Up_j` for some `j != i`.
pub fn na_test_dominance(intervals: &[ConfidenceInterval], i: usize) -> Result<TestOutcome> {
    if intervals.len() < 2 {
        return Err(contract("dominance test needs at least two intervals"));
    }
    if i >= intervals.len() {
        return Err(contract(format!(
            "index {i} out of range for {} intervals",
            intervals.len()
        )));
    }
    common_level(intervals)?;
    let min_up = intervals
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, c)| c.up)
        .fold(f64::INFINITY, f64::min);
    Ok(TestOutcome::decide(
        TestKind::IntervalDominance,
        intervals[i].low - min_up,
        0.0,
    ))
}

/// `H0: v_1 <= v_2 <= ... <= v_K`; rejects when `Low_i > Up_{i+1}` for some `i`.
pub fn na_test_ordered(intervals: &[ConfidenceInterval]) -> Result<TestOutcome> {
    if intervals.len() < 2 {
        return Err(contract("ordering test needs at least two intervals"));
    }
    let statistic = intervals
        .windows(2)
        .map(|p| p[0].low - p[1].up)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(TestOutcome::decide(
        TestKind::IntervalOrdered,
        statistic,
        0.0,
    ))
}

/// Test of a single optimal value against `rho0` from one interval.
pub fn na_test_value(
    interval: &ConfidenceInterval,
    rho0: f64,
    hypothesis: ValueHypothesis,
) -> TestOutcome {
    let statistic = match hypothesis {
        ValueHypothesis::TwoSided => (rho0 - interval.up).max(interval.low - rho0),
        ValueHypothesis::AtMost => interval.low - rho0,
        ValueHypothesis::AtLeast => rho0 - interval.up,
    };
    TestOutcome::decide(TestKind::IntervalValue, statistic, 0.0)
}

/// Asymptotic test of a single optimal value against `rho0`. With
/// `nu_N = 0` the threshold is zero and the estimate is compared exactly.
pub fn as_test_value(
    report: &SolveReport,
    rho0: f64,
    beta: f64,
    hypothesis: ValueHypothesis,
) -> Result<TestOutcome> {
    check_beta(beta)?;
    let se = report.nu_hat / (report.n as f64).sqrt();
    let (statistic, threshold) = match hypothesis {
        ValueHypothesis::TwoSided => (
            (report.value - rho0).abs(),
            se * normal_quantile(1.0 - beta / 2.0)?,
        ),
        ValueHypothesis::AtMost => (report.value - rho0, se * normal_quantile(1.0 - beta)?),
        ValueHypothesis::AtLeast => (rho0 - report.value, se * normal_quantile(1.0 - beta)?),
    };
    Ok(TestOutcome::decide(
        TestKind::AsymptoticValue,
        statistic,
        threshold,
    ))
}

/// Asymptotic two-sample test from two independent SAA solves with the
/// same sample size.
pub fn as_test_two_sample(
    first: &SolveReport,
    second: &SolveReport,
    beta: f64,
    hypothesis: TwoSampleHypothesis,
) -> Result<TestOutcome> {
    check_beta(beta)?;
    if first.n != second.n {
        return Err(contract(format!(
            "sample sizes differ: {} and {}",
            first.n, second.n
        )));
    }
    let n = first.n as f64;
    let se = ((first.nu_hat * first.nu_hat + second.nu_hat * second.nu_hat) / n).sqrt();
    let diff = first.value - second.value;
    let (statistic, threshold) = match hypothesis {
        TwoSampleHypothesis::Equality => (diff.abs(), se * normal_quantile(1.0 - beta / 2.0)?),
        TwoSampleHypothesis::Dominance => (diff, se * normal_quantile(1.0 - beta)?),
    };
    Ok(TestOutcome::decide(
        TestKind::AsymptoticTwoSample,
        statistic,
        threshold,
    ))
}

/// Sum of the two widths: the gap between two optimal values beyond which
/// the interval tests are guaranteed power.
pub fn separation_margin(a: &ConfidenceInterval, b: &ConfidenceInterval) -> f64 {
    a.width() + b.width()
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("significance level {beta} outside (0, 1)")))
    }
}
