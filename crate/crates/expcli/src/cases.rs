//! Comparing the risk of two truncated normal distributions, and the
//! crossing weight `w_crit`.

use rayon::prelude::*;
use riskopt::{
    as_test_two_sample, asymptotic_ci, avar_closed, bounds, compute_thetas, constants_risk_program,
    na_test_dominance, na_test_equality, run_rsa, solve_saa, ConfidenceInterval,
    EmpiricalDistribution, RiskProgramBounds, RiskSpec, RngStream, RsaSetup, SampleMatrix,
    SingletonProgram, SolveReport, Thetas, TruncNormalSpec, TwoSampleHypothesis,
};

use crate::config::{Case, ExperimentConfig};
use crate::error::Result;
use crate::table::{assemble, ColumnSet, ResultTable};

const COMPARE_TAG: u64 = 0x636d_7064;
const WCRIT_TAG: u64 = 0x7763_7274;

/// Accuracy target of the SAA solves; the scalar path is exact anyway.
pub(crate) const SAA_TOL: f64 = 1e-9;

fn case_index(case: Case) -> u64 {
    match case {
        Case::I => 1,
        Case::II => 2,
        Case::III => 3,
    }
}

pub fn distributions(case: Case) -> Result<[TruncNormalSpec; 2]> {
    let (a, b) = case.support();
    let [(m1, s1), (m2, s2)] = case.parameters();
    Ok([
        TruncNormalSpec::new(m1, s1, a, b)?,
        TruncNormalSpec::new(m2, s2, a, b)?,
    ])
}

/// `w0 E[xi] + w1 AVaR_alpha(xi)` in closed form.
pub fn true_value(dist: &TruncNormalSpec, w: (f64, f64), alpha: f64) -> Result<f64> {
    Ok(w.0 * dist.mean() + w.1 * dist.avar(alpha)?)
}

pub fn weight_label(w: (f64, f64)) -> String {
    format!("({},{})", w.0, w.1)
}

/// Sample of distribution `d` (0 or 1) for replication `rep` at size `n`.
/// It does not depend on the weight row, so all rows see the same data.
pub fn case_sample(cfg: &ExperimentConfig, d: usize, n: usize, rep: usize) -> Result<Vec<f64>> {
    let dist = &distributions(cfg.case)?[d];
    let mut rng = RngStream::new(cfg.seed, COMPARE_TAG)
        .child(case_index(cfg.case))
        .child(n as u64)
        .child(rep as u64)
        .child(d as u64);
    Ok(dist.sample(&mut rng, n))
}

struct RowPlan {
    w: (f64, f64),
    spec: RiskSpec,
    setup: RsaSetup,
    /// Index of the distribution with the larger true risk.
    hi: usize,
}

fn plan(cfg: &ExperimentConfig) -> Result<Vec<RowPlan>> {
    let dists = distributions(cfg.case)?;
    let (a, b) = cfg.case.support();
    cfg.weights
        .iter()
        .map(|&w| {
            let spec = RiskSpec::mean_avar(w.0, w.1, cfg.alpha)?;
            let setup = constants_risk_program(&spec, &RiskProgramBounds::scalar(a, b))?;
            let v0 = true_value(&dists[0], w, cfg.alpha)?;
            let v1 = true_value(&dists[1], w, cfg.alpha)?;
            Ok(RowPlan {
                w,
                spec,
                setup,
                hi: usize::from(v1 > v0),
            })
        })
        .collect()
}

struct RowOutcome {
    saa: [f64; 2],
    rsa: [f64; 2],
    as_ci: [ConfidenceInterval; 2],
    rsa_ci: [ConfidenceInterval; 2],
    as_eq: bool,
    na_eq: bool,
    as_dom: bool,
    na_dom: bool,
}

fn replication(
    cfg: &ExperimentConfig,
    plans: &[RowPlan],
    thetas: &Thetas,
    n: usize,
    rep: usize,
) -> Result<Vec<RowOutcome>> {
    let samples = [
        SampleMatrix::from_column(case_sample(cfg, 0, n, rep)?),
        SampleMatrix::from_column(case_sample(cfg, 1, n, rep)?),
    ];
    let program = SingletonProgram::new();
    plans
        .iter()
        .map(|p| {
            let solve = |d: usize| -> Result<(SolveReport, f64, ConfidenceInterval)> {
                let report = solve_saa(&program, &p.spec, &samples[d], SAA_TOL)?;
                let run = run_rsa(&program, &p.spec, &p.setup, &samples[d])?;
                let ci = bounds(run.g_bar, &p.setup.constants, thetas, n)?;
                Ok((report, run.g_bar, ci))
            };
            let (r0, g0, c0) = solve(0)?;
            let (r1, g1, c1) = solve(1)?;
            let reports = [&r0, &r1];
            let rsa_ci = [c0, c1];
            let (hi, lo) = (p.hi, 1 - p.hi);
            Ok(RowOutcome {
                saa: [r0.value, r1.value],
                rsa: [g0, g1],
                as_ci: [asymptotic_ci(&r0, cfg.beta)?, asymptotic_ci(&r1, cfg.beta)?],
                as_eq: as_test_two_sample(&r0, &r1, cfg.beta, TwoSampleHypothesis::Equality)?
                    .reject,
                na_eq: na_test_equality(&rsa_ci)?.reject,
                as_dom: as_test_two_sample(
                    reports[hi],
                    reports[lo],
                    cfg.beta,
                    TwoSampleHypothesis::Dominance,
                )?
                .reject,
                na_dom: na_test_dominance(&[rsa_ci[hi], rsa_ci[lo]], 0)?.reject,
                rsa_ci,
            })
        })
        .collect()
}

fn mean(xs: impl Iterator<Item = f64>, count: usize) -> f64 {
    xs.sum::<f64>() / count as f64
}

/// Acceptance rate of a test whose null is false.
fn type2(rejects: impl Iterator<Item = bool>, count: usize) -> f64 {
    rejects.filter(|r| !r).count() as f64 / count as f64
}

/// All compare-dist tables at one sample size.
pub fn compare_column(cfg: &ExperimentConfig, n: usize) -> Result<ColumnSet> {
    let plans = plan(cfg)?;
    let thetas = compute_thetas(cfg.interval_beta)?;
    let reps: Vec<Vec<RowOutcome>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| replication(cfg, &plans, &thetas, n, rep))
        .collect::<Result<_>>()?;
    let m = cfg.reps;
    let mut col = ColumnSet::default();
    for (i, p) in plans.iter().enumerate() {
        let label = weight_label(p.w);
        let outs = || reps.iter().map(move |r| &r[i]);
        for d in 0..2 {
            let x = format!("xi{}", d + 1);
            col.push(
                "estimates",
                format!("{label} SAA {x}"),
                mean(outs().map(|o| o.saa[d]), m),
            );
            col.push(
                "estimates",
                format!("{label} RSA {x}"),
                mean(outs().map(|o| o.rsa[d]), m),
            );
        }
        for d in 0..2 {
            let x = format!("xi{}", d + 1);
            col.push(
                "bounds",
                format!("{label} As low {x}"),
                mean(outs().map(|o| o.as_ci[d].low), m),
            );
            col.push(
                "bounds",
                format!("{label} As up {x}"),
                mean(outs().map(|o| o.as_ci[d].up), m),
            );
            col.push(
                "bounds",
                format!("{label} RSA low {x}"),
                mean(outs().map(|o| o.rsa_ci[d].low), m),
            );
            col.push(
                "bounds",
                format!("{label} RSA up {x}"),
                mean(outs().map(|o| o.rsa_ci[d].up), m),
            );
        }
        col.push(
            "type2_as_eq",
            label.clone(),
            type2(outs().map(|o| o.as_eq), m),
        );
        col.push(
            "type2_na_eq",
            label.clone(),
            type2(outs().map(|o| o.na_eq), m),
        );
        col.push(
            "type2_as_dom",
            label.clone(),
            type2(outs().map(|o| o.as_dom), m),
        );
        col.push("type2_na_dom", label, type2(outs().map(|o| o.na_dom), m));
    }
    Ok(col)
}

pub fn run_compare(cfg: &ExperimentConfig) -> Result<Vec<ResultTable>> {
    let columns = cfg
        .n_grid
        .iter()
        .map(|&n| compare_column(cfg, n))
        .collect::<Result<Vec<_>>>()?;
    let labels = cfg.n_grid.iter().map(usize::to_string).collect();
    assemble(cfg, "row", labels, &columns)
}

/// SAA values of distribution `d` for weight row `w` over all replications.
pub fn saa_replications(
    cfg: &ExperimentConfig,
    w: (f64, f64),
    d: usize,
    n: usize,
) -> Result<Vec<f64>> {
    let spec = RiskSpec::mean_avar(w.0, w.1, cfg.alpha)?;
    (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let sample = SampleMatrix::from_column(case_sample(cfg, d, n, rep)?);
            Ok(solve_saa(&SingletonProgram::new(), &spec, &sample, SAA_TOL)?.value)
        })
        .collect()
}

/// Weight on the expectation at which `w E + (1 - w) AVaR_alpha` ranks the
/// two samples equally:
/// `(A1 - A2) / (E2 - E1 + A1 - A2)`.
pub fn wcrit_plugin(xi1: &[f64], xi2: &[f64], alpha: f64) -> Result<f64> {
    let d1 = EmpiricalDistribution::from_slice(xi1)?;
    let d2 = EmpiricalDistribution::from_slice(xi2)?;
    wcrit_from_moments(
        (d1.mean(), avar_closed(&d1, alpha)?),
        (d2.mean(), avar_closed(&d2, alpha)?),
    )
}

/// Same formula from `(mean, AVaR)` pairs.
pub fn wcrit_from_moments(first: (f64, f64), second: (f64, f64)) -> Result<f64> {
    let gap = first.1 - second.1;
    let denom = second.0 - first.0 + gap;
    if !(denom > 0.0) {
        return Err(riskopt::Error::Domain(format!(
            "no crossing weight: denominator {denom} is not positive"
        ))
        .into());
    }
    Ok(gap / denom)
}

pub fn wcrit_column(cfg: &ExperimentConfig, n: usize) -> Result<ColumnSet> {
    let dists = distributions(cfg.case)?;
    let root = RngStream::new(cfg.seed, WCRIT_TAG)
        .child(case_index(cfg.case))
        .child(n as u64);
    let xi1 = dists[0].sample(&mut root.child(0), n);
    let xi2 = dists[1].sample(&mut root.child(1), n);
    let mut col = ColumnSet::default();
    col.push(
        "wcrit",
        "plugin".into(),
        wcrit_plugin(&xi1, &xi2, cfg.alpha)?,
    );
    let exact = wcrit_from_moments(
        (dists[0].mean(), dists[0].avar(cfg.alpha)?),
        (dists[1].mean(), dists[1].avar(cfg.alpha)?),
    )?;
    col.push("wcrit", "exact".into(), exact);
    Ok(col)
}

pub fn run_wcrit(cfg: &ExperimentConfig) -> Result<Vec<ResultTable>> {
    let columns = cfg
        .n_grid
        .iter()
        .map(|&n| wcrit_column(cfg, n))
        .collect::<Result<Vec<_>>>()?;
    let labels = cfg.n_grid.iter().map(usize::to_string).collect();
    assemble(cfg, "row", labels, &columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Experiment, RawConfig};

    fn cfg(entries: &[(&str, &str)], experiment: Experiment) -> ExperimentConfig {
        let mut raw = RawConfig::new();
        for (k, v) in entries {
            raw.set(k, *v).unwrap();
        }
        raw.resolve(experiment).unwrap()
    }

    #[test]
    fn wcrit_sign_checks() {
        assert!(
            (wcrit_from_moments((10.0, 20.0), (14.0, 15.0)).unwrap() - 5.0 / 9.0).abs() < 1e-15
        );
        assert!(wcrit_from_moments((14.0, 15.0), (10.0, 20.0)).is_err());
        // a pure shift moves mean and AVaR together, so no crossing exists
        let xi: Vec<f64> = (0..100).map(f64::from).collect();
        let shifted: Vec<f64> = xi.iter().map(|v| v + 2.0).collect();
        assert!(wcrit_plugin(&xi, &shifted, 0.9).is_err());
    }

    #[test]
    fn exact_wcrit_for_case_three() {
        let c = cfg(&[("case", "III"), ("n_grid", "1000")], Experiment::Wcrit);
        let col = wcrit_column(&c, 1000).unwrap();
        let exact = col.get("wcrit", "exact").unwrap();
        assert!((exact - 0.71).abs() < 0.02, "{exact}");
    }

    #[test]
    fn rows_share_samples() {
        let c = cfg(&[("reps", "3"), ("n_grid", "50")], Experiment::CompareDist);
        let a = case_sample(&c, 0, 50, 1).unwrap();
        assert_eq!(a, case_sample(&c, 0, 50, 1).unwrap());
        assert_ne!(a, case_sample(&c, 1, 50, 1).unwrap());
        assert_ne!(a, case_sample(&c, 0, 50, 2).unwrap());
    }

    #[test]
    fn column_layout() {
        let c = cfg(
            &[
                ("reps", "4"),
                ("n_grid", "100"),
                ("weights", "0.1:0.9,0.9:0.1"),
            ],
            Experiment::CompareDist,
        );
        let col = compare_column(&c, 100).unwrap();
        let names: Vec<&str> = col.tables.iter().map(|(t, _)| t.as_str()).collect();
        assert_eq!(
            names,
            [
                "estimates",
                "bounds",
                "type2_as_eq",
                "type2_na_eq",
                "type2_as_dom",
                "type2_na_dom"
            ]
        );
        assert_eq!(col.tables[0].1.len(), 8);
        assert_eq!(col.tables[1].1.len(), 16);
        // case I: xi2 is far above xi1, the asymptotic tests never miss
        assert_eq!(col.get("type2_as_eq", "(0.1,0.9)"), Some(0.0));
        let lo = col.get("bounds", "(0.1,0.9) RSA low xi1").unwrap();
        let up = col.get("bounds", "(0.1,0.9) RSA up xi1").unwrap();
        let est = col.get("estimates", "(0.1,0.9) RSA xi1").unwrap();
        assert!(lo < est && est < up);
    }
}
