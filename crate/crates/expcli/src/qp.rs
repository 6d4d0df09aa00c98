//! The Bernoulli portfolio instances: SAA and RSA values, bounds, and
//! tests comparing pairs of instances.

use rayon::prelude::*;
use riskopt::{
    as_test_two_sample, asymptotic_ci, bernoulli_vector_sample, bounds, compute_thetas,
    constants_portfolio, na_test_dominance, na_test_equality, run_rsa, solve_saa,
    BernoulliVectorSpec, ConfidenceInterval, PortfolioProgram, RiskSpec, RngStream, RsaSetup,
    SampleMatrix, SolveReport, Thetas, TwoSampleHypothesis,
};
use sha2::{Digest, Sha256};

use crate::cases::SAA_TOL;
use crate::config::{ExperimentConfig, PsiSource, QpInstance};
use crate::error::{config_err, Result};
use crate::table::{assemble, ColumnSet, ResultTable};

const QP_TAG: u64 = 0x7170_7270;
const PSI_TAG: u64 = 0x7073_6921;

pub fn psi_vector(inst: &QpInstance) -> Result<BernoulliVectorSpec> {
    let n = inst.n;
    let psi = match inst.psi {
        PsiSource::Grid { scale } => (0..n)
            .map(|i| scale * (i as f64 + 0.5) / n as f64)
            .collect(),
        PsiSource::Uniform { seed, scale } => {
            let mut rng = RngStream::new(seed, PSI_TAG).child(n as u64);
            (0..n).map(|_| scale * rng.uniform_open()).collect()
        }
    };
    Ok(BernoulliVectorSpec::new(psi)?)
}

fn key_id(key: &str) -> u64 {
    let digest = Sha256::digest(key.as_bytes());
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

/// Scenarios of `inst` for replication `rep`. Instances with the same
/// scenario law get the same matrix.
pub fn instance_sample(
    cfg: &ExperimentConfig,
    inst: &QpInstance,
    n: usize,
    rep: usize,
) -> Result<SampleMatrix> {
    let spec = psi_vector(inst)?;
    let mut rng = RngStream::new(cfg.seed, QP_TAG)
        .child(key_id(&inst.scenario_key()))
        .child(n as u64)
        .child(rep as u64);
    Ok(bernoulli_vector_sample(&spec, &mut rng, n))
}

struct Plan<'a> {
    inst: &'a QpInstance,
    program: PortfolioProgram,
    spec: RiskSpec,
    setup: RsaSetup,
}

fn plan(cfg: &ExperimentConfig) -> Result<Vec<Plan<'_>>> {
    cfg.instances
        .iter()
        .map(|inst| {
            let spec = RiskSpec::mean_avar(inst.w0, inst.w1, inst.alpha())?;
            Ok(Plan {
                inst,
                program: PortfolioProgram::new(inst.n, inst.lambda, inst.c0)?,
                setup: constants_portfolio(&spec, inst.n, inst.lambda)?,
                spec,
            })
        })
        .collect()
}

fn pair_indices(cfg: &ExperimentConfig) -> Result<Vec<(usize, usize)>> {
    let find = |name: &str| {
        cfg.instances
            .iter()
            .position(|i| i.name == name)
            .ok_or_else(|| config_err(format!("unknown instance '{name}'")))
    };
    cfg.pairs
        .iter()
        .map(|(a, b)| Ok((find(a)?, find(b)?)))
        .collect()
}

struct InstanceOutcome {
    report: SolveReport,
    g_bar: f64,
    rsa_ci: ConfidenceInterval,
}

fn replication(
    cfg: &ExperimentConfig,
    plans: &[Plan<'_>],
    thetas: &Thetas,
    n: usize,
    rep: usize,
) -> Result<Vec<InstanceOutcome>> {
    let mut cache: Vec<(String, SampleMatrix)> = Vec::new();
    plans
        .iter()
        .map(|p| {
            let key = p.inst.scenario_key();
            if !cache.iter().any(|(k, _)| *k == key) {
                cache.push((key.clone(), instance_sample(cfg, p.inst, n, rep)?));
            }
            let sample = &cache
                .iter()
                .find(|(k, _)| *k == key)
                .expect("cached above")
                .1;
            let report = solve_saa(&p.program, &p.spec, sample, SAA_TOL)?;
            let run = run_rsa(&p.program, &p.spec, &p.setup, sample)?;
            let rsa_ci = bounds(run.g_bar, &p.setup.constants, thetas, n)?;
            Ok(InstanceOutcome {
                report,
                g_bar: run.g_bar,
                rsa_ci,
            })
        })
        .collect()
}

/// All portfolio tables at one sample size.
pub fn qp_column(cfg: &ExperimentConfig, n: usize) -> Result<ColumnSet> {
    let plans = plan(cfg)?;
    let pairs = pair_indices(cfg)?;
    let thetas = compute_thetas(cfg.interval_beta)?;
    let reps: Vec<Vec<InstanceOutcome>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| replication(cfg, &plans, &thetas, n, rep))
        .collect::<Result<_>>()?;
    let m = cfg.reps as f64;
    let mean = |f: &dyn Fn(&Vec<InstanceOutcome>) -> f64| reps.iter().map(f).sum::<f64>() / m;
    let mut col = ColumnSet::default();
    for (i, p) in plans.iter().enumerate() {
        let name = &p.inst.name;
        col.push(
            "values",
            format!("{name} SAA"),
            mean(&|r| r[i].report.value),
        );
        col.push("values", format!("{name} RSA"), mean(&|r| r[i].g_bar));
    }
    for (i, p) in plans.iter().enumerate() {
        let name = &p.inst.name;
        let mut as_low = 0.0;
        let mut as_up = 0.0;
        for r in &reps {
            let ci = asymptotic_ci(&r[i].report, cfg.beta)?;
            as_low += ci.low;
            as_up += ci.up;
        }
        col.push("bounds", format!("{name} As low"), as_low / m);
        col.push("bounds", format!("{name} As up"), as_up / m);
        col.push(
            "bounds",
            format!("{name} RSA low"),
            mean(&|r| r[i].rsa_ci.low),
        );
        col.push(
            "bounds",
            format!("{name} RSA up"),
            mean(&|r| r[i].rsa_ci.up),
        );
    }
    for &(a, b) in &pairs {
        let (na, nb) = (&cfg.instances[a].name, &cfg.instances[b].name);
        let mut counts = [0usize; 4];
        for r in &reps {
            let tests = [
                as_test_two_sample(
                    &r[a].report,
                    &r[b].report,
                    cfg.beta,
                    TwoSampleHypothesis::Equality,
                )?,
                na_test_equality(&[r[a].rsa_ci, r[b].rsa_ci])?,
                as_test_two_sample(
                    &r[a].report,
                    &r[b].report,
                    cfg.beta,
                    TwoSampleHypothesis::Dominance,
                )?,
                na_test_dominance(&[r[a].rsa_ci, r[b].rsa_ci], 0)?,
            ];
            for (c, t) in counts.iter_mut().zip(&tests) {
                *c += usize::from(!t.reject);
            }
        }
        let rate = |c: usize| c as f64 / m;
        col.push("type2_eq", format!("{na}={nb} As"), rate(counts[0]));
        col.push("type2_eq", format!("{na}={nb} NA"), rate(counts[1]));
        col.push("type2_dom", format!("{na}>{nb} As"), rate(counts[2]));
        col.push("type2_dom", format!("{na}>{nb} NA"), rate(counts[3]));
    }
    Ok(col)
}

pub fn run_qp(cfg: &ExperimentConfig) -> Result<Vec<ResultTable>> {
    let columns = cfg
        .n_grid
        .iter()
        .map(|&n| qp_column(cfg, n))
        .collect::<Result<Vec<_>>>()?;
    let labels = cfg.n_grid.iter().map(usize::to_string).collect();
    assemble(cfg, "row", labels, &columns)
}

/// SAA values of one instance over all replications.
pub fn qp_replications(cfg: &ExperimentConfig, inst: &QpInstance, n: usize) -> Result<Vec<f64>> {
    let spec = RiskSpec::mean_avar(inst.w0, inst.w1, inst.alpha())?;
    let program = PortfolioProgram::new(inst.n, inst.lambda, inst.c0)?;
    (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let sample = instance_sample(cfg, inst, n, rep)?;
            Ok(solve_saa(&program, &spec, &sample, SAA_TOL)?.value)
        })
        .collect()
}
