//! The acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! with a failure status if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::Rng;
use riskopt::stats::{cov_pospart_oracle, jarque_bera, normal_quantile, MomentSummary};
use riskopt::{
    as_test_two_sample, asymptotic_ci, avar_closed, avar_variational, bounds, compute_thetas,
    constants_risk_program, hotelling_subspace_test, perlman_cone_test, risk_plugin, solve_saa,
    ConeSpec, EmpiricalDistribution, HotellingScaling, PortfolioProgram, RiskProgramBounds,
    RiskSpec, RngStream, SampleMatrix, SingletonProgram, TruncNormalSpec, TwoSampleHypothesis,
};
use riskopt_exp::cases::{compare_column, saa_replications};
use riskopt_exp::config::{Experiment, ExperimentConfig, RawConfig};
use riskopt_exp::qp::{instance_sample, qp_column};

const SEED: u64 = 20_240_601;

// Pinned tolerances.
const AVAR_REL_TOL: f64 = 1e-10;
const AXIOM_REL_TOL: f64 = 1e-12;
const ORACLE_SE: f64 = 3.0;
const PLUGIN_TOL: f64 = 0.05;
const BOUND_TOL: f64 = 0.03;
const COVERAGE_RANGE: (f64, f64) = (0.85, 0.95);
const WIDTH_TOL: f64 = 0.3;
const THETA_TOL: f64 = 1e-3;
const BINOMIAL_SE: f64 = 3.0;
const HARD_CELL_TOL: f64 = 0.12;
const JB_LEVEL: f64 = 0.05;
const JB_MIN_SEEDS: usize = 8;
const QP_VALUE_TOL: f64 = 0.005;
const PERLMAN_SLACK: f64 = 0.03;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn with_budget(v: Verdict, started: Instant, budget: Option<Duration>) -> Verdict {
    match budget {
        Some(b) if started.elapsed() > b => verdict(
            false,
            format!("{}; over the {}s budget", v.detail, b.as_secs()),
        ),
        _ => v,
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn config(experiment: Experiment, entries: &[(&str, String)]) -> ExperimentConfig {
    let mut raw = RawConfig::new();
    raw.set("seed", SEED.to_string()).unwrap();
    raw.set("scale", "paper").unwrap();
    for (k, v) in entries {
        raw.set(k, v.clone()).unwrap();
    }
    raw.resolve(experiment).unwrap()
}

fn case_one(tail: f64) -> (RiskSpec, TruncNormalSpec) {
    (
        RiskSpec::mean_avar(0.1, 0.9, 1.0 - tail).unwrap(),
        TruncNormalSpec::new(10.0, 1.0, 0.0, 30.0).unwrap(),
    )
}

fn random_sample(rng: &mut RngStream) -> Vec<f64> {
    let n = rng.random_range(2..=500);
    let scale = rng.random_range(0.1..100.0);
    (0..n).map(|_| scale * (rng.uniform_open() - 0.5)).collect()
}

fn c1_avar_equivalence() -> Verdict {
    let mut rng = RngStream::new(SEED, 1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let d = EmpiricalDistribution::new(random_sample(&mut rng)).unwrap();
        let alpha = f64::from(rng.random_range(1..=99u32)) / 100.0;
        let c = avar_closed(&d, alpha).unwrap();
        let v = avar_variational(&d, alpha).unwrap().value;
        worst = worst.max((c - v).abs() / (1.0 + c.abs().max(v.abs())));
    }
    verdict(
        worst <= AVAR_REL_TOL,
        format!("1000 cases, worst relative gap {worst:.2e}"),
    )
}

fn c2_axioms() -> Verdict {
    let mut rng = RngStream::new(SEED, 2);
    let mut failures = 0;
    for _ in 0..1000 {
        let z = random_sample(&mut rng);
        let k = rng.random_range(1..=3usize);
        let mut levels: Vec<u32> = Vec::new();
        while levels.len() < k {
            let a = rng.random_range(1..100u32);
            if !levels.contains(&a) {
                levels.push(a);
            }
        }
        levels.sort_unstable();
        let raw: Vec<f64> = (0..=k).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let spec = RiskSpec::new(
            raw.iter().map(|w| w / total).collect(),
            levels.iter().map(|&a| f64::from(a) / 100.0).collect(),
        )
        .unwrap();
        let d = EmpiricalDistribution::new(z.clone()).unwrap();
        let r = risk_plugin(&d, &spec);
        let a = rng.random_range(-50.0..50.0);
        let t = rng.random_range(0.0..20.0);
        let bumped: Vec<f64> = z.iter().map(|v| v + rng.random_range(0.0..5.0)).collect();
        let ok = rel_close(risk_plugin(&d.shifted(a), &spec), r + a, AXIOM_REL_TOL)
            && rel_close(risk_plugin(&d.scaled(t), &spec), t * r, AXIOM_REL_TOL)
            && risk_plugin(&EmpiricalDistribution::new(bumped).unwrap(), &spec)
                >= r - AXIOM_REL_TOL * (1.0 + r.abs());
        failures += usize::from(!ok);
    }
    verdict(
        failures == 0,
        format!(
            "{failures}/1000 cases violate an axiom beyond {AXIOM_REL_TOL:e} relative rounding"
        ),
    )
}

fn c3_oracle() -> Verdict {
    let n = 1_000_000;
    let specs = [
        (10.0, 1.0),
        (20.0, 1.0),
        (5.0, 1.0),
        (10.0, 25.0),
        (10.0, 49.0),
        (14.0, 0.25),
    ];
    let mut worst = 0.0f64;
    for (i, &(m, s2)) in specs.iter().enumerate() {
        let spec = TruncNormalSpec::new(m, s2, 0.0, 30.0).unwrap();
        let xs = spec.sample(&mut RngStream::new(SEED, 30 + i as u64), n);
        for tau in [spec.mean(), spec.quantile(0.9).unwrap()] {
            let oracle = cov_pospart_oracle(|x| spec.cdf(x), tau, 30.0, 20_000).unwrap();
            let y: Vec<f64> = xs.iter().map(|z| (z - tau).max(0.0)).collect();
            let mom = MomentSummary::from_sample(&y).unwrap();
            let mu4 = y.iter().map(|v| (v - mom.mean).powi(4)).sum::<f64>() / n as f64;
            let se = ((mu4 - mom.variance * mom.variance) / n as f64).sqrt();
            worst = worst.max((mom.variance - oracle).abs() / se);
        }
    }
    verdict(
        worst <= ORACLE_SE,
        format!("12 checks, worst deviation {worst:.2} Monte Carlo SEs"),
    )
}

fn c4_table1() -> Verdict {
    let (reps, n) = (200, 10_000);
    let mut parts = Vec::new();
    let mut pass = true;
    for (tail, reference) in [(0.01, 12.40), (0.1, 11.58), (0.5, 10.72)] {
        let (spec, dist) = case_one(tail);
        let mean = (0..reps)
            .map(|r| {
                let s =
                    SampleMatrix::from_column(dist.sample(&mut RngStream::new(SEED, 400 + r), n));
                solve_saa(&SingletonProgram::new(), &spec, &s, 1e-9)
                    .unwrap()
                    .value
            })
            .sum::<f64>()
            / reps as f64;
        pass &= (mean - reference).abs() <= PLUGIN_TOL;
        parts.push(format!("1-a={tail}: {mean:.4} vs {reference}"));
    }
    verdict(pass, parts.join(", "))
}

fn c5_asymptotic_ci() -> Verdict {
    let (reps, n, beta) = (200u64, 10_000, 0.1);
    let (spec, dist) = case_one(0.1);
    let reference = {
        let xs = dist.sample(&mut RngStream::new(SEED, 500), 1_000_000);
        risk_plugin(&EmpiricalDistribution::new(xs).unwrap(), &spec)
    };
    let (mut low, mut up, mut covered) = (0.0, 0.0, 0);
    for r in 0..reps {
        let s = SampleMatrix::from_column(dist.sample(&mut RngStream::new(SEED, 501 + r), n));
        let rep = solve_saa(&SingletonProgram::new(), &spec, &s, 1e-9).unwrap();
        let ci = asymptotic_ci(&rep, beta).unwrap();
        low += ci.low;
        up += ci.up;
        covered += usize::from(ci.contains(reference));
    }
    let (low, up) = (low / reps as f64, up / reps as f64);
    let coverage = covered as f64 / reps as f64;
    let pass = (low - 11.55).abs() <= BOUND_TOL
        && (up - 11.61).abs() <= BOUND_TOL
        && (COVERAGE_RANGE.0..=COVERAGE_RANGE.1).contains(&coverage);
    verdict(
        pass,
        format!("mean bounds [{low:.4}, {up:.4}] vs [11.55, 11.61], coverage {coverage:.3}"),
    )
}

fn c6_rsa_width() -> Verdict {
    let (spec, _) = case_one(0.1);
    let setup = constants_risk_program(&spec, &RiskProgramBounds::scalar(0.0, 30.0)).unwrap();
    let th = compute_thetas(0.1).unwrap();
    let ci = bounds(0.0, &setup.constants, &th, 100_000).unwrap();
    let width = ci.width();
    // independent root of exp(1 - t^2) + exp(-t^2 / 4) = beta / 4
    let f = |t: f64| (1.0 - t * t).exp() + (-t * t / 4.0).exp() - 0.025;
    let (mut a, mut b) = (1.0f64, 10.0f64);
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if f(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let theta2_root = 0.5 * (a + b);
    let pass = (width - 11.03).abs() <= WIDTH_TOL
        && (th.theta1 - 3.4616).abs() <= THETA_TOL
        && (th.theta2 - theta2_root).abs() <= THETA_TOL
        && (th.theta3 - 3.8413).abs() <= THETA_TOL;
    verdict(
        pass,
        format!(
            "width {width:.3} vs 11.03; thetas {:.4} / {:.4} / {:.4} (root of the defining equation {theta2_root:.4}, the rounded 3.840 is {:.1e} away)",
            th.theta1,
            th.theta2,
            th.theta3,
            (th.theta2 - 3.840).abs()
        ),
    )
}

fn type2_rows(cfg: &ExperimentConfig, n: usize, table: &str) -> Vec<(String, f64)> {
    let col = compare_column(cfg, n).unwrap();
    col.tables
        .into_iter()
        .find(|(t, _)| t == table)
        .map(|(_, rows)| rows)
        .unwrap()
}

fn c7_asymptotic_power() -> Verdict {
    let cfg = config(
        Experiment::CompareDist,
        &[("case", "I".into()), ("reps", "100".into())],
    );
    let mut worst = 0.0f64;
    for n in [100, 1000] {
        for (_, v) in type2_rows(&cfg, n, "type2_as_eq") {
            worst = worst.max(v);
        }
    }
    verdict(
        worst == 0.0,
        format!("largest type II error over 10 rows x 2 sizes: {worst}"),
    )
}

fn c8_nonasymptotic() -> Verdict {
    let cfg = config(
        Experiment::CompareDist,
        &[("case", "I".into()), ("reps", "100".into())],
    );
    let mut bad = Vec::new();
    for n in [20, 50, 100, 1000] {
        for (row, v) in type2_rows(&cfg, n, "type2_na_eq") {
            if v != 1.0 {
                bad.push(format!("{row}@{n}={v}"));
            }
        }
    }
    // the N = 5000 column of the table: only (0.9,0.1) rejects
    for (row, v) in type2_rows(&cfg, 5000, "type2_na_eq") {
        let expected = if row == "(0.9,0.1)" { 0.0 } else { 1.0 };
        if v != expected {
            bad.push(format!("{row}@5000={v}"));
        }
    }
    verdict(
        bad.is_empty(),
        if bad.is_empty() {
            "type II = 1 for every row at N < 5000; N = 5000 column matches".to_string()
        } else {
            format!("mismatches: {}", bad.join(" "))
        },
    )
}

fn c9_hard_cell() -> Verdict {
    let cfg = config(
        Experiment::CompareDist,
        &[
            ("case", "III".into()),
            ("weights", "0.7:0.3".into()),
            ("reps", "100".into()),
        ],
    );
    let v = type2_rows(&cfg, 20, "type2_as_eq")[0].1;
    verdict(
        (v - 0.83).abs() <= HARD_CELL_TOL,
        format!("type II {v} vs 0.83"),
    )
}

fn c10_normality() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for tail in [0.01, 0.5] {
        let accepted = (0..10u64)
            .filter(|s| {
                let cfg = config(
                    Experiment::Qq,
                    &[
                        ("seed", (SEED + s).to_string()),
                        ("alpha", (1.0 - tail).to_string()),
                        ("reps", "200".into()),
                    ],
                );
                let values = saa_replications(&cfg, (0.1, 0.9), 0, 20).unwrap();
                jarque_bera(&values).unwrap().p_value > JB_LEVEL
            })
            .count();
        pass &= accepted >= JB_MIN_SEEDS;
        parts.push(format!("1-a={tail}: accepted on {accepted}/10 seeds"));
    }
    verdict(pass, parts.join(", "))
}

fn c11_qp() -> Verdict {
    let cfg = config(
        Experiment::Qp,
        &[("reps", "100".into()), ("n_grid", "20".into())],
    );
    let spec = RiskSpec::mean_avar(0.9, 0.1, 0.9).unwrap();
    let i2 = &cfg.instances[1];
    let sample = instance_sample(&cfg, i2, 100_000, 0).unwrap();
    let v2 = solve_saa(
        &PortfolioProgram::new(100, 2.0, 0.0).unwrap(),
        &spec,
        &sample,
        1e-9,
    )
    .unwrap()
    .value;
    let v3 = solve_saa(
        &PortfolioProgram::new(100, 2.0, -3.0).unwrap(),
        &spec,
        &sample,
        1e-9,
    )
    .unwrap()
    .value;
    let col = qp_column(&cfg, 20).unwrap();
    let t13 = col.get("type2_eq", "I1=I3 As").unwrap();
    let t46 = col.get("type2_eq", "I4=I6 As").unwrap();
    let value_ok = (v2 + 0.6791).abs() <= QP_VALUE_TOL;
    let shift_ok = v3 == v2 - 3.0;
    verdict(
        value_ok && shift_ok && t13 == 0.0 && t46 == 0.0,
        format!(
            "I2 value {v2:.5} vs -0.6791; I3 - I2 = {}; type II v1=v3 {t13}, v4=v6 {t46}",
            v3 - v2
        ),
    )
}

fn c12_calibration() -> Verdict {
    let beta = 0.1;
    let band = |reps: f64| BINOMIAL_SE * (beta * (1.0 - beta) / reps).sqrt();

    let reps = 200u64;
    let (spec, dist) = case_one(0.1);
    let two_sample = (0..reps)
        .filter(|&r| {
            let root = RngStream::new(SEED, 1200 + r);
            let solve = |id| {
                let s = SampleMatrix::from_column(dist.sample(&mut root.child(id), 10_000));
                solve_saa(&SingletonProgram::new(), &spec, &s, 1e-9).unwrap()
            };
            as_test_two_sample(&solve(0), &solve(1), beta, TwoSampleHypothesis::Equality)
                .unwrap()
                .reject
        })
        .count() as f64
        / reps as f64;

    let gaussian = |rng: &mut RngStream, m: usize, k: usize| {
        let data = (0..m * k)
            .map(|_| normal_quantile(rng.uniform_open()).unwrap())
            .collect();
        SampleMatrix::new(m, k, data).unwrap()
    };
    let eq = ConeSpec::equality(3).unwrap();
    let hotelling = (0..reps)
        .filter(|&r| {
            let s = gaussian(&mut RngStream::new(SEED, 1400 + r), 50, 3);
            hotelling_subspace_test(&s, &eq, beta, HotellingScaling::SampleSize)
                .unwrap()
                .reject
        })
        .count() as f64
        / reps as f64;
    let ordered = ConeSpec::ordered(3).unwrap();
    let perlman = (0..reps)
        .filter(|&r| {
            let s = gaussian(&mut RngStream::new(SEED, 1600 + r), 40, 3);
            perlman_cone_test(&s, &ordered, beta).unwrap().reject
        })
        .count() as f64
        / reps as f64;
    let tol = band(reps as f64);
    let pass = (two_sample - beta).abs() <= tol
        && (hotelling - beta).abs() <= tol
        && perlman <= beta + PERLMAN_SLACK;
    verdict(
        pass,
        format!(
            "two-sample {two_sample:.3}, Hotelling {hotelling:.3} (band +-{tol:.3}), Perlman {perlman:.3} (<= {:.2})",
            beta + PERLMAN_SLACK
        ),
    )
}

type Criterion = (u32, &'static str, Option<u64>, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        (
            1,
            "AVaR closed form equals variational form",
            Some(10),
            c1_avar_equivalence,
        ),
        (2, "risk measure axioms", None, c2_axioms),
        (3, "positive-part variance oracle", Some(60), c3_oracle),
        (4, "plug-in estimates, case I", Some(60), c4_table1),
        (
            5,
            "asymptotic interval and coverage",
            None,
            c5_asymptotic_ci,
        ),
        (6, "RSA bound width and thetas", None, c6_rsa_width),
        (
            7,
            "asymptotic equality test power, case I",
            Some(120),
            c7_asymptotic_power,
        ),
        (
            8,
            "nonasymptotic test conservatism, case I",
            None,
            c8_nonasymptotic,
        ),
        (9, "case III hard cell", None, c9_hard_cell),
        (10, "normality of SAA values at N = 20", None, c10_normality),
        (11, "portfolio instances", Some(600), c11_qp),
        (12, "test calibration", None, c12_calibration),
    ];
    let filter: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = Vec::new();
    for (id, name, budget, run) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let started = Instant::now();
        let v = with_budget(run(), started, budget.map(Duration::from_secs));
        println!(
            "criterion {id:>2} {}: {name}: {} [{:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            started.elapsed().as_secs_f64()
        );
        if !v.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
