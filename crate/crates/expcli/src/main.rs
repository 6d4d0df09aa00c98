use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use riskopt_exp::config::{Experiment, RawConfig};
use riskopt_exp::{run, verify, ExpError};

/// Reproducible experiments for risk-averse stochastic programs.
///
/// Each run writes one CSV file per table, named
/// `<experiment>_<table>_<seed>.csv`, whose `#` header lines carry the seed
/// and a hash of the full configuration. Exit status: 0 on success, 2 on a
/// configuration error, 3 on a numerical failure, 1 otherwise.
#[derive(Parser)]
#[command(name = "riskopt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare the risk of the two truncated normals of a case: estimates,
    /// bounds and type II error tables.
    CompareDist {
        /// I: N(10,1) vs N(20,1); II: N(5,1) vs N(10,25); III: N(10,49) vs
        /// N(14,0.25), all truncated to [0, 30].
        #[arg(long)]
        case: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Portfolio instances: values, bounds and type II errors for pairs.
    Qp {
        /// File with one instance per line:
        /// `name w0 w1 1-alpha lambda c0 n psi`, psi being `grid[*s]` or
        /// `uniform<seed>[*s]`. Defaults to the six built-in instances I1..I6.
        #[arg(long)]
        instances: Option<PathBuf>,
        /// Pairs `a:b` to test, `H0: v_a = v_b` and `H0: v_a <= v_b`
        /// [default: I1:I2,I1:I3,I4:I5,I4:I6].
        #[arg(long)]
        pairs: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Plug-in estimate of the crossing weight w_crit [default case: III,
    /// n-grid: 1000000].
    Wcrit {
        #[arg(long)]
        case: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// QQ-plot data of the SAA estimates over replications [default reps:
    /// 200, n-grid: 20].
    Qq {
        #[arg(long)]
        case: Option<String>,
        /// Use this portfolio instance instead of the distribution case.
        #[arg(long)]
        instance: Option<String>,
        #[arg(long)]
        instances: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Recompute one cell of a written table and compare it exactly.
    Verify {
        table: PathBuf,
        /// Row label; random when omitted.
        #[arg(long)]
        row: Option<String>,
        /// Column label; random when omitted.
        #[arg(long)]
        col: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed [default: 1].
    #[arg(long)]
    seed: Option<u64>,
    /// Replications per cell [default: 100].
    #[arg(long)]
    reps: Option<usize>,
    /// Test level [default: 0.1].
    #[arg(long)]
    beta: Option<f64>,
    /// Level of each nonasymptotic interval [default: beta].
    #[arg(long)]
    interval_beta: Option<f64>,
    /// AVaR level alpha; the tail has probability 1 - alpha [default: 0.9].
    #[arg(long)]
    alpha: Option<f64>,
    /// Rows `w0:w1,...` [default: 0:1,0.1:0.9,...,0.9:0.1].
    #[arg(long)]
    weights: Option<String>,
    /// Increasing sample sizes `N1,N2,...` [default: per experiment and case].
    #[arg(long)]
    n_grid: Option<String>,
    /// Output directory [default: .].
    #[arg(long)]
    out: Option<PathBuf>,
    /// `desk` keeps N <= 1e5 and reps <= 100; `paper` lifts both caps
    /// [default: desk].
    #[arg(long)]
    scale: Option<String>,
}

impl Common {
    fn into_raw(self, mut extra: Vec<(&str, String)>) -> Result<RawConfig, ExpError> {
        let mut raw = match &self.config {
            Some(path) => RawConfig::from_file(path)?,
            None => RawConfig::new(),
        };
        let flags = [
            ("seed", self.seed.map(|v| v.to_string())),
            ("reps", self.reps.map(|v| v.to_string())),
            ("beta", self.beta.map(|v| v.to_string())),
            ("interval_beta", self.interval_beta.map(|v| v.to_string())),
            ("alpha", self.alpha.map(|v| v.to_string())),
            ("weights", self.weights),
            ("n_grid", self.n_grid),
            ("out", self.out.map(|p| p.display().to_string())),
            ("scale", self.scale),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                extra.push((k, v));
            }
        }
        for (k, v) in extra {
            raw.set(k, v)?;
        }
        Ok(raw)
    }
}

fn read_instances(path: Option<PathBuf>) -> Result<Option<String>, ExpError> {
    path.map(|p| std::fs::read_to_string(&p).map_err(|e| ExpError::io(&p, e)))
        .transpose()
}

fn execute(command: Command) -> anyhow::Result<()> {
    let (experiment, common, mut extra) = match command {
        Command::Verify { table, row, col } => {
            let report = verify::verify_file(&table, row.as_deref(), col.as_deref())?;
            println!(
                "ok: {} [{}, {}] = {}",
                report.table, report.row, report.col, report.value
            );
            return Ok(());
        }
        Command::CompareDist { case, common } => {
            (Experiment::CompareDist, common, opt("case", case))
        }
        Command::Wcrit { case, common } => (Experiment::Wcrit, common, opt("case", case)),
        Command::Qp {
            instances,
            pairs,
            common,
        } => {
            let mut extra = opt("instances", read_instances(instances)?);
            extra.extend(opt("pairs", pairs));
            (Experiment::Qp, common, extra)
        }
        Command::Qq {
            case,
            instance,
            instances,
            common,
        } => {
            let mut extra = opt("case", case);
            extra.extend(opt("qq_instance", instance));
            extra.extend(opt("instances", read_instances(instances)?));
            (Experiment::Qq, common, extra)
        }
    };
    extra.retain(|(_, v)| !v.is_empty());
    let cfg = common.into_raw(extra)?.resolve(experiment)?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    let start = Instant::now();
    let tables = run(&cfg)?;
    for t in &tables {
        let path = t.write_to(&cfg.out)?;
        println!("{}", path.display());
    }
    eprintln!(
        "{}: {} tables, config {}, {:.2}s",
        experiment.name(),
        tables.len(),
        &cfg.hash()[..12],
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn opt(key: &'static str, v: Option<String>) -> Vec<(&'static str, String)> {
    v.map(|v| (key, v)).into_iter().collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command).context("riskopt failed") {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .downcast_ref::<ExpError>()
                .map_or(1, ExpError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
