//! Experiment driver for `riskopt`: the distribution comparison (cases I to
//! III), the Bernoulli portfolio instances, QQ-plot data and the crossing
//! weight `w_crit`. Every experiment writes CSV tables carrying the seed and
//! a hash of the configuration, so any cell can be recomputed by
//! [`verify::verify_file`].

pub mod cases;
pub mod config;
pub mod error;
pub mod qp;
pub mod qq;
pub mod table;
pub mod verify;

pub use config::{Case, Experiment, ExperimentConfig, PsiSource, QpInstance, RawConfig, Scale};
pub use error::{ExpError, Result};
pub use table::ResultTable;

/// Runs the experiment described by `cfg` and returns its tables.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ResultTable>> {
    match cfg.experiment {
        Experiment::CompareDist => cases::run_compare(cfg),
        Experiment::Qp => qp::run_qp(cfg),
        Experiment::Wcrit => cases::run_wcrit(cfg),
        Experiment::Qq => qq::run_qq(cfg),
    }
}
