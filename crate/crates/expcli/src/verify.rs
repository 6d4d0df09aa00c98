//! Recomputes one cell of a written table from its embedded configuration.

use std::path::Path;

use rand::Rng;

use crate::cases::{compare_column, wcrit_column};
use crate::config::{Experiment, ExperimentConfig};
use crate::error::{table_err, ExpError, Result};
use crate::qp::qp_column;
use crate::qq::run_qq;
use crate::table::{format_cell, ResultTable};

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub table: String,
    pub row: String,
    pub col: String,
    pub value: String,
}

/// Rebuilds the configuration from `table`'s metadata, checks its hash and
/// recomputes the cell at (`row`, `col`), picked at random when not given.
/// A different value is an [`ExpError::Mismatch`].
pub fn verify_table(
    table: &ResultTable,
    row: Option<&str>,
    col: Option<&str>,
) -> Result<VerifyReport> {
    let cfg = ExperimentConfig::from_canonical(table.experiment, &table.config)?;
    if cfg.hash() != table.config_hash {
        return Err(table_err(format!(
            "config hash {} does not match the embedded configuration ({})",
            table.config_hash,
            cfg.hash()
        )));
    }
    if cfg.seed != table.seed {
        return Err(table_err("seed line disagrees with the configuration"));
    }
    if table.rows.is_empty() || table.columns.is_empty() {
        return Err(table_err("table has no cells"));
    }
    let mut rng = rand::rng();
    let row = match row {
        Some(r) => r.to_string(),
        None => table.rows[rng.random_range(0..table.rows.len())].clone(),
    };
    let col = match col {
        Some(c) => c.to_string(),
        None => table.columns[rng.random_range(0..table.columns.len())].clone(),
    };
    let stored = table
        .cell(&row, &col)
        .ok_or_else(|| table_err(format!("no cell at ({row}, {col})")))?;
    let recomputed = recompute(&cfg, table, &row, &col)?;
    let (stored, recomputed) = (format_cell(stored), format_cell(recomputed));
    if stored != recomputed {
        return Err(ExpError::Mismatch {
            row,
            col,
            stored,
            recomputed,
        });
    }
    Ok(VerifyReport {
        table: table.name.clone(),
        row,
        col,
        value: stored,
    })
}

pub fn verify_file(path: &Path, row: Option<&str>, col: Option<&str>) -> Result<VerifyReport> {
    verify_table(&ResultTable::read(path)?, row, col)
}

fn recompute(cfg: &ExperimentConfig, table: &ResultTable, row: &str, col: &str) -> Result<f64> {
    let missing = || {
        table_err(format!(
            "recomputation has no cell ({row}, {col}) in '{}'",
            table.name
        ))
    };
    if cfg.experiment == Experiment::Qq {
        let tables = run_qq(cfg)?;
        let t = tables
            .iter()
            .find(|t| t.name == table.name)
            .ok_or_else(missing)?;
        return t.cell(row, col).ok_or_else(missing);
    }
    let n: usize = col
        .parse()
        .map_err(|_| table_err(format!("column '{col}' is not a sample size")))?;
    let column = match cfg.experiment {
        Experiment::CompareDist => compare_column(cfg, n)?,
        Experiment::Qp => qp_column(cfg, n)?,
        Experiment::Wcrit => wcrit_column(cfg, n)?,
        Experiment::Qq => unreachable!("handled above"),
    };
    column.get(&table.name, row).ok_or_else(missing)
}
