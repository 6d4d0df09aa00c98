//! Result tables and their CSV form.
//!
//! A file starts with `# key = value` metadata lines (experiment, table,
//! seed, config hash, the canonical config, then any extra entries),
//! followed by a header `row,<col>,...` and one record per row. Numbers are
//! written with the shortest representation that parses back to the same
//! `f64`, switching to exponent form for very small or large magnitudes.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{table_err, ExpError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub experiment: Experiment,
    pub name: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: Vec<(String, String)>,
    /// Table-specific metadata, such as test statistics.
    pub extra: Vec<(String, String)>,
    pub corner: String,
    pub columns: Vec<String>,
    pub rows: Vec<String>,
    pub cells: Vec<Vec<f64>>,
}

impl ResultTable {
    pub fn new(
        cfg: &ExperimentConfig,
        name: impl Into<String>,
        corner: impl Into<String>,
        columns: Vec<String>,
    ) -> Self {
        Self {
            experiment: cfg.experiment,
            name: name.into(),
            seed: cfg.seed,
            config_hash: cfg.hash(),
            config: cfg.canonical_lines(),
            extra: Vec::new(),
            corner: corner.into(),
            columns,
            rows: Vec::new(),
            cells: Vec::new(),
        }
    }

    pub fn push_row(&mut self, label: impl Into<String>, values: Vec<f64>) -> Result<()> {
        let label = label.into();
        if values.len() != self.columns.len() {
            return Err(table_err(format!(
                "row '{label}' has {} cells, table '{}' has {} columns",
                values.len(),
                self.name,
                self.columns.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(table_err(format!(
                "row '{label}' holds a non-finite cell {v}"
            )));
        }
        self.rows.push(label);
        self.cells.push(values);
        Ok(())
    }

    pub fn cell(&self, row: &str, col: &str) -> Option<f64> {
        let i = self.rows.iter().position(|r| r == row)?;
        let j = self.columns.iter().position(|c| c == col)?;
        Some(self.cells[i][j])
    }

    pub fn row(&self, label: &str) -> Option<&[f64]> {
        let i = self.rows.iter().position(|r| r == label)?;
        Some(&self.cells[i])
    }

    pub fn file_name(&self) -> String {
        format!("{}_{}_{}.csv", self.experiment.name(), self.name, self.seed)
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut out = Vec::new();
        let mut meta = vec![
            ("experiment".to_string(), self.experiment.name().to_string()),
            ("table".to_string(), self.name.clone()),
            ("seed".to_string(), self.seed.to_string()),
            ("config_hash".to_string(), self.config_hash.clone()),
        ];
        meta.extend(
            self.config
                .iter()
                .map(|(k, v)| (format!("config.{k}"), v.clone())),
        );
        meta.extend(self.extra.iter().cloned());
        for (k, v) in meta {
            writeln!(out, "# {k} = {v}").expect("writing to memory");
        }
        {
            let mut w = csv::Writer::from_writer(&mut out);
            let header = std::iter::once(self.corner.as_str())
                .chain(self.columns.iter().map(String::as_str));
            w.write_record(header).map_err(csv_err)?;
            for (label, row) in self.rows.iter().zip(&self.cells) {
                let record =
                    std::iter::once(label.clone()).chain(row.iter().map(|v| format_cell(*v)));
                w.write_record(record).map_err(csv_err)?;
            }
            w.flush().map_err(|e| table_err(e.to_string()))?;
        }
        String::from_utf8(out).map_err(|e| table_err(e.to_string()))
    }

    /// Writes the table into `dir` and returns the file path.
    pub fn write_to(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| ExpError::io(dir, e))?;
        let path = dir.join(self.file_name());
        std::fs::write(&path, self.to_csv_string()?).map_err(|e| ExpError::io(&path, e))?;
        Ok(path)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut meta = Vec::new();
        let mut body = String::new();
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest
                    .split_once('=')
                    .ok_or_else(|| table_err(format!("bad metadata line '{line}'")))?;
                meta.push((k.trim().to_string(), v.trim().to_string()));
            } else {
                body.push_str(line);
                body.push('\n');
            }
        }
        let take = |key: &str| {
            meta.iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| table_err(format!("missing metadata '{key}'")))
        };
        let experiment: Experiment = take("experiment")?
            .parse()
            .map_err(|_| table_err("unknown experiment in metadata"))?;
        let name = take("table")?;
        let seed = take("seed")?
            .parse()
            .map_err(|_| table_err("seed is not an integer"))?;
        let config_hash = take("config_hash")?;
        let config = meta
            .iter()
            .filter_map(|(k, v)| {
                k.strip_prefix("config.")
                    .map(|k| (k.to_string(), v.clone()))
            })
            .collect();
        let extra = meta
            .iter()
            .filter(|(k, _)| {
                !k.starts_with("config.")
                    && !["experiment", "table", "seed", "config_hash"].contains(&k.as_str())
            })
            .cloned()
            .collect();

        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(body.as_bytes());
        let header = reader.headers().map_err(csv_err)?.clone();
        let mut fields = header.iter();
        let corner = fields
            .next()
            .ok_or_else(|| table_err("empty header"))?
            .to_string();
        let columns: Vec<String> = fields.map(str::to_string).collect();
        let mut table = ResultTable {
            experiment,
            name,
            seed,
            config_hash,
            config,
            extra,
            corner,
            columns,
            rows: Vec::new(),
            cells: Vec::new(),
        };
        for record in reader.records() {
            let record = record.map_err(csv_err)?;
            let mut it = record.iter();
            let label = it.next().unwrap_or_default().to_string();
            let values = it
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| table_err(format!("bad number '{s}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            table.push_row(label, values)?;
        }
        Ok(table)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ExpError::io(path, e))?;
        Self::parse(&text)
    }
}

/// Every table's cells for one column, computed together because they
/// share samples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ColumnSet {
    pub tables: Vec<(String, Vec<(String, f64)>)>,
}

impl ColumnSet {
    pub fn push(&mut self, table: &str, row: String, value: f64) {
        match self.tables.iter_mut().find(|(t, _)| t == table) {
            Some((_, rows)) => rows.push((row, value)),
            None => self.tables.push((table.to_string(), vec![(row, value)])),
        }
    }

    pub fn get(&self, table: &str, row: &str) -> Option<f64> {
        let (_, rows) = self.tables.iter().find(|(t, _)| t == table)?;
        rows.iter().find(|(r, _)| r == row).map(|(_, v)| *v)
    }
}

/// Transposes per-column results into one table per name.
pub fn assemble(
    cfg: &ExperimentConfig,
    corner: &str,
    labels: Vec<String>,
    columns: &[ColumnSet],
) -> Result<Vec<ResultTable>> {
    let first = columns.first().ok_or_else(|| table_err("no columns"))?;
    let mut out = Vec::new();
    for (t, (name, rows)) in first.tables.iter().enumerate() {
        let mut table = ResultTable::new(cfg, name.clone(), corner, labels.clone());
        for (r, (label, _)) in rows.iter().enumerate() {
            let values = columns
                .iter()
                .map(|c| {
                    c.tables
                        .get(t)
                        .and_then(|(_, rows)| rows.get(r))
                        .map(|(_, v)| *v)
                        .ok_or_else(|| table_err("columns disagree in shape"))
                })
                .collect::<Result<Vec<_>>>()?;
            table.push_row(label.clone(), values)?;
        }
        out.push(table);
    }
    Ok(out)
}

fn csv_err(e: csv::Error) -> ExpError {
    table_err(e.to_string())
}

/// The string a cell is written as.
pub fn format_cell(v: f64) -> String {
    format!("{v:?}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RawConfig;

    fn sample_table() -> ResultTable {
        let cfg = RawConfig::new().resolve(Experiment::CompareDist).unwrap();
        let mut t = ResultTable::new(&cfg, "estimates", "row", vec!["20".into(), "50".into()]);
        t.push_row("(0.1,0.9) SAA xi1", vec![0.1 + 0.2, -1e-300])
            .unwrap();
        t.push_row("plain", vec![12.0, 1.0 / 3.0]).unwrap();
        t.extra.push(("p_value".into(), "0.5".into()));
        t
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = sample_table();
        let text = t.to_csv_string().unwrap();
        assert!(text.starts_with("# experiment = compare-dist\n"));
        assert!(text.contains("\"(0.1,0.9) SAA xi1\",0.30000000000000004,-1e-300\n"));
        let back = ResultTable::parse(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_csv_string().unwrap(), text);
        assert_eq!(back.cell("plain", "50"), Some(1.0 / 3.0));
    }

    #[test]
    fn rejects_ragged_and_nonfinite_rows() {
        let mut t = sample_table();
        assert!(t.push_row("short", vec![1.0]).is_err());
        assert!(t.push_row("nan", vec![1.0, f64::NAN]).is_err());
        assert_eq!(t.rows.len(), 2);
    }

    #[test]
    fn file_name_pattern() {
        assert_eq!(sample_table().file_name(), "compare-dist_estimates_1.csv");
    }

    #[test]
    fn parse_reports_missing_metadata() {
        assert!(ResultTable::parse("row,20\nx,1\n").is_err());
    }
}
