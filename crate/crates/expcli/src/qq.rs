//! QQ-plot data for the replication distribution of SAA estimates.

use riskopt::stats::{jarque_bera, normal_quantile, MomentSummary};

use crate::cases::{saa_replications, weight_label};
use crate::config::ExperimentConfig;
use crate::error::{config_err, Result};
use crate::qp::qp_replications;
use crate::table::ResultTable;

/// Two columns per replication: the normal quantile at `(i - 1/2)/n` under
/// the sample's own mean and standard deviation, and the `i`-th smallest
/// estimate. The Jarque-Bera statistic and p-value go into the metadata.
pub fn qq_table(cfg: &ExperimentConfig, name: &str, estimates: &[f64]) -> Result<ResultTable> {
    if estimates.len() < 8 {
        return Err(config_err(format!(
            "qq needs at least 8 estimates, got {}",
            estimates.len()
        )));
    }
    let summary = MomentSummary::from_sample(estimates)?;
    if summary.is_degenerate() {
        return Err(riskopt::Error::Degenerate("all estimates are equal".into()).into());
    }
    let jb = jarque_bera(estimates)?;
    let mut sorted = estimates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let sd = summary.std_dev();
    let mut table = ResultTable::new(
        cfg,
        name,
        "i",
        vec!["theoretical".into(), "estimate".into()],
    );
    table
        .extra
        .push(("jarque_bera".into(), jb.statistic.to_string()));
    table.extra.push(("p_value".into(), jb.p_value.to_string()));
    for (i, v) in sorted.iter().enumerate() {
        let z = normal_quantile((i as f64 + 0.5) / n)?;
        table.push_row((i + 1).to_string(), vec![summary.mean + sd * z, *v])?;
    }
    Ok(table)
}

/// One table per weight row, sample size and distribution, or per sample
/// size of the chosen portfolio instance.
pub fn run_qq(cfg: &ExperimentConfig) -> Result<Vec<ResultTable>> {
    let mut out = Vec::new();
    if let Some(name) = &cfg.qq_instance {
        let inst = cfg
            .instances
            .iter()
            .find(|i| &i.name == name)
            .ok_or_else(|| config_err(format!("unknown instance '{name}'")))?;
        for &n in &cfg.n_grid {
            let values = qp_replications(cfg, inst, n)?;
            out.push(qq_table(cfg, &format!("{name}-n{n}"), &values)?);
        }
        return Ok(out);
    }
    for &w in &cfg.weights {
        for &n in &cfg.n_grid {
            for d in 0..2 {
                let values = saa_replications(cfg, w, d, n)?;
                let name = format!("{}-{}-n{n}-xi{}", w.0, w.1, d + 1);
                let mut table = qq_table(cfg, &name, &values)?;
                table.extra.push(("weights".into(), weight_label(w)));
                out.push(table);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Experiment, RawConfig};

    fn cfg() -> ExperimentConfig {
        let mut raw = RawConfig::new();
        raw.set("reps", "40").unwrap();
        raw.set("weights", "0.1:0.9").unwrap();
        raw.resolve(Experiment::Qq).unwrap()
    }

    #[test]
    fn constant_estimates_are_rejected() {
        assert!(qq_table(&cfg(), "x", &[1.0; 20]).is_err());
        assert!(qq_table(&cfg(), "x", &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn one_row_per_replication() {
        let c = cfg();
        let tables = run_qq(&c).unwrap();
        assert_eq!(tables.len(), 2);
        assert_eq!(tables[0].name, "0.1-0.9-n20-xi1");
        assert_eq!(tables[0].rows.len(), 40);
        let est: Vec<f64> = tables[0].cells.iter().map(|r| r[1]).collect();
        assert!(est.windows(2).all(|w| w[0] <= w[1]));
        let theo: Vec<f64> = tables[0].cells.iter().map(|r| r[0]).collect();
        assert!(theo.windows(2).all(|w| w[0] < w[1]));
        assert!(tables[0].extra.iter().any(|(k, _)| k == "p_value"));
    }
}
