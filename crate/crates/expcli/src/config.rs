//! Experiment configuration: defaults, flat `key = value` files and
//! command-line overrides, resolved into one [`ExperimentConfig`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{config_err, ExpError, Result};

/// Desk runs drop sample sizes above this.
pub const DESK_MAX_N: usize = 100_000;
/// Desk runs clamp replications to this.
pub const DESK_MAX_REPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    CompareDist,
    Qp,
    Wcrit,
    Qq,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::CompareDist => "compare-dist",
            Experiment::Qp => "qp",
            Experiment::Wcrit => "wcrit",
            Experiment::Qq => "qq",
        }
    }

    fn replicated(self) -> bool {
        matches!(self, Experiment::CompareDist | Experiment::Qp)
    }
}

impl FromStr for Experiment {
    type Err = ExpError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "compare-dist" => Ok(Experiment::CompareDist),
            "qp" => Ok(Experiment::Qp),
            "wcrit" => Ok(Experiment::Wcrit),
            "qq" => Ok(Experiment::Qq),
            _ => Err(config_err(format!("unknown experiment '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scale {
    Desk,
    Paper,
}

impl FromStr for Scale {
    type Err = ExpError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Scale::Desk),
            "paper" => Ok(Scale::Paper),
            _ => Err(config_err(format!(
                "scale must be 'desk' or 'paper', got '{s}'"
            ))),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Desk => "desk",
            Scale::Paper => "paper",
        })
    }
}

/// The three pairs of truncated normals on `[0, 30]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    I,
    II,
    III,
}

impl Case {
    /// `(mean, variance)` of the two untruncated normals.
    pub fn parameters(self) -> [(f64, f64); 2] {
        match self {
            Case::I => [(10.0, 1.0), (20.0, 1.0)],
            Case::II => [(5.0, 1.0), (10.0, 25.0)],
            Case::III => [(10.0, 49.0), (14.0, 0.25)],
        }
    }

    pub fn support(self) -> (f64, f64) {
        (0.0, 30.0)
    }

    fn default_grid(self, scale: Scale) -> Vec<usize> {
        let mut grid = match self {
            Case::I => vec![
                20, 50, 100, 1000, 5000, 10_000, 20_000, 50_000, 100_000, 130_000, 150_000,
            ],
            Case::II => vec![20, 50, 100, 1000, 10_000, 20_000, 50_000, 100_000, 110_000],
            Case::III => vec![
                20, 50, 100, 200, 500, 1000, 2000, 5000, 10_000, 30_000, 50_000,
            ],
        };
        if scale == Scale::Paper && self == Case::III {
            grid.extend([100_000, 300_000, 500_000, 700_000, 1_000_000, 5_000_000]);
        }
        grid
    }
}

impl FromStr for Case {
    type Err = ExpError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "1" => Ok(Case::I),
            "II" | "2" => Ok(Case::II),
            "III" | "3" => Ok(Case::III),
            _ => Err(config_err(format!("case must be I, II or III, got '{s}'"))),
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::I => "I",
            Case::II => "II",
            Case::III => "III",
        })
    }
}

/// How the Bernoulli probabilities `psi_i` of a portfolio instance are set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsiSource {
    /// `psi_i = scale (i - 1/2) / n`.
    Grid { scale: f64 },
    /// `psi_i = scale U_i` with `U_i` uniform draws from stream `seed`.
    Uniform { seed: u64, scale: f64 },
}

impl PsiSource {
    fn scale(&self) -> f64 {
        match *self {
            PsiSource::Grid { scale } | PsiSource::Uniform { scale, .. } => scale,
        }
    }
}

impl fmt::Display for PsiSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PsiSource::Grid { scale } => write!(f, "grid*{scale}"),
            PsiSource::Uniform { seed, scale } => write!(f, "uniform{seed}*{scale}"),
        }
    }
}

impl FromStr for PsiSource {
    type Err = ExpError;
    fn from_str(s: &str) -> Result<Self> {
        let (base, scale) = match s.split_once('*') {
            Some((b, sc)) => (b, parse_num::<f64>("psi scale", sc)?),
            None => (s, 1.0),
        };
        if !(0.0..=1.0).contains(&scale) {
            return Err(config_err(format!("psi scale {scale} outside [0, 1]")));
        }
        if base == "grid" {
            return Ok(PsiSource::Grid { scale });
        }
        if let Some(seed) = base.strip_prefix("uniform") {
            let seed = if seed.is_empty() {
                0
            } else {
                parse_num("psi seed", seed)?
            };
            return Ok(PsiSource::Uniform { seed, scale });
        }
        Err(config_err(format!(
            "psi must be grid[*s] or uniform<seed>[*s], got '{s}'"
        )))
    }
}

/// One portfolio instance: weights, AVaR level, ridge weight, constant
/// `c0`, number of assets and the Bernoulli probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct QpInstance {
    pub name: String,
    pub w0: f64,
    pub w1: f64,
    /// `1 - alpha`, the tail probability.
    pub tail: f64,
    pub lambda: f64,
    pub c0: f64,
    pub n: usize,
    pub psi: PsiSource,
}

impl QpInstance {
    pub fn alpha(&self) -> f64 {
        1.0 - self.tail
    }

    /// Instances sampling the same scenario law share their scenarios.
    pub fn scenario_key(&self) -> String {
        format!("{}|{}", self.n, self.psi)
    }
}

impl fmt::Display for QpInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {} {} {} {}",
            self.name, self.w0, self.w1, self.tail, self.lambda, self.c0, self.n, self.psi
        )
    }
}

impl FromStr for QpInstance {
    type Err = ExpError;
    /// `name w0 w1 one_minus_alpha lambda c0 n psi`.
    fn from_str(s: &str) -> Result<Self> {
        let f: Vec<&str> = s.split_whitespace().collect();
        if f.len() != 8 {
            return Err(config_err(format!(
                "instance needs 8 fields (name w0 w1 1-alpha lambda c0 n psi), got '{s}'"
            )));
        }
        let inst = QpInstance {
            name: f[0].to_string(),
            w0: parse_num("w0", f[1])?,
            w1: parse_num("w1", f[2])?,
            tail: parse_num("1-alpha", f[3])?,
            lambda: parse_num("lambda", f[4])?,
            c0: parse_num("c0", f[5])?,
            n: parse_num("n", f[6])?,
            psi: f[7].parse()?,
        };
        if (inst.w0 + inst.w1 - 1.0).abs() > 1e-9 || inst.w0 < 0.0 || inst.w1 < 0.0 {
            return Err(config_err(format!(
                "instance {}: weights must be a convex pair",
                inst.name
            )));
        }
        if !(inst.tail > 0.0 && inst.tail < 1.0) {
            return Err(config_err(format!(
                "instance {}: 1-alpha must lie in (0, 1)",
                inst.name
            )));
        }
        if !(inst.lambda > 0.0) || inst.n == 0 || inst.psi.scale() < 0.0 {
            return Err(config_err(format!(
                "instance {}: lambda > 0 and n >= 1 required",
                inst.name
            )));
        }
        Ok(inst)
    }
}

/// The six portfolio instances: two asset counts, probabilities scaled by
/// 1 or 0.8, and a copy shifted by `c0 = -3`.
pub fn default_instances() -> Vec<QpInstance> {
    let mk = |name: &str, c0: f64, n: usize, scale: f64, seed: u64| QpInstance {
        name: name.to_string(),
        w0: 0.9,
        w1: 0.1,
        tail: 0.1,
        lambda: 2.0,
        c0,
        n,
        psi: if seed == 0 {
            PsiSource::Grid { scale }
        } else {
            PsiSource::Uniform { seed, scale }
        },
    };
    vec![
        mk("I1", 0.0, 100, 1.0, 0),
        mk("I2", 0.0, 100, 0.8, 0),
        mk("I3", -3.0, 100, 0.8, 0),
        mk("I4", 0.0, 500, 1.0, 0),
        mk("I5", 0.0, 500, 0.8, 0),
        mk("I6", -3.0, 500, 0.8, 0),
    ]
}

/// Parses a file of instances, one per line, `#` starting a comment.
pub fn parse_instances(text: &str) -> Result<Vec<QpInstance>> {
    let list: Vec<QpInstance> = text
        .split([';', '\n'])
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if list.is_empty() {
        return Err(config_err("no instances defined"));
    }
    Ok(list)
}

/// A fully resolved run description. Everything that influences a result
/// cell is part of [`ExperimentConfig::canonical_lines`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub case: Case,
    /// `(w0, w1)` rows of `w0 E + w1 AVaR_alpha`.
    pub weights: Vec<(f64, f64)>,
    pub alpha: f64,
    pub n_grid: Vec<usize>,
    pub reps: usize,
    pub beta: f64,
    /// Level `1 - interval_beta` of each nonasymptotic interval.
    pub interval_beta: f64,
    pub seed: u64,
    pub scale: Scale,
    pub instances: Vec<QpInstance>,
    /// `(i, j)` name pairs tested in the portfolio experiment; the
    /// dominance test takes `H0: v_i <= v_j`.
    pub pairs: Vec<(String, String)>,
    /// Portfolio instance used by `qq`; the distribution case otherwise.
    pub qq_instance: Option<String>,
    pub out: PathBuf,
    /// Messages about adjustments made while resolving.
    pub warnings: Vec<String>,
}

const KEYS: &[&str] = &[
    "case",
    "weights",
    "alpha",
    "n_grid",
    "reps",
    "beta",
    "interval_beta",
    "seed",
    "scale",
    "instances",
    "pairs",
    "qq_instance",
    "out",
];

/// Raw `key -> value` entries, later ones overriding earlier ones.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reads `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = Self::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected key = value", i + 1)))?;
            raw.set(k.trim(), v.trim())?;
        }
        Ok(raw)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ExpError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let key = key.replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(config_err(format!("unknown key '{key}'")));
        }
        self.entries.insert(key, value.into());
        Ok(())
    }

    pub fn merge(&mut self, other: &RawConfig) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
        }
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Applies defaults for `experiment` and validates every entry.
    pub fn resolve(&self, experiment: Experiment) -> Result<ExperimentConfig> {
        let scale: Scale = self
            .get("scale")
            .map(str::parse)
            .transpose()?
            .unwrap_or(Scale::Desk);
        let default_case = if experiment == Experiment::Wcrit {
            Case::III
        } else {
            Case::I
        };
        let case: Case = self
            .get("case")
            .map(str::parse)
            .transpose()?
            .unwrap_or(default_case);
        let weights = match self.get("weights") {
            Some(s) => parse_weights(s)?,
            None => (0..10)
                .map(|i| (f64::from(i) / 10.0, f64::from(10 - i) / 10.0))
                .collect(),
        };
        let alpha = match self.get("alpha") {
            Some(s) => parse_num("alpha", s)?,
            None => 0.9,
        };
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(config_err(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let beta = match self.get("beta") {
            Some(s) => parse_num("beta", s)?,
            None => 0.1,
        };
        if !(beta > 0.0 && beta < 1.0) {
            return Err(config_err(format!("beta must lie in (0, 1), got {beta}")));
        }
        let interval_beta = match self.get("interval_beta") {
            Some(s) => parse_num("interval_beta", s)?,
            None => beta,
        };
        if !(interval_beta > 0.0 && interval_beta < 1.0) {
            return Err(config_err(format!(
                "interval_beta must lie in (0, 1), got {interval_beta}"
            )));
        }
        let seed = match self.get("seed") {
            Some(s) => parse_num("seed", s)?,
            None => 1,
        };
        let instances = match self.get("instances") {
            Some(s) => parse_instances(s)?,
            None => default_instances(),
        };
        let mut names: Vec<&str> = instances.iter().map(|i| i.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(config_err("instance names must be unique"));
        }
        let pairs = match self.get("pairs") {
            Some(s) => parse_pairs(s)?,
            None if self.get("instances").is_none() => parse_pairs("I1:I2,I1:I3,I4:I5,I4:I6")?,
            None => Vec::new(),
        };
        for (a, b) in &pairs {
            for name in [a, b] {
                if !instances.iter().any(|i| &i.name == name) {
                    return Err(config_err(format!(
                        "pair refers to unknown instance '{name}'"
                    )));
                }
            }
        }
        let qq_instance = self.get("qq_instance").map(str::to_string);
        if let Some(name) = &qq_instance {
            if !instances.iter().any(|i| &i.name == name) {
                return Err(config_err(format!("unknown instance '{name}'")));
            }
        }
        let n_grid = match self.get("n_grid") {
            Some(s) => parse_grid(s)?,
            None => match experiment {
                Experiment::CompareDist => case.default_grid(scale),
                Experiment::Qp => vec![20, 50, 100, 1000, 10_000, 100_000],
                Experiment::Wcrit => vec![1_000_000],
                Experiment::Qq => vec![20],
            },
        };
        let reps = match self.get("reps") {
            Some(s) => parse_num("reps", s)?,
            None => match experiment {
                Experiment::Qq => 200,
                Experiment::Wcrit => 1,
                _ => 100,
            },
        };
        if reps == 0 {
            return Err(config_err("reps must be at least 1"));
        }
        if experiment == Experiment::Qq && reps < 8 {
            return Err(config_err("qq needs at least 8 replications"));
        }
        let out = PathBuf::from(self.get("out").unwrap_or("."));

        let mut cfg = ExperimentConfig {
            experiment,
            case,
            weights,
            alpha,
            n_grid,
            reps,
            beta,
            interval_beta,
            seed,
            scale,
            instances,
            pairs,
            qq_instance,
            out,
            warnings: Vec::new(),
        };
        if scale == Scale::Desk && experiment.replicated() {
            let dropped: Vec<usize> = cfg
                .n_grid
                .iter()
                .copied()
                .filter(|&n| n > DESK_MAX_N)
                .collect();
            if !dropped.is_empty() {
                cfg.n_grid.retain(|&n| n <= DESK_MAX_N);
                cfg.warnings.push(format!(
                    "desk scale drops sample sizes {dropped:?}; use --scale paper to keep them"
                ));
            }
            if cfg.reps > DESK_MAX_REPS {
                cfg.warnings.push(format!(
                    "desk scale caps replications at {DESK_MAX_REPS} (asked for {})",
                    cfg.reps
                ));
                cfg.reps = DESK_MAX_REPS;
            }
            if cfg.n_grid.is_empty() {
                return Err(config_err("no sample size left in the grid"));
            }
        }
        if scale == Scale::Paper && cfg.n_grid.iter().any(|&n| n > DESK_MAX_N) {
            cfg.warnings
                .push("paper scale: sample sizes above 1e5 make this run slow".into());
        }
        Ok(cfg)
    }
}

fn parse_num<T: FromStr>(what: &str, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| config_err(format!("cannot parse {what} from '{s}'")))
}

/// `w0:w1` pairs separated by commas.
pub fn parse_weights(s: &str) -> Result<Vec<(f64, f64)>> {
    let rows: Vec<(f64, f64)> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let (a, b) = p
                .split_once(':')
                .ok_or_else(|| config_err(format!("weight row '{p}' is not w0:w1")))?;
            let (w0, w1): (f64, f64) = (parse_num("w0", a)?, parse_num("w1", b)?);
            if w0 < 0.0 || w1 < 0.0 || (w0 + w1 - 1.0).abs() > 1e-9 {
                return Err(config_err(format!(
                    "weight row '{p}' must be nonnegative and sum to 1"
                )));
            }
            Ok((w0, w1))
        })
        .collect::<Result<_>>()?;
    if rows.is_empty() {
        return Err(config_err("no weight rows"));
    }
    Ok(rows)
}

/// Positive, strictly increasing sample sizes separated by commas.
pub fn parse_grid(s: &str) -> Result<Vec<usize>> {
    let grid: Vec<usize> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let v: f64 = parse_num("sample size", p)?;
            if !(v >= 1.0 && v.fract() == 0.0 && v <= 1e9) {
                return Err(config_err(format!(
                    "sample size '{p}' must be a positive integer"
                )));
            }
            Ok(v as usize)
        })
        .collect::<Result<_>>()?;
    if grid.is_empty() {
        return Err(config_err("empty sample-size grid"));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(config_err("sample-size grid must be strictly increasing"));
    }
    Ok(grid)
}

fn parse_pairs(s: &str) -> Result<Vec<(String, String)>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.split_once(':')
                .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
                .ok_or_else(|| config_err(format!("pair '{p}' is not a:b")))
        })
        .collect()
}

impl ExperimentConfig {
    /// `key = value` lines that determine every cell, in a fixed order.
    pub fn canonical_lines(&self) -> Vec<(String, String)> {
        let weights = self
            .weights
            .iter()
            .map(|(a, b)| format!("{a}:{b}"))
            .collect::<Vec<_>>()
            .join(",");
        let grid = self
            .n_grid
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",");
        let instances = self
            .instances
            .iter()
            .map(QpInstance::to_string)
            .collect::<Vec<_>>()
            .join(";");
        let pairs = self
            .pairs
            .iter()
            .map(|(a, b)| format!("{a}:{b}"))
            .collect::<Vec<_>>()
            .join(",");
        let mut lines = vec![
            ("case".to_string(), self.case.to_string()),
            ("weights".to_string(), weights),
            ("alpha".to_string(), self.alpha.to_string()),
            ("n_grid".to_string(), grid),
            ("reps".to_string(), self.reps.to_string()),
            ("beta".to_string(), self.beta.to_string()),
            ("interval_beta".to_string(), self.interval_beta.to_string()),
            ("seed".to_string(), self.seed.to_string()),
            ("scale".to_string(), self.scale.to_string()),
            ("instances".to_string(), instances),
            ("pairs".to_string(), pairs),
        ];
        if let Some(q) = &self.qq_instance {
            lines.push(("qq_instance".to_string(), q.clone()));
        }
        lines
    }

    /// SHA-256 of the experiment name and the canonical lines.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.experiment.name().as_bytes());
        for (k, v) in self.canonical_lines() {
            h.update(b"\n");
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Rebuilds a configuration from the lines written by
    /// [`ExperimentConfig::canonical_lines`]. The scale is forced to paper so
    /// that no further trimming happens.
    pub fn from_canonical(experiment: Experiment, lines: &[(String, String)]) -> Result<Self> {
        let mut raw = RawConfig::new();
        for (k, v) in lines {
            raw.set(k, v.clone())?;
        }
        let scale = raw
            .get("scale")
            .map(str::parse)
            .transpose()?
            .unwrap_or(Scale::Desk);
        raw.set("scale", "paper")?;
        let mut cfg = raw.resolve(experiment)?;
        cfg.scale = scale;
        cfg.warnings.clear();
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let cfg = RawConfig::new().resolve(Experiment::CompareDist).unwrap();
        assert_eq!(cfg.case, Case::I);
        assert_eq!(cfg.weights.len(), 10);
        assert_eq!(cfg.reps, 100);
        assert_eq!(*cfg.n_grid.last().unwrap(), 100_000);
        assert_eq!(cfg.warnings.len(), 1);
        assert_eq!(cfg.interval_beta, cfg.beta);
    }

    #[test]
    fn file_then_overrides() {
        let mut raw =
            RawConfig::parse("# comment\nseed = 9\nreps=5\n\nweights = 0.1:0.9\n").unwrap();
        let mut flags = RawConfig::new();
        flags.set("reps", "7").unwrap();
        raw.merge(&flags);
        let cfg = raw.resolve(Experiment::CompareDist).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.reps, 7);
        assert_eq!(cfg.weights, vec![(0.1, 0.9)]);
    }

    #[test]
    fn rejects_bad_entries() {
        assert!(RawConfig::parse("nonsense").is_err());
        assert!(RawConfig::parse("colour = red").is_err());
        for (k, v) in [
            ("alpha", "1.5"),
            ("reps", "0"),
            ("n_grid", "100,50"),
            ("n_grid", "0"),
            ("weights", "0.5:0.6"),
            ("case", "IV"),
            ("pairs", "I1:I9"),
        ] {
            let mut raw = RawConfig::new();
            raw.set(k, v).unwrap();
            assert!(raw.resolve(Experiment::CompareDist).is_err(), "{k} = {v}");
        }
    }

    #[test]
    fn desk_caps() {
        let mut raw = RawConfig::new();
        raw.set("reps", "1000").unwrap();
        raw.set("n_grid", "10,1000000").unwrap();
        let cfg = raw.resolve(Experiment::Qp).unwrap();
        assert_eq!(cfg.reps, 100);
        assert_eq!(cfg.n_grid, vec![10]);
        raw.set("scale", "paper").unwrap();
        let cfg = raw.resolve(Experiment::Qp).unwrap();
        assert_eq!(cfg.reps, 1000);
    }

    #[test]
    fn canonical_round_trip() {
        let mut raw = RawConfig::new();
        raw.set("case", "III").unwrap();
        raw.set("weights", "0.7:0.3,0:1").unwrap();
        raw.set(
            "instances",
            "A 0.9 0.1 0.1 2 0 10 grid*0.8; B 0.5 0.5 0.5 1 -3 5 uniform7",
        )
        .unwrap();
        raw.set("pairs", "A:B").unwrap();
        let cfg = raw.resolve(Experiment::Qp).unwrap();
        let back =
            ExperimentConfig::from_canonical(Experiment::Qp, &cfg.canonical_lines()).unwrap();
        assert_eq!(back.canonical_lines(), cfg.canonical_lines());
        assert_eq!(back.hash(), cfg.hash());
        let mut other = cfg.clone();
        other.seed += 1;
        assert_ne!(other.hash(), cfg.hash());
    }

    #[test]
    fn instances_parse() {
        let list = default_instances();
        assert_eq!(list.len(), 6);
        for inst in &list {
            let back: QpInstance = inst.to_string().parse().unwrap();
            assert_eq!(&back, inst);
        }
        assert_eq!(list[1].scenario_key(), list[2].scenario_key());
        assert_ne!(list[0].scenario_key(), list[1].scenario_key());
        assert!(parse_instances("# nothing\n").is_err());
    }
}
