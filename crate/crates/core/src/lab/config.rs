//! Flat `key = value` experiment configuration.
//!
//! Lists are comma separated, `#` starts a comment. Every key maps to one
//! field of [`ExperimentConfig`]; see [`KEYS`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

use super::LabError;

/// `(key, description)` for every accepted key, in file order.
pub const KEYS: &[(&str, &str)] = &[
    ("T", "temperature grid"),
    ("eps", "field strength grid"),
    ("N", "half-side grid of the box Λ_N"),
    ("q", "coarse block size (decay, partition)"),
    ("q_grid", "block sizes scanned by goodbox and partition"),
    ("k", "coarse decomposition radius"),
    ("c_g", "good-box constant, sets p_aux = 1 - exp(-c_g q / 250)"),
    ("sweeps", "measurement sweeps (samples) per chain"),
    ("burn_in", "sweeps discarded before measuring"),
    ("chains", "independent plus/minus chain pairs per task"),
    ("replicas", "disorder replicas"),
    ("seed", "master seed"),
    ("estimator", "raw | rao-blackwell"),
    ("output", "output directory"),
    ("workers", "worker threads"),
    ("tc_ref", "reference critical temperature of the pure 3D model"),
];

/// Good-box constant from the default calibration run at `T = 3`,
/// `q ∈ {2, 4, 8}` (wired, 10⁴ samples).
pub const DEFAULT_C_G: f64 = 0.53;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Raw,
    RaoBlackwell,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Raw => "raw",
            Estimator::RaoBlackwell => "rao-blackwell",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    #[serde(rename = "T")]
    pub temperatures: Vec<f64>,
    pub eps: Vec<f64>,
    #[serde(rename = "N")]
    pub sizes: Vec<i64>,
    pub q: i32,
    pub q_grid: Vec<i32>,
    pub k: i32,
    pub c_g: f64,
    pub sweeps: usize,
    pub burn_in: usize,
    pub chains: usize,
    pub replicas: usize,
    pub seed: u64,
    pub estimator: Estimator,
    pub output: PathBuf,
    pub workers: usize,
    pub tc_ref: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            temperatures: vec![3.0],
            eps: vec![0.05, 0.1, 0.2],
            sizes: vec![8, 16],
            q: 4,
            q_grid: vec![2, 4, 8],
            k: 4,
            c_g: DEFAULT_C_G,
            sweeps: 10_000,
            burn_in: 1_000,
            chains: 1,
            replicas: 8,
            seed: 1,
            estimator: Estimator::RaoBlackwell,
            output: PathBuf::from("out"),
            workers: 1,
            tc_ref: 4.5115,
        }
    }
}

fn bad(key: &str, msg: impl Into<String>) -> LabError {
    LabError::Config {
        key: key.to_string(),
        msg: msg.into(),
    }
}

fn scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, LabError>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| bad(key, format!("`{}`: {e}", value.trim())))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, LabError>
where
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| scalar(key, s))
        .collect()
}

fn fmt_list<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// Splits config text into `(line, key, value)` triples.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>, LabError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad("<file>", format!("line {}: expected key = value", i + 1)))?;
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl ExperimentConfig {
    /// Reads `text` over the defaults, then validates.
    pub fn from_text(text: &str) -> Result<Self, LabError> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = BTreeMap::new();
        for (line, k, v) in parse_pairs(text)? {
            if let Some(prev) = seen.insert(k.clone(), line) {
                return Err(bad(&k, format!("set twice (lines {prev} and {line})")));
            }
            cfg.set(&k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key=value` assignment without validating.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), LabError> {
        match key {
            "T" => self.temperatures = list(key, value)?,
            "eps" => self.eps = list(key, value)?,
            "N" => self.sizes = list(key, value)?,
            "q" => self.q = scalar(key, value)?,
            "q_grid" => self.q_grid = list(key, value)?,
            "k" => self.k = scalar(key, value)?,
            "c_g" => self.c_g = scalar(key, value)?,
            "sweeps" => self.sweeps = scalar(key, value)?,
            "burn_in" => self.burn_in = scalar(key, value)?,
            "chains" => self.chains = scalar(key, value)?,
            "replicas" => self.replicas = scalar(key, value)?,
            "seed" => self.seed = scalar(key, value)?,
            "estimator" => {
                self.estimator = match value.trim() {
                    "raw" => Estimator::Raw,
                    "rao-blackwell" | "rb" => Estimator::RaoBlackwell,
                    other => return Err(bad(key, format!("`{other}`: expected raw or rao-blackwell"))),
                }
            }
            "output" => self.output = PathBuf::from(value.trim()),
            "workers" => self.workers = scalar(key, value)?,
            "tc_ref" => self.tc_ref = scalar(key, value)?,
            other => return Err(bad(other, "unknown key")),
        }
        Ok(())
    }

    /// Applies a `key=value` override string.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), LabError> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| bad(assignment, "override must look like key=value"))?;
        self.set(k.trim(), v)
    }

    /// Checks invariants shared by every command.
    pub fn validate(&self) -> Result<(), LabError> {
        let nonempty = |key: &str, empty: bool| if empty { Err(bad(key, "grid is empty")) } else { Ok(()) };
        nonempty("T", self.temperatures.is_empty())?;
        nonempty("eps", self.eps.is_empty())?;
        nonempty("N", self.sizes.is_empty())?;
        nonempty("q_grid", self.q_grid.is_empty())?;
        if let Some(t) = self.temperatures.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(bad("T", format!("temperature {t} must be positive")));
        }
        if let Some(e) = self.eps.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
            return Err(bad("eps", format!("field strength {e} must be finite and nonnegative")));
        }
        if let Some(n) = self.sizes.iter().find(|n| !(0..=600).contains(*n)) {
            return Err(bad("N", format!("half-side {n} outside 0..=600")));
        }
        if self.q < 1 {
            return Err(bad("q", "must be positive"));
        }
        if let Some(q) = self.q_grid.iter().find(|q| **q < 1) {
            return Err(bad("q_grid", format!("block size {q} must be positive")));
        }
        if self.k < 1 {
            return Err(bad("k", "must be positive"));
        }
        if !(self.c_g.is_finite() && self.c_g >= 0.0) {
            return Err(bad("c_g", "must be finite and nonnegative"));
        }
        if self.sweeps <= self.burn_in {
            return Err(bad(
                "sweeps",
                format!("sweeps ({}) must exceed burn_in ({})", self.sweeps, self.burn_in),
            ));
        }
        for (key, v) in [
            ("chains", self.chains),
            ("replicas", self.replicas),
            ("workers", self.workers),
        ] {
            if v == 0 {
                return Err(bad(key, "must be at least 1"));
            }
        }
        Ok(())
    }

    /// `q | (N + 1)` for every `N`, needed wherever the coarse grid is built.
    pub fn validate_divisibility(&self) -> Result<(), LabError> {
        match self.sizes.iter().find(|&&n| (n + 1) % self.q as i64 != 0) {
            Some(n) => Err(bad("N", format!("q = {} does not divide N + 1 = {}", self.q, n + 1))),
            None => Ok(()),
        }
    }

    /// Requires a single value in the grid `key`.
    pub fn require_single(&self, key: &str) -> Result<(), LabError> {
        let len = match key {
            "T" => self.temperatures.len(),
            "eps" => self.eps.len(),
            "N" => self.sizes.len(),
            _ => 1,
        };
        if len == 1 {
            Ok(())
        } else {
            Err(bad(key, format!("this command takes a single value, got {len}")))
        }
    }

    /// The configuration as config-file text; parses back to `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut line = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        line("T", fmt_list(&self.temperatures));
        line("eps", fmt_list(&self.eps));
        line("N", fmt_list(&self.sizes));
        line("q", self.q.to_string());
        line("q_grid", fmt_list(&self.q_grid));
        line("k", self.k.to_string());
        line("c_g", self.c_g.to_string());
        line("sweeps", self.sweeps.to_string());
        line("burn_in", self.burn_in.to_string());
        line("chains", self.chains.to_string());
        line("replicas", self.replicas.to_string());
        line("seed", self.seed.to_string());
        line("estimator", self.estimator.as_str().to_string());
        line("output", self.output.display().to_string());
        line("workers", self.workers.to_string());
        line("tc_ref", self.tc_ref.to_string());
        s
    }

    /// Key table for `--help`.
    pub fn help_text() -> String {
        let d = ExperimentConfig::default().to_text();
        let defaults: BTreeMap<&str, &str> = d.lines().filter_map(|l| l.split_once(" = ")).collect();
        let mut s = String::from("Config keys (file lines `key = value`, lists comma separated):\n");
        for (k, desc) in KEYS {
            let _ = writeln!(
                s,
                "  {k:<10} {desc} [default: {}]",
                defaults.get(k).copied().unwrap_or("")
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.set("T", "1.5, 3").unwrap();
        cfg.set("estimator", "raw").unwrap();
        assert_eq!(ExperimentConfig::from_text(&cfg.to_text()).unwrap(), cfg);
        assert_eq!(KEYS.len(), cfg.to_text().lines().count());
    }

    #[test]
    fn failing_key_is_named() {
        let key_of = |text: &str| match ExperimentConfig::from_text(text) {
            Err(LabError::Config { key, .. }) => key,
            other => panic!("{other:?}"),
        };
        assert_eq!(key_of("eps ="), "eps");
        assert_eq!(key_of("sweeps = 10\nburn_in = 10"), "sweeps");
        assert_eq!(key_of("colour = red"), "colour");
        assert_eq!(key_of("q = x"), "q");
        assert_eq!(key_of("T = 1\nT = 2"), "T");
        let mut cfg = ExperimentConfig::default();
        cfg.set("N", "7, 8").unwrap();
        cfg.set("q", "4").unwrap();
        assert!(matches!(cfg.validate_divisibility(), Err(LabError::Config { key, .. }) if key == "N"));
    }

    #[test]
    fn overrides() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_override("workers=4").unwrap();
        assert_eq!(cfg.workers, 4);
        assert!(cfg.apply_override("workers").is_err());
    }
}
