//! Experiment settings from a `key = value` file and command-line overrides.

use std::collections::BTreeMap;
use std::path::PathBuf;

use lle_spectra::frobenius::BoundaryKind;
use lle_spectra::krylov::DEFAULT_SEED;
use lle_spectra::lle::SolverMode;
use lle_spectra::sampling::{grid_disc, grid_interval, supercriticality, PointCloud};
use lle_spectra::Domain;

use crate::{HarnessError, Result, Stage};

pub const MIN_SUPERCRITICALITY: f64 = 50.0;
pub const EPS_MAX: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub domain: Domain,
    pub eps: f64,
    /// `n` on the interval, lattice side `m` on the disc. Empty means the default.
    pub sizes: Vec<usize>,
    pub k: Option<usize>,
    pub mode: Option<SolverMode>,
    pub kind: BoundaryKind,
    pub nu_max: Option<u32>,
    pub lambda_max: Option<f64>,
    pub out: PathBuf,
    pub seed: u64,
    pub allow_subcritical: bool,
    pub regularizer: Option<f64>,
    /// Write `eigvec_<j>.csv` for the largest size.
    pub vectors: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            domain: Domain::Interval,
            eps: 0.05,
            sizes: Vec::new(),
            k: None,
            mode: None,
            kind: BoundaryKind::Neumann,
            nu_max: None,
            lambda_max: None,
            out: PathBuf::from("out"),
            seed: DEFAULT_SEED,
            allow_subcritical: false,
            regularizer: None,
            vectors: false,
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("line {}: expected `key = value`", no + 1)))?;
        let key = key.trim().replace('-', "_");
        if key.is_empty() {
            return Err(HarnessError::Config(format!("line {}: empty key", no + 1)));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| HarnessError::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(HarnessError::Config(format!("`{key}`: expected a boolean, got `{value}`"))),
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

impl ExperimentConfig {
    /// Sets one key. `n` and `m` both set the size list; [`validate`](Self::validate)
    /// checks that the name fits the domain.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "domain" => self.domain = value.parse().stage("config")?,
            "epsilon" | "eps" => self.eps = parse(key, value)?,
            "n" | "m" => self.sizes = parse_list(key, value)?,
            "k" => self.k = Some(parse(key, value)?),
            "mode" => self.mode = Some(value.parse().stage("config")?),
            "kind" => self.kind = value.parse().stage("config")?,
            "nu_max" => self.nu_max = Some(parse(key, value)?),
            "lambda_max" => self.lambda_max = Some(parse(key, value)?),
            "out" => self.out = PathBuf::from(value),
            "seed" => self.seed = parse(key, value)?,
            "allow_subcritical" => self.allow_subcritical = parse_bool(key, value)?,
            "regularizer" => self.regularizer = Some(parse(key, value)?),
            "vectors" => self.vectors = parse_bool(key, value)?,
            _ => return Err(HarnessError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        // the domain decides how sizes are read, so it goes first
        if let Some(d) = map.get("domain") {
            cfg.apply("domain", d)?;
        }
        for (k, v) in map {
            cfg.apply(k, v)?;
        }
        Ok(cfg)
    }

    pub fn sizes(&self) -> Vec<usize> {
        if !self.sizes.is_empty() {
            return self.sizes.clone();
        }
        match self.domain {
            Domain::Interval => vec![2000],
            Domain::Disc => vec![161],
        }
    }

    pub fn k(&self) -> usize {
        self.k.unwrap_or(match self.domain {
            Domain::Interval => 8,
            Domain::Disc => 12,
        })
    }

    pub fn size_name(&self) -> &'static str {
        match self.domain {
            Domain::Interval => "n",
            Domain::Disc => "m",
        }
    }

    pub fn cloud(&self, size: usize) -> Result<PointCloud> {
        match self.domain {
            Domain::Interval => grid_interval(size),
            Domain::Disc => grid_disc(size),
        }
        .stage("sampling")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps <= EPS_MAX) {
            return Err(HarnessError::Config(format!("epsilon {} outside (0, {EPS_MAX}]", self.eps)));
        }
        if self.k() == 0 {
            return Err(HarnessError::Config("k must be positive".into()));
        }
        if let Some(c) = self.regularizer {
            if !(c > 0.0) {
                return Err(HarnessError::Config(format!("regularizer {c} must be positive")));
            }
        }
        if !self.allow_subcritical {
            for size in self.sizes() {
                let n = self.cloud(size)?.len();
                let s = supercriticality(n, self.eps, self.domain.dim());
                if s < MIN_SUPERCRITICALITY {
                    return Err(HarnessError::Config(format!(
                        "{} = {size} gives n eps^{} = {s:.2} < {MIN_SUPERCRITICALITY}; pass --allow-subcritical to run anyway",
                        self.size_name(),
                        self.domain.dim()
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blanks() {
        let m = parse_config("# experiment\n\ndomain = disc  # trailing\nm = 115, 161\nnu-max=12\n").unwrap();
        assert_eq!(m["domain"], "disc");
        assert_eq!(m["m"], "115, 161");
        assert_eq!(m["nu_max"], "12");
        let cfg = ExperimentConfig::from_map(&m).unwrap();
        assert_eq!(cfg.domain, Domain::Disc);
        assert_eq!(cfg.sizes, vec![115, 161]);
        assert_eq!(cfg.k(), 12);
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(parse_config("epsilon 0.05").is_err());
        assert!(parse_config(" = 3").is_err());
        let m = parse_config("colour = blue").unwrap();
        assert!(ExperimentConfig::from_map(&m).is_err());
    }

    #[test]
    fn subcritical_needs_override() {
        let mut cfg = ExperimentConfig { domain: Domain::Disc, sizes: vec![115], ..Default::default() };
        assert!(cfg.validate().is_err());
        cfg.allow_subcritical = true;
        assert!(cfg.validate().is_ok());
        cfg.eps = 0.2;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn defaults_by_domain() {
        let cfg = ExperimentConfig::default();
        assert_eq!((cfg.sizes(), cfg.k()), (vec![2000], 8));
        assert!(cfg.validate().is_ok());
    }
}
