//! Run configuration: defaults, flat `key=value` files and flag overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bmhull::mc::EstimatorConfig;
use serde::{Deserialize, Serialize};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "BMHULL_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    Csv,
    Json,
}

impl OutFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutFormat::Csv => "csv",
            OutFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    /// One or more levels; commands that need a single level use the first.
    pub alpha: Vec<f64>,
    pub kappa: f64,
    pub dim: usize,
    pub n: usize,
    /// Lower cutoff of the `Z_a` region for the integral comparisons.
    pub a: f64,
    /// Overrides each check's own replica or instance count.
    pub replicas: Option<usize>,
    pub grid: usize,
    pub confidence: f64,
    pub format: OutFormat,
    pub out: Option<PathBuf>,
    /// Thread count; never changes results, so it is not echoed.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            alpha: vec![10.0],
            kappa: 1.0,
            dim: 2,
            n: 2,
            a: (-1.0f64).exp(),
            replicas: None,
            grid: bmhull::paths::DEFAULT_GRID_POINTS,
            confidence: 0.99,
            format: OutFormat::Json,
            out: None,
            workers: None,
        }
    }
}

/// Keys accepted in config files and by `sweep`.
pub const KEYS: &[&str] = &[
    "seed", "alpha", "kappa", "dim", "n", "a", "replicas", "grid", "confidence", "format", "out", "workers",
];

fn parse_list(value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().with_context(|| format!("bad number {s:?}")))
        .collect()
}

impl RunConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha[0]
    }

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let num = || v.parse::<f64>().with_context(|| format!("{key}: bad number {v:?}"));
        let int = || v.parse::<usize>().with_context(|| format!("{key}: bad integer {v:?}"));
        match key {
            "seed" => self.seed = v.parse().with_context(|| format!("seed: bad integer {v:?}"))?,
            "alpha" => self.alpha = parse_list(v)?,
            "kappa" => self.kappa = num()?,
            "dim" => self.dim = int()?,
            "n" => self.n = int()?,
            "a" => self.a = num()?,
            "replicas" => self.replicas = Some(int()?),
            "grid" => self.grid = int()?,
            "confidence" => self.confidence = num()?,
            "format" => {
                self.format = match v {
                    "csv" => OutFormat::Csv,
                    "json" => OutFormat::Json,
                    _ => bail!("format must be csv or json, got {v:?}"),
                }
            }
            "out" => self.out = Some(PathBuf::from(v)),
            "workers" => self.workers = Some(int()?),
            _ => bail!("unknown configuration key {key:?}"),
        }
        Ok(())
    }

    /// Applies a flat `key=value` file; blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .with_context(|| format!("{}:{}: expected key=value", path.display(), no + 1))?;
            self.set(k.trim(), v).with_context(|| format!("{}:{}", path.display(), no + 1))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_empty() || self.alpha.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            bail!("alpha must be a nonempty list of finite nonnegative levels");
        }
        if !(self.kappa > 0.0 && self.kappa < std::f64::consts::PI) {
            bail!("kappa must lie in (0, pi)");
        }
        if self.dim < 1 || self.n < 1 {
            bail!("dim and n must be positive");
        }
        if !(self.a > 0.0 && self.a < 1.0) {
            bail!("a must lie in (0, 1)");
        }
        if self.grid < 2 {
            bail!("grid must be at least 2");
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            bail!("confidence must lie in (0, 1)");
        }
        if self.replicas == Some(0) || self.workers == Some(0) {
            bail!("replicas and workers must be positive");
        }
        Ok(())
    }

    /// Estimator settings with `default_replicas` unless overridden.
    pub fn estimator(&self, default_replicas: usize) -> EstimatorConfig {
        let mut c = EstimatorConfig::new(self.replicas.unwrap_or(default_replicas), self.seed)
            .with_grid(self.grid)
            .with_confidence(self.confidence);
        c.workers = self.workers;
        c
    }

    pub fn count(&self, default: usize) -> usize {
        self.replicas.unwrap_or(default)
    }

    /// Output directory: `--out`, then the environment, then `bmhull-out`.
    pub fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("bmhull-out"))
    }

    /// Output file for single-table commands: `--out` as a file, a file named
    /// `stem` in the environment directory, or `None` for stdout.
    pub fn out_file(&self, stem: &str) -> Option<PathBuf> {
        if let Some(p) = &self.out {
            return Some(p.clone());
        }
        std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(format!("{stem}.{}", self.format.extension())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_and_validate() {
        let mut c = RunConfig::default();
        c.set("alpha", "5, 10").unwrap();
        c.set("format", "csv").unwrap();
        c.set("replicas", "200").unwrap();
        assert_eq!(c.alpha, vec![5.0, 10.0]);
        assert_eq!(c.format, OutFormat::Csv);
        c.validate().unwrap();
        assert!(c.set("bogus", "1").is_err());
        assert!(c.set("dim", "two").is_err());
        c.set("kappa", "4").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn file_then_override() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.conf");
        std::fs::write(&p, "# comment\nseed = 9\nkappa=0.5\n\ngrid=256\n").unwrap();
        let mut c = RunConfig::default();
        c.apply_file(&p).unwrap();
        assert_eq!((c.seed, c.kappa, c.grid), (9, 0.5, 256));
        c.set("seed", "3").unwrap();
        assert_eq!(c.seed, 3);
        std::fs::write(&p, "seed 9\n").unwrap();
        assert!(RunConfig::default().apply_file(&p).is_err());
    }

    #[test]
    fn workers_are_not_echoed() {
        let mut c = RunConfig::default();
        c.workers = Some(4);
        let s = serde_json::to_string(&c).unwrap();
        assert!(!s.contains("workers"));
    }
}
