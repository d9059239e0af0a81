//! Replica engine, estimator configuration and confidence intervals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF, Normal};

use crate::error::{invalid, Result};
use crate::paths::DEFAULT_GRID_POINTS;
use crate::rng::SimRng;

/// Monte Carlo settings shared by every estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub replicas: usize,
    pub master_seed: u64,
    pub grid_points_per_unit_time: usize,
    pub confidence_level: f64,
    /// Thread count for the replica pool; `None` uses the global rayon pool.
    /// Has no effect on results.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            replicas: 10_000,
            master_seed: 0,
            grid_points_per_unit_time: DEFAULT_GRID_POINTS,
            confidence_level: 0.99,
            workers: None,
        }
    }
}

impl EstimatorConfig {
    pub fn new(replicas: usize, master_seed: u64) -> Self {
        Self {
            replicas,
            master_seed,
            ..Self::default()
        }
    }

    pub fn with_grid(mut self, points_per_unit_time: usize) -> Self {
        self.grid_points_per_unit_time = points_per_unit_time;
        self
    }

    pub fn with_confidence(mut self, level: f64) -> Self {
        self.confidence_level = level;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicas < 100 {
            return Err(invalid("at least 100 replicas are required"));
        }
        if self.grid_points_per_unit_time < 2 {
            return Err(invalid("grid resolution must be at least 2"));
        }
        if !(self.confidence_level > 0.0 && self.confidence_level < 1.0) {
            return Err(invalid("confidence level must lie in (0, 1)"));
        }
        if self.workers == Some(0) {
            return Err(invalid("worker count must be positive"));
        }
        Ok(())
    }

    /// Number of grid steps used on an interval of length `len`.
    pub fn steps_for(&self, len: f64) -> usize {
        ((len * self.grid_points_per_unit_time as f64).ceil() as usize).max(1)
    }
}

/// Which interval construction produced the CI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalKind {
    /// Exact binomial interval; one-sided when all outcomes agree.
    ClopperPearson,
    /// Normal approximation from the sample standard error.
    Normal,
}

/// Result of a Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimand: String,
    pub mean: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub replicas: usize,
    pub interval: IntervalKind,
    pub config: EstimatorConfig,
}

impl Estimate {
    /// Builds an estimate from per-replica values, summed in replica order.
    pub fn from_values(estimand: &str, values: &[f64], config: &EstimatorConfig) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(invalid("an estimate needs at least two replicas"));
        }
        let nf = n as f64;
        // rescale so that squares of very small values do not underflow
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = if scale > 0.0 && scale.is_finite() { scale } else { 1.0 };
        let mean_s = values.iter().map(|v| v / scale).sum::<f64>() / nf;
        let var_s = values.iter().map(|v| (v / scale - mean_s).powi(2)).sum::<f64>() / (nf - 1.0);
        let mean = mean_s * scale;
        let std_error = (var_s / nf).sqrt() * scale;
        let level = config.confidence_level;
        let binary = values.iter().all(|&v| v == 0.0 || v == 1.0);
        let (ci_low, ci_high, interval) = if binary {
            let k = values.iter().filter(|&&v| v == 1.0).count();
            let (lo, hi) = clopper_pearson(k, n, level)?;
            (lo, hi, IntervalKind::ClopperPearson)
        } else {
            let z = normal_quantile(0.5 + level / 2.0);
            (mean - z * std_error, mean + z * std_error, IntervalKind::Normal)
        };
        Ok(Self {
            estimand: estimand.to_string(),
            mean,
            std_error,
            ci_low: ci_low.min(mean),
            ci_high: ci_high.max(mean),
            replicas: n,
            interval,
            config: config.clone(),
        })
    }

    /// True if the two confidence intervals intersect.
    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }

    /// Distance from `target` in standard errors (infinite if the error is zero
    /// and the mean differs).
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error
        }
    }

    pub const CSV_HEADER: &'static str = "estimand,mean,std_error,ci_low,ci_high,replicas,seed,grid,confidence";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.estimand,
            self.mean,
            self.std_error,
            self.ci_low,
            self.ci_high,
            self.replicas,
            self.config.master_seed,
            self.config.grid_points_per_unit_time,
            self.config.confidence_level
        )
    }
}

/// An estimate next to the upper bound it is being checked against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundComparison {
    pub estimate: Estimate,
    pub bound: f64,
    /// `bound - mean`; negative when the bound is exceeded.
    pub margin: f64,
}

impl BoundComparison {
    pub fn new(estimate: Estimate, bound: f64) -> Self {
        let margin = bound - estimate.mean;
        Self { estimate, bound, margin }
    }

    /// The bound holds unless the mean exceeds it by more than `k` standard errors.
    pub fn holds_within(&self, k: f64) -> bool {
        self.estimate.mean <= self.bound + k * self.estimate.std_error
    }

    /// The whole confidence interval sits below the bound.
    pub fn decisively_below(&self) -> bool {
        self.estimate.ci_high < self.bound
    }
}

/// Clopper-Pearson interval for `k` successes in `n` trials.
///
/// With `k = 0` (or `k = n`) the interval is one-sided at the full level,
/// e.g. `[0, 1 - (1 - level)^(1/n)]`.
pub fn clopper_pearson(k: usize, n: usize, level: f64) -> Result<(f64, f64)> {
    if n == 0 || k > n || !(level > 0.0 && level < 1.0) {
        return Err(invalid("clopper_pearson needs 0 <= k <= n, n > 0, level in (0,1)"));
    }
    let nf = n as f64;
    if k == 0 {
        return Ok((0.0, 1.0 - (1.0 - level).powf(1.0 / nf)));
    }
    if k == n {
        return Ok(((1.0 - level).powf(1.0 / nf), 1.0));
    }
    let tail = (1.0 - level) / 2.0;
    let kf = k as f64;
    let lo = Beta::new(kf, nf - kf + 1.0)
        .map_err(|e| invalid(e.to_string()))?
        .inverse_cdf(tail);
    let hi = Beta::new(kf + 1.0, nf - kf)
        .map_err(|e| invalid(e.to_string()))?
        .inverse_cdf(1.0 - tail);
    Ok((lo, hi))
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

fn in_pool<T: Send>(config: &EstimatorConfig, job: impl FnOnce() -> T + Send) -> Result<T> {
    match config.workers {
        None => Ok(job()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| invalid(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Runs `config.replicas` independent replicas of `f` and returns the values in
/// replica order. Replica `i` receives `SimRng::substream(seed, tag, i)`.
pub fn run_replicas<T, F>(config: &EstimatorConfig, tag: u16, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut SimRng) -> Result<T> + Sync,
{
    config.validate()?;
    let seed = config.master_seed;
    in_pool(config, || {
        (0..config.replicas as u64)
            .into_par_iter()
            .map(|i| f(&mut SimRng::substream(seed, tag, i)))
            .collect::<Result<Vec<T>>>()
    })?
}

/// Scalar replicas reduced into an [`Estimate`].
pub fn estimate<F>(estimand: &str, config: &EstimatorConfig, tag: u16, f: F) -> Result<Estimate>
where
    F: Fn(&mut SimRng) -> Result<f64> + Sync,
{
    let values = run_replicas(config, tag, f)?;
    Estimate::from_values(estimand, &values, config)
}
