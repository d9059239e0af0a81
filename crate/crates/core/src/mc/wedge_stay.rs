//! Stay probabilities of planar Brownian motion and bridges in wedges.

use serde::{Deserialize, Serialize};

use super::crossing::WedgeSteps;
use super::engine::{run_replicas, Estimate, EstimatorConfig, BoundComparison};
use crate::error::{invalid, Result};
use crate::rng::{tag, SimRng};
use crate::wedge::Wedge2D;

/// Smallest number of grid steps used for any horizon.
pub const MIN_STEPS: usize = 16;

/// Probability that planar Brownian motion from `start` stays in `wedge` up
/// to time `horizon`, with the per-step crossing correction.
pub fn stay_prob_wedge(wedge: &Wedge2D<f64>, start: [f64; 2], horizon: f64, config: &EstimatorConfig) -> Result<Estimate> {
    if !wedge.contains(&start) {
        return Err(invalid("start point lies outside the wedge"));
    }
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(invalid("horizon must be positive and finite"));
    }
    let steps = config.steps_for(horizon).max(MIN_STEPS);
    let dt = horizon / steps as f64;
    let sd = dt.sqrt();
    let ws = WedgeSteps::new(wedge);
    let values = run_replicas(config, tag::STAY, |rng| {
        let mut p = start;
        let mut f = 1.0;
        for _ in 0..steps {
            let q = [p[0] + sd * rng.normal(), p[1] + sd * rng.normal()];
            f *= ws.step(p, q, dt);
            if f == 0.0 {
                break;
            }
            p = q;
        }
        Ok(f)
    })?;
    Estimate::from_values("stay_prob_wedge", &values, config)
}

/// Fitted power-law decay of the stay probability for one half-angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub half_angle: f64,
    /// Least-squares slope of `ln P` against `ln(r / sqrt(t))`.
    pub exponent: f64,
    /// `pi / (2 beta)`.
    pub spitzer_exponent: f64,
    /// `1 + theta / (2 pi)` with `theta = pi - 2 beta`.
    pub lower_exponent: f64,
    pub x: Vec<f64>,
    pub survival: Vec<Estimate>,
}

impl ExponentFit {
    pub fn relative_error(&self) -> f64 {
        (self.exponent - self.spitzer_exponent).abs() / self.spitzer_exponent
    }

    /// The fitted decay is at least as fast as `lower_exponent`.
    pub fn decays_at_least_lower(&self, tol: f64) -> bool {
        self.exponent >= self.lower_exponent - tol
    }
}

/// Sampling plan for [`fit_exit_exponent`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Values of `r / sqrt(t)` (start at distance `r = 1` from the tip).
    pub x: Vec<f64>,
    /// Uniform steps on `[0, 1]`.
    pub steps_unit: usize,
    /// Geometric steps per e-fold beyond `t = 1`.
    pub steps_per_efold: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        let (lo, hi, k) = (0.05f64, 0.5f64, 8);
        let x = (0..k)
            .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (k - 1) as f64).exp())
            .collect();
        Self {
            x,
            steps_unit: 64,
            steps_per_efold: 64,
        }
    }
}

/// Time grid `0 < ... < T` with uniform steps up to 1 and geometric steps
/// afterwards, containing every horizon in `marks`.
fn graded_grid(marks: &[f64], opts: &FitOptions) -> Vec<f64> {
    let t_max = marks.iter().copied().fold(1.0, f64::max);
    let mut t: Vec<f64> = (0..=opts.steps_unit).map(|k| k as f64 / opts.steps_unit as f64).collect();
    let ratio = (1.0 / opts.steps_per_efold as f64).exp();
    let mut cur = 1.0;
    while cur * ratio < t_max {
        cur *= ratio;
        t.push(cur);
    }
    t.extend_from_slice(marks);
    t.push(t_max);
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

/// Fits the exit exponent of the wedge with half-angle `beta` from one set of
/// paths started on the bisector at distance 1 from the tip, reading the
/// survival curve at `t = 1 / x^2`.
pub fn fit_exit_exponent(beta: f64, config: &EstimatorConfig) -> Result<ExponentFit> {
    fit_exit_exponent_with(beta, config, &FitOptions::default())
}

pub fn fit_exit_exponent_with(beta: f64, config: &EstimatorConfig, opts: &FitOptions) -> Result<ExponentFit> {
    if !(beta > 0.0 && beta <= std::f64::consts::FRAC_PI_2) {
        return Err(invalid("half-angle must lie in (0, pi/2]"));
    }
    if opts.x.len() < 4 {
        return Err(invalid("at least four support points are needed for the fit"));
    }
    if opts.x.iter().any(|&x| !(x > 0.0)) {
        return Err(invalid("support points must be positive"));
    }
    let wedge = Wedge2D::new([0.0, 0.0], 0.0, beta)?;
    let ws = WedgeSteps::new(&wedge);
    let horizons: Vec<f64> = opts.x.iter().map(|x| 1.0 / (x * x)).collect();
    let grid = graded_grid(&horizons, opts);
    let mark_idx: Vec<usize> = horizons
        .iter()
        .map(|h| grid.iter().position(|t| t == h).expect("horizon on grid"))
        .collect();
    let per_replica = run_replicas(config, tag::EXIT_FIT, |rng| {
        let mut curve = vec![0.0; grid.len()];
        let mut p = [1.0, 0.0];
        let mut f = 1.0;
        curve[0] = 1.0;
        for k in 1..grid.len() {
            let dt = grid[k] - grid[k - 1];
            let sd = dt.sqrt();
            let q = [p[0] + sd * rng.normal(), p[1] + sd * rng.normal()];
            f *= ws.step(p, q, dt);
            if f == 0.0 {
                break;
            }
            curve[k] = f;
            p = q;
        }
        Ok(mark_idx.iter().map(|&k| curve[k]).collect::<Vec<f64>>())
    })?;
    let survival: Vec<Estimate> = (0..opts.x.len())
        .map(|m| {
            let column: Vec<f64> = per_replica.iter().map(|v| v[m]).collect();
            Estimate::from_values(&format!("survival(x={})", opts.x[m]), &column, config)
        })
        .collect::<Result<_>>()?;
    if survival.iter().any(|e| !(e.mean > 0.0)) {
        return Err(invalid("a survival estimate is zero; increase replicas"));
    }
    let lx: Vec<f64> = opts.x.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = survival.iter().map(|e| e.mean.ln()).collect();
    let exponent = slope(&lx, &ly);
    let theta = std::f64::consts::PI - 2.0 * beta;
    Ok(ExponentFit {
        half_angle: beta,
        exponent,
        spitzer_exponent: std::f64::consts::PI / (2.0 * beta),
        lower_exponent: 1.0 + theta / (2.0 * std::f64::consts::PI),
        x: opts.x.clone(),
        survival,
    })
}

/// Ordinary least-squares slope.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Probability that a planar Brownian bridge from `a` (time 0) to `b`
/// (time 1) stays in `wedge`, with the per-step crossing correction.
pub fn bridge_stay_prob(wedge: &Wedge2D<f64>, a: [f64; 2], b: [f64; 2], config: &EstimatorConfig) -> Result<Estimate> {
    if !wedge.contains(&a) || !wedge.contains(&b) {
        return Err(invalid("bridge endpoints must lie in the wedge"));
    }
    let steps = config.steps_for(1.0).max(MIN_STEPS);
    let ws = WedgeSteps::new(wedge);
    let values = run_replicas(config, tag::BRIDGE_STAY, |rng| Ok(bridge_factor(&ws, a, b, 0.0, 1.0, steps, rng)))?;
    Estimate::from_values("bridge_stay_prob", &values, config)
}

pub(crate) fn bridge_factor(ws: &WedgeSteps, a: [f64; 2], b: [f64; 2], s1: f64, s2: f64, steps: usize, rng: &mut SimRng) -> f64 {
    let dt = (s2 - s1) / steps as f64;
    let mut p = a;
    let mut f = 1.0;
    for k in 1..=steps {
        let u = s1 + (k - 1) as f64 * dt;
        let q = if k == steps {
            b
        } else {
            let t = s1 + k as f64 * dt;
            let w = (t - u) / (s2 - u);
            let sd = ((t - u) * (s2 - t) / (s2 - u)).sqrt();
            [p[0] + w * (b[0] - p[0]) + sd * rng.normal(), p[1] + w * (b[1] - p[1]) + sd * rng.normal()]
        };
        f *= ws.step(p, q, dt);
        if f == 0.0 {
            return 0.0;
        }
        p = q;
    }
    f
}

/// `alpha^eps max(1/alpha, r)^(1 + theta/20)`.
pub fn lemma6_bound(alpha: f64, eps: f64, theta: f64, r: f64) -> f64 {
    alpha.powf(eps) * alpha.recip().max(r).powf(1.0 + theta / 20.0)
}

/// [`bridge_stay_prob`] next to [`lemma6_bound`] with `r = |a - tip|`.
pub fn bridge_stay_vs_bound(
    wedge: &Wedge2D<f64>,
    a: [f64; 2],
    b: [f64; 2],
    alpha: f64,
    eps: f64,
    theta: f64,
    config: &EstimatorConfig,
) -> Result<BoundComparison> {
    let est = bridge_stay_prob(wedge, a, b, config)?;
    let r = ((a[0] - wedge.tip[0]).powi(2) + (a[1] - wedge.tip[1]).powi(2)).sqrt();
    Ok(BoundComparison::new(est, lemma6_bound(alpha, eps, theta, r)))
}
