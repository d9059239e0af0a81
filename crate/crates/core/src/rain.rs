//! Poisson rain on `[0,1] x [0, y_cap]` and its level sets.
//!
//! A single rain realization yields the whole increasing family
//! `Lambda_alpha = {x_i : y_i <= alpha} ∪ {0, 1}`, so every `alpha` below the
//! cap is coupled to every other.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::integrals::phi;
use crate::paths::{check_y, PathSample, TimeGrid};
use crate::rng::SimRng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RainPoint<S: Scalar> {
    pub x: S,
    pub y: S,
}

/// A realization of the rain, points sorted by height `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Rain<S: Scalar> {
    points: Vec<RainPoint<S>>,
    y_cap: S,
}

impl<S: Scalar> Rain<S> {
    /// Builds a rain from explicit points; every point must lie in
    /// `[0,1] x [0, y_cap]`.
    pub fn from_points(mut points: Vec<RainPoint<S>>, y_cap: S) -> Result<Self> {
        if !(y_cap > S::zero()) {
            return Err(invalid("y_cap must be positive"));
        }
        if points
            .iter()
            .any(|p| !(p.x >= S::zero() && p.x <= S::one() && p.y >= S::zero() && p.y <= y_cap))
        {
            return Err(invalid("rain points must lie in [0,1] x [0, y_cap]"));
        }
        points.sort_by(|a, b| a.y.partial_cmp(&b.y).expect("finite heights"));
        Ok(Self { points, y_cap })
    }

    pub fn points(&self) -> &[RainPoint<S>] {
        &self.points
    }

    pub fn y_cap(&self) -> S {
        self.y_cap
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `x,y` rows with a header line.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y")?;
        for p in &self.points {
            writeln!(w, "{},{}", p.x, p.y)?;
        }
        Ok(())
    }
}

/// `Lambda_alpha`: sorted times in `[0,1]`, always containing 0 and 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RainLevel<S: Scalar> {
    pub alpha: S,
    times: Vec<S>,
}

impl<S: Scalar> RainLevel<S> {
    /// Level set from explicit interior times; 0 and 1 are added.
    pub fn from_times(alpha: S, interior: &[S]) -> Result<Self> {
        if !(alpha >= S::zero()) {
            return Err(invalid("alpha must be nonnegative"));
        }
        if interior.iter().any(|t| !(*t >= S::zero() && *t <= S::one())) {
            return Err(invalid("level times must lie in [0, 1]"));
        }
        let mut times = Vec::with_capacity(interior.len() + 2);
        times.push(S::zero());
        times.extend_from_slice(interior);
        times.push(S::one());
        times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
        times.dedup();
        Ok(Self { alpha, times })
    }

    pub fn times(&self) -> &[S] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The level times as a grid (valid because they are distinct and sorted).
    pub fn grid(&self) -> TimeGrid<S> {
        TimeGrid::new(self.times.clone()).expect("level times form a valid grid")
    }
}

/// Homogeneous unit-intensity Poisson process on `[0,1] x [0, y_cap]`.
pub fn generate_rain<S: Scalar>(y_cap: S, rng: &mut SimRng) -> Result<Rain<S>> {
    if !(y_cap > S::zero()) || !y_cap.is_finite() {
        return Err(invalid("y_cap must be positive and finite"));
    }
    let count = rng.poisson(y_cap.as_f64())?;
    let cap = y_cap.as_f64();
    let points = (0..count)
        .map(|_| {
            let x = rng.uniform();
            let y = rng.uniform() * cap;
            RainPoint {
                x: S::lit(x),
                y: S::lit(y).min(y_cap),
            }
        })
        .collect();
    Rain::from_points(points, y_cap)
}

/// `{x_i : y_i <= alpha} ∪ {0, 1}`.
pub fn level<S: Scalar>(rain: &Rain<S>, alpha: S) -> Result<RainLevel<S>> {
    if !(alpha >= S::zero()) {
        return Err(invalid("alpha must be nonnegative"));
    }
    if alpha > rain.y_cap {
        return Err(invalid(format!("alpha {alpha} exceeds the realized cap {}", rain.y_cap)));
    }
    let k = rain.points.partition_point(|p| p.y <= alpha);
    let xs: Vec<S> = rain.points[..k].iter().map(|p| p.x).collect();
    RainLevel::from_times(alpha, &xs)
}

/// Event `N_alpha[a,b]`: every `t` in `[a,b]` is within `phi(alpha)/alpha` of a
/// level time. Exact sweep over the closed cover intervals.
pub fn check_n<S: Scalar>(levelset: &RainLevel<S>, alpha: S, interval: (S, S)) -> Result<bool> {
    let (a, b) = interval;
    if !(a <= b) || a < S::zero() || b > S::one() {
        return Err(invalid("interval must satisfy 0 <= a <= b <= 1"));
    }
    let h = phi(alpha)? / alpha;
    let mut reach: Option<S> = None;
    for &s in levelset.times() {
        let (lo, hi) = (s - h, s + h);
        if hi < a {
            continue;
        }
        match reach {
            None if lo > a => return Ok(false),
            Some(r) if lo > r => return Ok(false),
            _ => {}
        }
        let r = reach.map_or(hi, |r| r.max(hi));
        if r >= b {
            return Ok(true);
        }
        reach = Some(r);
    }
    Ok(false)
}

/// Event `R_alpha[a,b] = N_alpha[a,b] ∩ Y_alpha[a,b]`.
pub fn check_r<S: Scalar>(
    levelset: &RainLevel<S>,
    path: &PathSample<S>,
    alpha: S,
    interval: (S, S),
    n_dim: usize,
) -> Result<bool> {
    Ok(check_n(levelset, alpha, interval)? && check_y(path, alpha, interval, n_dim)?)
}

/// Uniform grid with `points` nodes merged with the level times, so a path on
/// it can be evaluated both at `Lambda_alpha` and densely.
pub fn coupled_grid<S: Scalar>(levelset: &RainLevel<S>, points: usize) -> Result<TimeGrid<S>> {
    let uniform = TimeGrid::<S>::uniform(points)?;
    TimeGrid::merged(&[uniform.times(), levelset.times()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::sample_brownian;
    use std::f64::consts::E;

    fn lvl(times: &[f64]) -> RainLevel<f64> {
        RainLevel::from_times(1.0, times).unwrap()
    }

    #[test]
    fn tiny_cap_is_usually_empty() {
        let r: Rain<f64> = generate_rain(1e-9, &mut SimRng::new(4)).unwrap();
        assert!(r.is_empty());
        assert!(generate_rain::<f64>(0.0, &mut SimRng::new(4)).is_err());
    }

    #[test]
    fn level_examples() {
        let rain = Rain::from_points(vec![RainPoint { x: 0.5, y: 1.0 }], 2.0).unwrap();
        assert_eq!(level(&rain, 0.0).unwrap().times(), &[0.0, 1.0]);
        assert_eq!(level(&rain, 1.0).unwrap().times(), &[0.0, 0.5, 1.0]);
        assert!(level(&rain, 2.5).is_err());
    }

    #[test]
    fn levels_are_nested() {
        let rain: Rain<f64> = generate_rain(50.0, &mut SimRng::new(11)).unwrap();
        let small = level(&rain, 10.0).unwrap();
        let big = level(&rain, 30.0).unwrap();
        assert!(small.times().iter().all(|t| big.times().contains(t)));
    }

    #[test]
    fn n_event_examples() {
        assert!(check_n(&lvl(&[]), E, (0.0, 1.0)).unwrap());
        assert!(!check_n(&lvl(&[]), 100.0, (0.0, 1.0)).unwrap());
        assert!(check_n(&lvl(&[0.3]), 100.0, (0.3, 0.3)).unwrap());
        assert!(check_n(&lvl(&[]), 100.0, (0.5, 0.2)).is_err());
        assert!(check_n(&lvl(&[]), 1.0, (0.0, 1.0)).is_err());
    }

    #[test]
    fn n_event_matches_pointwise_scan() {
        let alpha = 100.0;
        let h = phi(alpha).unwrap() / alpha;
        let mut rng = SimRng::new(2);
        for _ in 0..200 {
            let rain: Rain<f64> = generate_rain(alpha, &mut rng).unwrap();
            let l = level(&rain, alpha).unwrap();
            let exact = check_n(&l, alpha, (0.1, 0.9)).unwrap();
            let scan = (0..=80_000).all(|k| {
                let t = 0.1 + 0.8 * k as f64 / 80_000.0;
                l.times().iter().any(|s| (s - t).abs() <= h)
            });
            assert_eq!(exact, scan);
        }
    }

    #[test]
    fn r_event_is_a_conjunction() {
        let grid = TimeGrid::uniform(11).unwrap();
        let flat = PathSample::new(grid.clone(), vec![vec![0.0]; 11]).unwrap();
        let dense = lvl(&(1..100).map(|k| k as f64 / 100.0).collect::<Vec<_>>());
        assert!(check_r(&dense, &flat, 10.0, (0.0, 1.0), 2).unwrap());
        // N fails, Y holds
        assert!(!check_r(&lvl(&[]), &flat, 100.0, (0.0, 1.0), 2).unwrap());
        // N holds, Y fails
        let mut pts = vec![vec![0.0]; 11];
        pts[5] = vec![50.0];
        let jumpy = PathSample::new(grid, pts).unwrap();
        assert!(!check_r(&dense, &jumpy, 10.0, (0.0, 1.0), 2).unwrap());
    }

    #[test]
    fn coupled_grid_contains_level_times() {
        let l = lvl(&[0.123, 0.456]);
        let g = coupled_grid(&l, 9).unwrap();
        assert!(g.index_of(0.123).is_some() && g.index_of(0.456).is_some());
        let p = sample_brownian(2, &g, &mut SimRng::new(0)).unwrap();
        assert_eq!(p.values_at(l.times()).unwrap().len(), 4);
    }

    #[test]
    fn csv_output() {
        let rain = Rain::from_points(vec![RainPoint { x: 0.25, y: 0.5 }], 1.0).unwrap();
        let mut buf = Vec::new();
        rain.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x,y\n0.25,0.5\n");
    }
}
