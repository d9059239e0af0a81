//! Brownian-bridge boundary-crossing corrections for grid-sampled paths.

use crate::linalg::dot;
use crate::wedge::Wedge2D;

/// Probability that a Brownian bridge over a step of length `dt`, with end
/// distances `d0, d1` from a straight boundary (positive inside), never
/// touches it: `1 - exp(-2 d0 d1 / dt)`. Zero if either end is outside.
#[inline]
pub fn no_cross(d0: f64, d1: f64, dt: f64) -> f64 {
    if d0 <= 0.0 || d1 <= 0.0 {
        0.0
    } else {
        -(-2.0 * d0 * d1 / dt).exp_m1()
    }
}

/// A planar wedge prepared for the per-step survival factor.
#[derive(Debug, Clone)]
pub(crate) struct WedgeSteps {
    tip: [f64; 2],
    normals: Vec<[f64; 2]>,
    convex: bool,
    everything: bool,
}

impl WedgeSteps {
    pub fn new(w: &Wedge2D<f64>) -> Self {
        let [m1, m2] = w.inner_normals();
        let same = (m1[0] - m2[0]).abs() < 1e-12 && (m1[1] - m2[1]).abs() < 1e-12;
        Self {
            tip: w.tip,
            normals: if same { vec![m1] } else { vec![m1, m2] },
            convex: w.is_convex(),
            everything: w.half_angle >= std::f64::consts::PI,
        }
    }

    #[inline]
    fn distances(&self, p: [f64; 2]) -> [f64; 2] {
        let q = [p[0] - self.tip[0], p[1] - self.tip[1]];
        let mut d = [f64::INFINITY; 2];
        for (k, m) in self.normals.iter().enumerate() {
            d[k] = q[0] * m[0] + q[1] * m[1];
        }
        d
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        if self.everything {
            return true;
        }
        let d = self.distances(p);
        if self.convex {
            d[0] >= 0.0 && d[1] >= 0.0
        } else {
            d[0] >= 0.0 || d[1] >= 0.0
        }
    }

    /// Survival factor of one step from `p` to `q`. Convex wedges apply the
    /// exact half-plane factor per edge (exact for a half-plane, approximate
    /// near the tip otherwise); reflex wedges use the endpoint indicator.
    #[inline]
    pub fn step(&self, p: [f64; 2], q: [f64; 2], dt: f64) -> f64 {
        if self.everything {
            return 1.0;
        }
        if !self.convex {
            return f64::from(self.contains(q));
        }
        let (a, b) = (self.distances(p), self.distances(q));
        let mut f = 1.0;
        for k in 0..self.normals.len() {
            f *= no_cross(a[k], b[k], dt);
        }
        f
    }
}

/// Half-spaces `<x, n_k> <= offset_k + slack` in `R^d`. Distances are
/// evaluated as `(offset_k - <x, n_k>) + slack` so that a tiny slack survives
/// for points lying exactly on a boundary.
#[derive(Debug, Clone)]
pub(crate) struct HalfSpaces {
    pub normals: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
    pub slack: f64,
}

impl HalfSpaces {
    #[inline]
    pub fn distance(&self, k: usize, x: &[f64]) -> f64 {
        (self.offsets[k] - dot(x, &self.normals[k])) + self.slack
    }

    #[inline]
    pub fn step(&self, x: &[f64], y: &[f64], dt: f64) -> f64 {
        let mut f = 1.0;
        for k in 0..self.normals.len() {
            f *= no_cross(self.distance(k, x), self.distance(k, y), dt);
            if f == 0.0 {
                break;
            }
        }
        f
    }

    /// Survival factor along a sampled path (`coords` flat, `dim` per point).
    pub fn path_factor(&self, coords: &[f64], dim: usize, times: &[f64]) -> f64 {
        let mut f = 1.0;
        for k in 1..times.len() {
            let (x, y) = (&coords[(k - 1) * dim..k * dim], &coords[k * dim..(k + 1) * dim]);
            f *= self.step(x, y, times[k] - times[k - 1]);
            if f == 0.0 {
                break;
            }
        }
        f
    }
}
