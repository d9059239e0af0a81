//! Conditional probabilities of the events `H_i ∩ R_alpha[t_i, t_{i+1}]`
//! given the pinned skeleton `S`, checked against the four conditional bounds.

use serde::{Deserialize, Serialize};

use super::crossing::no_cross;
use super::engine::{run_replicas, BoundComparison, Estimate, EstimatorConfig};
use super::wedge_stay::MIN_STEPS;
use crate::error::{invalid, Error, Result};
use crate::integrals::enlargement;
use crate::linalg::{dist, dot, norm, normalized, scale, sub};
use crate::paths::{bridge_coords, check_y, PathSample, TimeGrid};
use crate::rain::{check_n, RainLevel};
use crate::rng::{tag, SimRng};
use crate::wedge::{angle, WedgePair, EPS_ANGLE};

/// Rain is simulated only while the expected number of points on the interval
/// stays below this; beyond it `N_alpha` is left out of the event.
pub const RAIN_MEAN_CAP: f64 = 1e5;

/// Which of the four conditional bounds applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HCase {
    Interior,
    Edge,
    InteriorSpecial,
    EdgeSpecial,
}

impl HCase {
    pub const ALL: [HCase; 4] = [HCase::Interior, HCase::Edge, HCase::InteriorSpecial, HCase::EdgeSpecial];

    pub fn is_edge(self) -> bool {
        matches!(self, HCase::Edge | HCase::EdgeSpecial)
    }

    pub fn is_special(self) -> bool {
        matches!(self, HCase::InteriorSpecial | HCase::EdgeSpecial)
    }
}

impl std::str::FromStr for HCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interior" => Ok(HCase::Interior),
            "edge" => Ok(HCase::Edge),
            "interior-special" => Ok(HCase::InteriorSpecial),
            "edge-special" => Ok(HCase::EdgeSpecial),
            _ => Err(invalid(format!("unknown case {s:?}"))),
        }
    }
}

/// Two half-spaces `<x, n_r> <= o_r`, `<x, n_s> <= o_s` in `R^n`, one interval
/// `[s1, s2] = [t_i, t_{i+1}]` of the skeleton and its pinned endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HGeometry {
    pub n_r: Vec<f64>,
    pub n_s: Vec<f64>,
    pub offset_r: f64,
    pub offset_s: f64,
    pub theta: f64,
    /// Orthonormal basis of `span{n_r, n_s}` with first vector `n_r`.
    pub plane_basis: [Vec<f64>; 2],
    /// Tip of the projected wedge; `None` when the normals are parallel.
    pub projected_tip: Option<[f64; 2]>,
    pub n: usize,
    pub index: usize,
    pub s1: f64,
    pub s2: f64,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
}

/// Boundary of the projected wedge on which an endpoint is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WedgeEdge {
    R,
    S,
}

/// Point at distance `rho` from the tip along one edge of the wedge with
/// outward normals `(1, 0)` and `(cos theta, sin theta)` and tip at the origin.
pub fn edge_point(theta: f64, edge: WedgeEdge, rho: f64) -> [f64; 2] {
    match edge {
        WedgeEdge::R => [0.0, -rho],
        WedgeEdge::S => [-rho * theta.sin(), rho * theta.cos()],
    }
}

impl HGeometry {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n_r: Vec<f64>,
        n_s: Vec<f64>,
        offset_r: f64,
        offset_s: f64,
        n: usize,
        index: usize,
        interval: (f64, f64),
        b1: Vec<f64>,
        b2: Vec<f64>,
    ) -> Result<Self> {
        let d = n_r.len();
        if d != n || n_s.len() != d || b1.len() != d || b2.len() != d || n < 2 {
            return Err(invalid("normals and endpoints must live in R^n with n >= 2"));
        }
        let n_r = normalized(&n_r).ok_or_else(|| invalid("n_r must be nonzero"))?;
        let n_s = normalized(&n_s).ok_or_else(|| invalid("n_s must be nonzero"))?;
        let (s1, s2) = interval;
        if !(0.0 <= s1 && s1 < s2 && s2 <= 1.0) {
            return Err(invalid("interval must satisfy 0 <= s1 < s2 <= 1"));
        }
        if index > 2 * n {
            return Err(invalid("interval index must be at most 2n"));
        }
        if index == 0 && (s1 != 0.0 || norm(&b1) != 0.0) {
            return Err(invalid("interval 0 starts at time 0 at the origin"));
        }
        if index == 2 * n && s2 != 1.0 {
            return Err(invalid("interval 2n ends at time 1"));
        }
        let theta = angle(&n_r, &n_s)?;
        let c = theta.cos();
        let parallel = !(theta.sin() > EPS_ANGLE);
        let e2 = if parallel {
            // any unit vector orthogonal to n_r
            let k = (0..d).min_by(|&i, &j| n_r[i].abs().total_cmp(&n_r[j].abs())).expect("d >= 2");
            let mut e = vec![0.0; d];
            e[k] = 1.0;
            normalized(&sub(&e, &scale(&n_r, n_r[k]))).expect("independent")
        } else {
            normalized(&sub(&n_s, &scale(&n_r, c))).expect("not parallel")
        };
        let projected_tip = (!parallel).then(|| {
            let den = 1.0 - c * c;
            let a = (offset_r - c * offset_s) / den;
            let b = (offset_s - c * offset_r) / den;
            let tip: Vec<f64> = (0..d).map(|k| a * n_r[k] + b * n_s[k]).collect();
            [dot(&tip, &n_r), dot(&tip, &e2)]
        });
        Ok(Self {
            plane_basis: [n_r.clone(), e2],
            n_r,
            n_s,
            offset_r,
            offset_s,
            theta,
            projected_tip,
            n,
            index,
            s1,
            s2,
            b1,
            b2,
        })
    }

    /// Geometry of a facet pair with the skeleton interval and endpoints.
    pub fn from_pair(pair: &WedgePair<f64>, n: usize, index: usize, interval: (f64, f64), b1: Vec<f64>, b2: Vec<f64>) -> Result<Self> {
        let o_r = dot(&pair.ridge_point, &pair.n_r);
        let o_s = dot(&pair.ridge_point, &pair.n_s);
        Self::new(pair.n_r.clone(), pair.n_s.clone(), o_r, o_s, n, index, interval, b1, b2)
    }

    /// Canonical geometry: `n_r = e_1`, `n_s = cos theta e_1 + sin theta e_2`,
    /// tip at the origin, endpoints given in the plane of the first two axes.
    pub fn planted(n: usize, theta: f64, index: usize, interval: (f64, f64), d1: [f64; 2], d2: [f64; 2]) -> Result<Self> {
        if n < 2 {
            return Err(invalid("n must be at least 2"));
        }
        if !(0.0..std::f64::consts::PI).contains(&theta) {
            return Err(invalid("theta must lie in [0, pi)"));
        }
        let lift = |p: [f64; 2]| {
            let mut v = vec![0.0; n];
            v[0] = p[0];
            v[1] = p[1];
            v
        };
        let mut n_r = vec![0.0; n];
        n_r[0] = 1.0;
        let mut n_s = vec![0.0; n];
        n_s[0] = theta.cos();
        n_s[1] = theta.sin();
        Self::new(n_r, n_s, 0.0, 0.0, n, index, interval, lift(d1), lift(d2))
    }

    pub fn gap(&self) -> f64 {
        self.s2 - self.s1
    }

    fn parallel(&self) -> bool {
        self.projected_tip.is_none()
    }

    fn project(&self, x: &[f64]) -> [f64; 2] {
        [dot(x, &self.plane_basis[0]), dot(x, &self.plane_basis[1])]
    }

    /// `o - <x, n>` for both constraints.
    fn raw_distances(&self, x: &[f64]) -> [f64; 2] {
        [self.offset_r - dot(x, &self.n_r), self.offset_s - dot(x, &self.n_s)]
    }

    fn boundary_tol(&self, x: &[f64]) -> f64 {
        1e-12 * (1.0 + norm(x) + self.offset_r.abs() + self.offset_s.abs())
    }

    /// Raw distances of a pinned endpoint with round-off on the boundary
    /// snapped to zero.
    fn endpoint_distances(&self, x: &[f64]) -> [f64; 2] {
        let tol = self.boundary_tol(x);
        self.raw_distances(x).map(|g| if g.abs() <= tol { 0.0 } else { g })
    }

    fn on_boundary(&self, x: &[f64]) -> bool {
        let g = self.endpoint_distances(x);
        g[0] >= 0.0 && g[1] >= 0.0 && (g[0] == 0.0 || g[1] == 0.0)
    }

    /// Checks the case against the interval index, the boundary placement of
    /// the endpoints and, for the special cases, the gap condition.
    pub fn check_preconditions(&self, case: HCase, alpha: f64) -> Result<()> {
        let two_n = 2 * self.n;
        let edge_index = self.index == 0 || self.index == two_n;
        if case.is_edge() != edge_index {
            return Err(Error::Hypothesis {
                hypothesis: "case matches interval index",
                detail: format!("case {case:?} with index {} and 2n = {two_n}", self.index),
            });
        }
        if self.index >= 1 && !self.on_boundary(&self.b1) {
            return Err(Error::Hypothesis {
                hypothesis: "dist(d_1, H_1) = phi^2/sqrt(alpha)",
                detail: format!("left endpoint distances {:?}", self.raw_distances(&self.b1)),
            });
        }
        if self.index < two_n && !self.on_boundary(&self.b2) {
            return Err(Error::Hypothesis {
                hypothesis: "dist(d_2, H_2) = phi^2/sqrt(alpha)",
                detail: format!("right endpoint distances {:?}", self.raw_distances(&self.b2)),
            });
        }
        if case.is_special() {
            if let Some(tip) = self.projected_tip {
                let r = dist(&self.project(&self.b1), &tip).min(dist(&self.project(&self.b2), &tip));
                let need = alpha.powf(1.0 / (10.0 * self.n as f64)) * (r * r).max(1.0 / alpha);
                if self.gap() < need {
                    return Err(Error::Hypothesis {
                        hypothesis: "s_2 - s_1 >= alpha^(1/(10n)) max(|d - w_0|^2, 1/alpha)",
                        detail: format!("gap {} < {need}", self.gap()),
                    });
                }
            }
        }
        Ok(())
    }
}

/// The conditional bound for `case`:
/// interior `alpha^eps / (gap alpha)`, edge `alpha^eps / sqrt(gap alpha)`,
/// special cases with the extra factor `alpha^(-theta/(800 n))`.
pub fn prop6_rhs(case: HCase, gap: f64, alpha: f64, theta: f64, eps: f64, n: usize) -> f64 {
    let la = alpha.ln();
    let base = if case.is_edge() { -0.5 * (gap.ln() + la) } else { -(gap.ln() + la) };
    let special = if case.is_special() { -theta / (800.0 * n as f64) * la } else { 0.0 };
    (eps * la + base + special).exp()
}

/// Result of [`conditional_h_prob`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalH {
    pub case: HCase,
    pub theta: f64,
    pub comparison: BoundComparison,
    /// Whether `N_alpha` was part of the simulated event.
    pub rain_included: bool,
}

/// Survival factor of a bridge on `[s1, s2]` between the pinned endpoints
/// for both enlarged half-spaces.
pub(crate) fn h_bridge(geom: &HGeometry, enl: f64, steps: usize, rng: &mut SimRng) -> (f64, Vec<f64>) {
    let times: Vec<f64> = (0..=steps)
        .map(|k| if k == steps { geom.s2 } else { geom.s1 + geom.gap() * k as f64 / steps as f64 })
        .collect();
    let coords = bridge_coords(&geom.b1, &geom.b2, &times, rng);
    let d = geom.n;
    let constraints = if geom.parallel() { 1 } else { 2 };
    let dist_at = |k: usize| {
        let x = &coords[k * d..(k + 1) * d];
        let g = if k == 0 || k == steps { geom.endpoint_distances(x) } else { geom.raw_distances(x) };
        [g[0] + enl, g[1] + enl]
    };
    let mut f = 1.0;
    let mut prev = dist_at(0);
    for k in 1..=steps {
        let cur = dist_at(k);
        let dt = times[k] - times[k - 1];
        for c in 0..constraints {
            f *= no_cross(prev[c], cur[c], dt);
        }
        if f == 0.0 {
            break;
        }
        prev = cur;
    }
    (f, coords)
}

/// Estimates `P(H_i ∩ R_alpha[s1, s2] | S)` by bridges between the pinned
/// endpoints, with the crossing correction for `H_i`, and compares it with
/// [`prop6_rhs`]. `N_alpha` is included while `alpha (s2 - s1)` is at most
/// [`RAIN_MEAN_CAP`], using rain on `[s1, s2]` with both ends added as level
/// times, which can only enlarge the event.
pub fn conditional_h_prob(case: HCase, geom: &HGeometry, alpha: f64, eps: f64, config: &EstimatorConfig) -> Result<ConditionalH> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(invalid("alpha must be finite and > 1"));
    }
    if !(eps > 0.0) {
        return Err(invalid("eps must be positive"));
    }
    geom.check_preconditions(case, alpha)?;
    let enl = enlargement(alpha)?;
    let gap = geom.gap();
    let steps = config.steps_for(gap).max(MIN_STEPS);
    let rain_included = alpha * gap <= RAIN_MEAN_CAP;
    let grid = TimeGrid::unchecked_range(
        (0..=steps)
            .map(|k| if k == steps { geom.s2 } else { geom.s1 + gap * k as f64 / steps as f64 })
            .collect(),
    )?;
    let values = run_replicas(config, tag::CONDITIONAL_H, |rng| {
        let (f, coords) = h_bridge(geom, enl, steps, rng);
        if f == 0.0 {
            return Ok(0.0);
        }
        let path = PathSample::from_flat(grid.clone(), geom.n, coords);
        if !check_y(&path, alpha, (geom.s1, geom.s2), geom.n)? {
            return Ok(0.0);
        }
        if rain_included {
            let k = rng.poisson(alpha * gap)? as usize;
            let mut times: Vec<f64> = (0..k).map(|_| geom.s1 + gap * rng.uniform()).collect();
            times.extend([geom.s1, geom.s2]);
            let level = RainLevel::from_times(alpha, &times)?;
            if !check_n(&level, alpha, (geom.s1, geom.s2))? {
                return Ok(0.0);
            }
        }
        Ok(f)
    })?;
    let est = Estimate::from_values(&format!("conditional_h({case:?})"), &values, config)?;
    let rhs = prop6_rhs(case, gap, alpha, geom.theta, eps, geom.n);
    Ok(ConditionalH {
        case,
        theta: geom.theta,
        comparison: BoundComparison::new(est, rhs),
        rain_included,
    })
}

/// One planted geometry per case at level `alpha`: interval `[0.25, 0.5]`
/// (interior) or `[0, 0.25]` / `[0.75, 1]` (edges), endpoints on the wedge
/// boundary, special cases with one endpoint at the tip.
pub fn planted_geometry(case: HCase, n: usize, theta: f64) -> Result<HGeometry> {
    let far = 0.3;
    let (index, interval, d1, d2) = match case {
        HCase::Interior => (1, (0.25, 0.5), edge_point(theta, WedgeEdge::R, far), edge_point(theta, WedgeEdge::S, far)),
        HCase::InteriorSpecial => (1, (0.25, 0.5), [0.0, 0.0], edge_point(theta, WedgeEdge::S, far)),
        HCase::Edge => (2 * n, (0.75, 1.0), edge_point(theta, WedgeEdge::R, far), [-far, 0.0]),
        HCase::EdgeSpecial => (0, (0.0, 0.25), [0.0, 0.0], edge_point(theta, WedgeEdge::S, far)),
    };
    HGeometry::planted(n, theta, index, interval, d1, d2)
}
