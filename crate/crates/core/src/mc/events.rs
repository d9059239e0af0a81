//! Path-plus-rain events: `P(R_alpha^C)`, the Campbell identity for facet
//! counts, the discordant-facet probability and the two routes to
//! `P(E~_alpha(r) ∩ E~_alpha(s))`.

use serde::{Deserialize, Serialize};

use super::crossing::HalfSpaces;
use super::engine::{run_replicas, BoundComparison, Estimate, EstimatorConfig};
use super::wedge_stay::MIN_STEPS;
use crate::error::{invalid, Result};
use crate::hull::{build_hull, count_q, event_e, SimplexTimes};
use crate::integrals::{enlargement, factorial, gamma_ak, rhs_bound};
use crate::linalg::dot;
use crate::paths::{bridge_coords, sample_brownian, TimeGrid};
use crate::rain::{check_r, coupled_grid, generate_rain, level};
use crate::rng::{tag, SimRng};
use crate::wedge::{check_discordant, FacetGeom};

/// Frequency of the failure of `R_alpha[0, 1]` for a path in `R^n_dim`
/// coupled with rain on the uniform grid merged with the level times.
pub fn prob_r_complement(alpha: f64, n_dim: usize, config: &EstimatorConfig) -> Result<Estimate> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(invalid("alpha must be finite and > 1"));
    }
    if n_dim == 0 {
        return Err(invalid("dimension must be positive"));
    }
    config.validate()?;
    let points = config.grid_points_per_unit_time + 1;
    let values = run_replicas(config, tag::R_COMPLEMENT, |rng| {
        let rain = generate_rain::<f64>(alpha, rng)?;
        let lv = level(&rain, alpha)?;
        let grid = coupled_grid(&lv, points)?;
        let path = sample_brownian(n_dim, &grid, rng)?;
        Ok(f64::from(!check_r(&lv, &path, alpha, (0.0, 1.0), n_dim)?))
    })?;
    Estimate::from_values(&format!("prob_r_complement(alpha={alpha})"), &values, config)
}

/// Both sides of `E[q_alpha(Delta_n)] = alpha^n int_{Delta_n} P(E_alpha(r)) dr`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampbellCheck {
    pub alpha: f64,
    pub n_dim: usize,
    /// Mean number of facets of `K_alpha` with all vertex times in `(0, 1)`.
    pub lhs: Estimate,
    /// `alpha^n / n!` times the facet-event frequency at uniform `r`.
    pub rhs: Estimate,
}

impl CampbellCheck {
    pub fn overlaps(&self) -> bool {
        self.lhs.overlaps(&self.rhs)
    }
}

/// Runs both estimators of the Campbell identity with independent streams.
pub fn campbell_check(alpha: f64, n_dim: usize, config: &EstimatorConfig) -> Result<CampbellCheck> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(invalid("alpha must be at least 1"));
    }
    if n_dim < 2 {
        return Err(invalid("the facet identity needs dimension >= 2"));
    }
    config.validate()?;
    let lhs_values = run_replicas(config, tag::CAMPBELL_LHS, |rng| {
        let rain = generate_rain::<f64>(alpha, rng)?;
        let lv = level(&rain, alpha)?;
        let grid = lv.grid();
        let path = sample_brownian(n_dim, &grid, rng)?;
        let points: Vec<Vec<f64>> = path.points().map(<[f64]>::to_vec).collect();
        if points.len() <= n_dim {
            return Ok(0.0);
        }
        let hull = build_hull(&points)?;
        Ok(count_q(&hull, lv.times(), SimplexTimes::is_interior)? as f64)
    })?;
    let weight = alpha.powi(n_dim as i32) / factorial(n_dim);
    let rhs_values = run_replicas(config, tag::CAMPBELL_RHS, |rng| {
        let r = SimplexTimes::new(rng.sorted_uniforms(n_dim))?;
        let rain = generate_rain::<f64>(alpha, rng)?;
        let lv = level(&rain, alpha)?;
        let grid = TimeGrid::merged(&[lv.times(), r.times()])?;
        let path = sample_brownian(n_dim, &grid, rng)?;
        Ok(if event_e(&r, &path, &lv)? { weight } else { 0.0 })
    })?;
    Ok(CampbellCheck {
        alpha,
        n_dim,
        lhs: Estimate::from_values("campbell_lhs", &lhs_values, config)?,
        rhs: Estimate::from_values("campbell_rhs", &rhs_values, config)?,
    })
}

/// Pinned skeleton `t_0 = 0 < t_1 < ... < t_{2n} < t_{2n+1} = 1` of two
/// facet time tuples.
#[derive(Debug, Clone)]
struct Skeleton {
    /// Including 0 and 1.
    times: Vec<f64>,
    r_idx: Vec<usize>,
    s_idx: Vec<usize>,
}

impl Skeleton {
    fn new(r: &SimplexTimes<f64>, s: &SimplexTimes<f64>) -> Result<Self> {
        if r.len() != s.len() || r.len() < 2 {
            return Err(invalid("r and s need the same length n >= 2"));
        }
        let inner = r.merged(s)?;
        if !(inner[0] > 0.0 && inner[inner.len() - 1] < 1.0) {
            return Err(invalid("facet times must lie in (0, 1)"));
        }
        let mut times = vec![0.0];
        times.extend_from_slice(&inner);
        times.push(1.0);
        let find = |t: &f64| times.iter().position(|u| u == t).expect("merged time");
        Ok(Self {
            r_idx: r.times().iter().map(find).collect(),
            s_idx: s.times().iter().map(find).collect(),
            times,
        })
    }

    fn inner(&self) -> &[f64] {
        &self.times[1..self.times.len() - 1]
    }

    /// `B` at the skeleton times, flat.
    fn sample(&self, dim: usize, rng: &mut SimRng) -> Vec<f64> {
        let mut coords = vec![0.0; dim];
        let mut x = vec![0.0; dim];
        for k in 1..self.times.len() {
            let sd = (self.times[k] - self.times[k - 1]).sqrt();
            for v in x.iter_mut() {
                *v += sd * rng.normal();
            }
            coords.extend_from_slice(&x);
        }
        coords
    }

    fn facet(&self, coords: &[f64], dim: usize, idx: &[usize]) -> Result<FacetGeom<f64>> {
        FacetGeom::oriented(idx.iter().map(|&k| coords[k * dim..(k + 1) * dim].to_vec()).collect())
    }

    /// The half-spaces of `E~(r) ∩ E~(s)` for skeleton values `coords`.
    fn constraints(&self, f_r: &FacetGeom<f64>, f_s: &FacetGeom<f64>, enl: f64) -> HalfSpaces {
        HalfSpaces {
            normals: vec![f_r.normal.clone(), f_s.normal.clone()],
            offsets: vec![dot(&f_r.points[0], &f_r.normal), dot(&f_s.points[0], &f_s.normal)],
            slack: enl,
        }
    }
}

/// Survival factor of a bridge through the half-spaces between skeleton
/// points `k` and `k + 1`.
fn interval_factor(sk: &Skeleton, coords: &[f64], dim: usize, k: usize, hs: &HalfSpaces, config: &EstimatorConfig, rng: &mut SimRng) -> f64 {
    let (s1, s2) = (sk.times[k], sk.times[k + 1]);
    let steps = config.steps_for(s2 - s1).max(MIN_STEPS);
    let times: Vec<f64> = (0..=steps)
        .map(|j| if j == steps { s2 } else { s1 + (s2 - s1) * j as f64 / steps as f64 })
        .collect();
    let path = bridge_coords(&coords[k * dim..(k + 1) * dim], &coords[(k + 1) * dim..(k + 2) * dim], &times, rng);
    hs.path_factor(&path, dim, &times)
}

/// Result of [`discordant_prob`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscordantProb {
    pub comparison: BoundComparison,
    pub gamma: f64,
    pub theta_min: f64,
}

/// Estimates `P(E~_alpha(r) ∩ E~_alpha(s) ∩ C_{alpha,kappa}(r,s))` for a path
/// in `R^n`, `n = |r|`. The skeleton is sampled first; when the discordance
/// event fails the replica scores 0, otherwise bridges on every interval give
/// the crossing-corrected survival of both enlarged half-spaces.
pub fn discordant_prob(r: &SimplexTimes<f64>, s: &SimplexTimes<f64>, alpha: f64, kappa: f64, config: &EstimatorConfig) -> Result<DiscordantProb> {
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(invalid("alpha must be finite and > 1"));
    }
    if !(kappa > 0.0 && kappa < std::f64::consts::PI) {
        return Err(invalid("kappa must lie in (0, pi)"));
    }
    config.validate()?;
    let sk = Skeleton::new(r, s)?;
    let dim = r.len();
    let enl = enlargement(alpha)?;
    let gamma = gamma_ak(alpha, kappa)?;
    let theta_min = kappa / 16.0;
    let values = run_replicas(config, tag::DISCORDANT, |rng| {
        let coords = sk.sample(dim, rng);
        let f_r = sk.facet(&coords, dim, &sk.r_idx)?;
        let f_s = sk.facet(&coords, dim, &sk.s_idx)?;
        if !check_discordant(&f_r, &f_s, alpha, gamma, theta_min)? {
            return Ok(0.0);
        }
        let hs = sk.constraints(&f_r, &f_s, enl);
        let mut f = 1.0;
        for k in 0..sk.times.len() - 1 {
            f *= interval_factor(&sk, &coords, dim, k, &hs, config, rng);
            if f == 0.0 {
                break;
            }
        }
        Ok(f)
    })?;
    let est = Estimate::from_values("discordant_prob", &values, config)?;
    let bound = rhs_bound(sk.inner(), alpha, kappa, dim)?;
    Ok(DiscordantProb {
        comparison: BoundComparison::new(est, bound),
        gamma,
        theta_min,
    })
}

/// `P(E~_alpha(r) ∩ E~_alpha(s))` from whole paths on the uniform grid
/// merged with the skeleton, crossing-corrected.
pub fn e_tilde_direct(r: &SimplexTimes<f64>, s: &SimplexTimes<f64>, alpha: f64, config: &EstimatorConfig) -> Result<Estimate> {
    config.validate()?;
    let sk = Skeleton::new(r, s)?;
    let dim = r.len();
    let enl = enlargement(alpha)?;
    let uniform = TimeGrid::<f64>::uniform(config.grid_points_per_unit_time + 1)?;
    let grid = TimeGrid::merged(&[uniform.times(), sk.inner()])?;
    let values = run_replicas(config, tag::E_TILDE_DIRECT, |rng| {
        let path = sample_brownian::<f64>(dim, &grid, rng)?;
        let f_r = FacetGeom::oriented(path.values_at(r.times())?)?;
        let f_s = FacetGeom::oriented(path.values_at(s.times())?)?;
        let hs = sk.constraints(&f_r, &f_s, enl);
        Ok(hs.path_factor(path.coords(), dim, grid.times()))
    })?;
    Estimate::from_values("e_tilde_direct", &values, config)
}

/// The same probability as the average over skeletons of the product of
/// the per-interval conditional probabilities `P(H_i | S)`, each estimated
/// from `inner` independent bridges.
pub fn e_tilde_product(r: &SimplexTimes<f64>, s: &SimplexTimes<f64>, alpha: f64, inner: usize, config: &EstimatorConfig) -> Result<Estimate> {
    if inner == 0 {
        return Err(invalid("need at least one inner bridge"));
    }
    config.validate()?;
    let sk = Skeleton::new(r, s)?;
    let dim = r.len();
    let enl = enlargement(alpha)?;
    let values = run_replicas(config, tag::E_TILDE_PRODUCT, |rng| {
        let coords = sk.sample(dim, rng);
        let f_r = sk.facet(&coords, dim, &sk.r_idx)?;
        let f_s = sk.facet(&coords, dim, &sk.s_idx)?;
        let hs = sk.constraints(&f_r, &f_s, enl);
        let mut prod = 1.0;
        for k in 0..sk.times.len() - 1 {
            let mean = (0..inner).map(|_| interval_factor(&sk, &coords, dim, k, &hs, config, rng)).sum::<f64>() / inner as f64;
            prod *= mean;
            if prod == 0.0 {
                break;
            }
        }
        Ok(prod)
    })?;
    Estimate::from_values("e_tilde_product", &values, config)
}
