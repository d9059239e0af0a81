//! Planar wedges, the geometry of facet pairs, discordant facets and the
//! special-index search.
//!
//! Wedges are parametrized by their half-angle `beta`: `W(w0, beta)` is the
//! set of `w0 + t (cos x, sin x)` with `|x - axis| <= beta`. A wedge cut out by
//! two half-planes whose normals meet at angle `theta` has half-angle
//! `(pi - theta) / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hull::{oriented_normal, Facet, Polytope, GEOM_REL_TOL};
use crate::integrals::{enlargement, gamma_ak, phi};
use crate::linalg::{dist, dot, normalized, orthonormal_complement, scale, sub};
use crate::paths::PathSample;
use crate::rng::SimRng;
use crate::scalar::Scalar;

/// Smallest normal angle accepted for a pair of facets.
pub const EPS_ANGLE: f64 = 1e-9;

/// Planar wedge with tip `tip`, bisector direction `axis_angle` and
/// half-angle `half_angle` in `(0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Wedge2D<S: Scalar> {
    pub tip: [S; 2],
    pub axis_angle: S,
    pub half_angle: S,
}

impl<S: Scalar> Wedge2D<S> {
    pub fn new(tip: [S; 2], axis_angle: S, half_angle: S) -> Result<Self> {
        if !(half_angle > S::zero() && half_angle <= S::PI()) {
            return Err(invalid(format!("half-angle must lie in (0, pi], got {half_angle}")));
        }
        if !(tip[0].is_finite() && tip[1].is_finite() && axis_angle.is_finite()) {
            return Err(invalid("wedge parameters must be finite"));
        }
        Ok(Self {
            tip,
            axis_angle,
            half_angle,
        })
    }

    /// Wedge `{w : <w - tip, m_1> >= 0, <w - tip, m_2> >= 0}` for unit inner
    /// normals `m_1, m_2`.
    pub fn from_inner_normals(tip: [S; 2], m1: [S; 2], m2: [S; 2]) -> Result<Self> {
        let sum = [m1[0] + m2[0], m1[1] + m2[1]];
        let len = (sum[0] * sum[0] + sum[1] * sum[1]).sqrt();
        if !(len > S::lit(EPS_ANGLE)) {
            return Err(Error::NearParallel {
                angle: (S::PI() - len).as_f64(),
            });
        }
        let theta = angle(&m1, &m2)?;
        Self::new(tip, sum[1].atan2(sum[0]), (S::PI() - theta) / S::lit(2.0))
    }

    pub fn axis(&self) -> [S; 2] {
        [self.axis_angle.cos(), self.axis_angle.sin()]
    }

    /// Inner unit normals of the two edges (equal for a half-plane).
    pub fn inner_normals(&self) -> [[S; 2]; 2] {
        let up = self.axis_angle + self.half_angle;
        let down = self.axis_angle - self.half_angle;
        [[up.sin(), -up.cos()], [-down.sin(), down.cos()]]
    }

    /// `<p - tip, m_i>` for both inner normals; nonnegative on the inner side.
    pub fn edge_distances(&self, p: &[S; 2]) -> [S; 2] {
        let q = [p[0] - self.tip[0], p[1] - self.tip[1]];
        let [m1, m2] = self.inner_normals();
        [q[0] * m1[0] + q[1] * m1[1], q[0] * m2[0] + q[1] * m2[1]]
    }

    pub fn is_convex(&self) -> bool {
        self.half_angle <= S::FRAC_PI_2()
    }

    pub fn contains(&self, p: &[S; 2]) -> bool {
        self.contains_within(p, S::zero())
    }

    /// Membership allowing an outward slack `tol` across each edge.
    pub fn contains_within(&self, p: &[S; 2], tol: S) -> bool {
        if self.half_angle >= S::PI() {
            return true;
        }
        let [d1, d2] = self.edge_distances(p);
        if self.is_convex() {
            d1 >= -tol && d2 >= -tol
        } else {
            d1 >= -tol || d2 >= -tol
        }
    }

    /// Same normals, edges pushed outward by `delta`.
    pub fn enlarged(&self, delta: S) -> Result<Self> {
        if !(delta >= S::zero()) {
            return Err(invalid("enlargement must be nonnegative"));
        }
        if self.half_angle >= S::PI() {
            return Ok(*self);
        }
        let shift = delta / self.half_angle.sin();
        let a = self.axis();
        Self::new(
            [self.tip[0] - shift * a[0], self.tip[1] - shift * a[1]],
            self.axis_angle,
            self.half_angle,
        )
    }
}

/// `arccos <n_r, n_s>` with the inner product clamped to `[-1, 1]`.
pub fn angle<S: Scalar>(n_r: &[S], n_s: &[S]) -> Result<S> {
    let tol = S::lit(1e-6);
    for n in [n_r, n_s] {
        if (dot(n, n).sqrt() - S::one()).abs() > tol {
            return Err(invalid("normals must be unit vectors"));
        }
    }
    if n_r.len() != n_s.len() {
        return Err(invalid("normals must share a dimension"));
    }
    Ok(dot(n_r, n_s).max(-S::one()).min(S::one()).acos())
}

/// A facet given by its vertices, unit normal and offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FacetGeom<S: Scalar> {
    pub points: Vec<Vec<S>>,
    pub normal: Vec<S>,
    pub offset: S,
}

impl<S: Scalar> FacetGeom<S> {
    /// Facet through `points` with the normal oriented by `<n, points[0]> >= 0`.
    pub fn oriented(points: Vec<Vec<S>>) -> Result<Self> {
        let normal = oriented_normal(&points, &points[0].clone())?;
        let offset = dot(&normal, &points[0]);
        Ok(Self { points, normal, offset })
    }

    pub fn with_normal(points: Vec<Vec<S>>, normal: Vec<S>) -> Result<Self> {
        let normal = normalized(&normal).ok_or_else(|| invalid("normal must be nonzero"))?;
        if points.is_empty() || points.iter().any(|p| p.len() != normal.len()) {
            return Err(invalid("facet points must match the normal's dimension"));
        }
        let offset = dot(&normal, &points[0]);
        Ok(Self { points, normal, offset })
    }

    pub fn from_polytope(p: &Polytope<S>, facet: &Facet<S>) -> Self {
        Self {
            points: facet.vertex_indices.iter().map(|&i| p.points[i].clone()).collect(),
            normal: facet.normal.clone(),
            offset: facet.offset,
        }
    }
}

/// Geometry attached to two facets: the ridge `L(r,s)`, the angle between the
/// normals and the projected wedge in `span{n_r, n_s}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct WedgePair<S: Scalar> {
    pub n_r: Vec<S>,
    pub n_s: Vec<S>,
    pub theta: S,
    /// Point of `L(r,s)` inside `span{n_r, n_s}`.
    pub ridge_point: Vec<S>,
    /// Orthonormal directions of `L(r,s)`.
    pub ridge_basis: Vec<Vec<S>>,
    /// Orthonormal basis `(e_1, e_2)` of `span{n_r, n_s}` with `e_1 = n_r`.
    pub plane_basis: [Vec<S>; 2],
    pub projected_tip: [S; 2],
    /// Projection of `W(r,s)`.
    pub wedge: Wedge2D<S>,
    /// Edge offset of the enlarged wedge, `phi(alpha)^2 / sqrt(alpha)`.
    pub enlargement: S,
    pub enlarged: Wedge2D<S>,
    pub gamma: S,
}

impl<S: Scalar> WedgePair<S> {
    /// Coordinates of `p` in `span{n_r, n_s}`.
    pub fn project(&self, p: &[S]) -> [S; 2] {
        [dot(p, &self.plane_basis[0]), dot(p, &self.plane_basis[1])]
    }

    /// Euclidean distance from `p` to the ridge `L(r,s)`.
    pub fn distance_to_ridge(&self, p: &[S]) -> S {
        let q = self.project(p);
        ((q[0] - self.projected_tip[0]).powi(2) + (q[1] - self.projected_tip[1]).powi(2)).sqrt()
    }
}

/// Pair geometry of `F_r`, `F_s` at level `alpha`; `kappa` fixes `gamma`.
pub fn pair_geometry<S: Scalar>(f_r: &FacetGeom<S>, f_s: &FacetGeom<S>, alpha: S, kappa: S) -> Result<WedgePair<S>> {
    let d = f_r.normal.len();
    if f_s.normal.len() != d || d < 2 {
        return Err(invalid("facets must share a dimension >= 2"));
    }
    let theta = angle(&f_r.normal, &f_s.normal)?;
    if !(theta.sin() > S::lit(EPS_ANGLE)) {
        return Err(Error::NearParallel { angle: theta.as_f64() });
    }
    let c = theta.cos();
    let e1 = f_r.normal.clone();
    let e2 = normalized(&sub(&f_s.normal, &scale(&e1, c))).ok_or(Error::NearParallel { angle: theta.as_f64() })?;
    // x = a n_r + b n_s with <x, n_r> = o_r and <x, n_s> = o_s
    let den = S::one() - c * c;
    let a = (f_r.offset - c * f_s.offset) / den;
    let b = (f_s.offset - c * f_r.offset) / den;
    let ridge_point: Vec<S> = (0..d).map(|k| a * f_r.normal[k] + b * f_s.normal[k]).collect();
    let ridge_basis = orthonormal_complement(&[e1.clone(), e2.clone()], d);
    let projected_tip = [dot(&ridge_point, &e1), dot(&ridge_point, &e2)];
    // outward normals in plane coordinates: n_r = (1, 0), n_s = (c, sin theta)
    let m1 = [-S::one(), S::zero()];
    let m2 = [-c, -theta.sin()];
    let wedge = Wedge2D::from_inner_normals(projected_tip, m1, m2)?;
    let enl = enlargement(alpha)?;
    Ok(WedgePair {
        n_r: f_r.normal.clone(),
        n_s: f_s.normal.clone(),
        theta,
        ridge_point,
        ridge_basis,
        plane_basis: [e1, e2],
        projected_tip,
        wedge,
        enlargement: enl,
        enlarged: wedge.enlarged(enl)?,
        gamma: gamma_ak(alpha, kappa)?,
    })
}

/// `dist(F_r ∪ F_s, L(r,s))` read as the largest vertex distance to the ridge.
pub fn ridge_distance<S: Scalar>(f_r: &FacetGeom<S>, f_s: &FacetGeom<S>, pair: &WedgePair<S>) -> S {
    f_r.points
        .iter()
        .chain(&f_s.points)
        .map(|p| pair.distance_to_ridge(p))
        .fold(S::zero(), S::max)
}

/// Event `C_{alpha,gamma,theta_min}(r,s)`: `theta(r,s) >= theta_min` and
/// `ridge_distance <= gamma`, both inclusive.
pub fn check_discordant<S: Scalar>(f_r: &FacetGeom<S>, f_s: &FacetGeom<S>, alpha: S, gamma: S, theta_min: S) -> Result<bool> {
    let theta = angle(&f_r.normal, &f_s.normal)?;
    if theta < theta_min {
        return Ok(false);
    }
    if !(theta.sin() > S::lit(EPS_ANGLE)) {
        return Ok(false);
    }
    let pair = pair_geometry_plain(f_r, f_s, alpha)?;
    Ok(ridge_distance(f_r, f_s, &pair) <= gamma)
}

/// [`pair_geometry`] without a `kappa` (gamma left at zero).
fn pair_geometry_plain<S: Scalar>(f_r: &FacetGeom<S>, f_s: &FacetGeom<S>, alpha: S) -> Result<WedgePair<S>> {
    let mut p = pair_geometry(f_r, f_s, alpha, S::one())?;
    p.gamma = S::zero();
    Ok(p)
}

/// `M_kappa = 4 / (sin(kappa/2) sin(kappa/4) sin(kappa/8))`.
pub fn lemma3_constant<S: Scalar>(kappa: S) -> Result<S> {
    if !(kappa > S::zero() && kappa < S::PI()) {
        return Err(invalid(format!("kappa must lie in (0, pi), got {kappa}")));
    }
    let s = |k: f64| (kappa / S::lit(k)).sin();
    Ok(S::lit(4.0) / (s(2.0) * s(4.0) * s(8.0)))
}

/// Intersection of two half-spaces `<x - apex, n_i> <= 0` in `R^d`; its tip is
/// the `(d-2)`-flat through `apex` orthogonal to both normals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AmbientWedge<S: Scalar> {
    pub apex: Vec<S>,
    pub n1: Vec<S>,
    pub n2: Vec<S>,
}

impl<S: Scalar> AmbientWedge<S> {
    pub fn new(apex: Vec<S>, n1: Vec<S>, n2: Vec<S>) -> Result<Self> {
        let n1 = normalized(&n1).ok_or_else(|| invalid("normal must be nonzero"))?;
        let n2 = normalized(&n2).ok_or_else(|| invalid("normal must be nonzero"))?;
        if apex.len() != n1.len() || n1.len() != n2.len() {
            return Err(invalid("wedge data must share a dimension"));
        }
        let theta = angle(&n1, &n2)?;
        if !(theta.sin() > S::lit(EPS_ANGLE)) {
            return Err(Error::NearParallel { angle: theta.as_f64() });
        }
        Ok(Self { apex, n1, n2 })
    }

    /// `pi` minus the angle between the outward normals.
    pub fn opening_angle(&self) -> S {
        S::PI() - dot(&self.n1, &self.n2).max(-S::one()).min(S::one()).acos()
    }

    pub fn contains(&self, p: &[S], eps: S) -> bool {
        let q = sub(p, &self.apex);
        dot(&q, &self.n1) <= eps && dot(&q, &self.n2) <= eps
    }

    /// Distance from `p` to the tip flat.
    pub fn distance_to_tip(&self, p: &[S]) -> S {
        let e1 = self.n1.clone();
        let c = dot(&self.n1, &self.n2);
        let e2 = normalized(&sub(&self.n2, &scale(&e1, c))).expect("nonparallel normals");
        let q = sub(p, &self.apex);
        (dot(&q, &e1).powi(2) + dot(&q, &e2).powi(2)).sqrt()
    }
}

/// Two facets of a polytope with large normal angle whose projected wedge has
/// its tip close to the projection of `facet_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DiscordantWitness<S: Scalar> {
    pub facet_i: usize,
    pub facet_j: usize,
    pub angle: S,
    /// Distance in `span{n_i, n_j}` from the wedge tip to the projection of `facet_i`.
    pub tip_distance: S,
}

impl<S: Scalar> DiscordantWitness<S> {
    /// Recomputes angle and tip distance from the raw facets and checks them
    /// against `kappa / 16` and `M_kappa s`.
    pub fn verify(&self, p: &Polytope<S>, kappa: S, s: S) -> Result<bool> {
        let (fi, fj) = (&p.facets[self.facet_i], &p.facets[self.facet_j]);
        let Some((a, t)) = witness_measures(p, fi, fj)? else {
            return Ok(false);
        };
        let tol = S::lit(1e-9) * (S::one() + t.abs());
        Ok((a - self.angle).abs() <= S::lit(1e-12)
            && (t - self.tip_distance).abs() <= tol
            && a >= kappa / S::lit(16.0)
            && t <= lemma3_constant(kappa)? * s)
    }
}

/// Angle of the pair and distance from the projected tip to the projection of
/// `fi`; `None` for near-parallel facets.
fn witness_measures<S: Scalar>(p: &Polytope<S>, fi: &Facet<S>, fj: &Facet<S>) -> Result<Option<(S, S)>> {
    let a = angle(&fi.normal, &fj.normal)?;
    if !(a.sin() > S::lit(EPS_ANGLE)) {
        return Ok(None);
    }
    let gi = FacetGeom::from_polytope(p, fi);
    let gj = FacetGeom::from_polytope(p, fj);
    // alpha only feeds the enlargement, which is unused here
    let pair = pair_geometry_plain(&gi, &gj, S::lit(std::f64::consts::E))?;
    // projection of fi is a segment on the line <., e_1> = const through the tip
    let along: Vec<S> = gi.points.iter().map(|v| pair.project(v)[1] - pair.projected_tip[1]).collect();
    let lo = along.iter().copied().fold(S::infinity(), S::min);
    let hi = along.iter().copied().fold(S::neg_infinity(), S::max);
    let t = if lo <= S::zero() && hi >= S::zero() {
        S::zero()
    } else {
        lo.abs().min(hi.abs())
    };
    Ok(Some((a, t)))
}

/// Exhaustive search for a discordant pair of facets of `p`, which must lie in
/// `wedge` (opening angle `pi - kappa`) within distance `s` of its tip.
///
/// Candidates need angle `>= kappa/16` and tip distance `<= M_kappa s`; among
/// them the largest angle wins, ties going to the smaller tip distance.
pub fn find_discordant<S: Scalar>(p: &Polytope<S>, wedge: &AmbientWedge<S>, kappa: S, s: S) -> Result<DiscordantWitness<S>> {
    let m = lemma3_constant(kappa)?;
    if !(s > S::zero()) {
        return Err(invalid("s must be positive"));
    }
    if p.dim != wedge.apex.len() {
        return Err(invalid("polytope and wedge dimensions differ"));
    }
    let tol = S::lit(1e-6);
    if (wedge.opening_angle() - (S::PI() - kappa)).abs() > tol {
        return Err(invalid("wedge opening angle must equal pi - kappa"));
    }
    let eps = p.eps_geom.max(S::lit(GEOM_REL_TOL));
    let verts = p.vertex_points();
    if verts.iter().any(|v| !wedge.contains(v, eps)) {
        return Err(invalid("polytope is not contained in the wedge"));
    }
    // the vertex minimum bounds dist(P, tip) from above
    let near = verts.iter().map(|v| wedge.distance_to_tip(v)).fold(S::infinity(), S::min);
    if near > s * (S::one() + tol) {
        return Err(invalid(format!("polytope is {near} from the tip, more than s = {s}")));
    }
    let threshold = kappa / S::lit(16.0);
    let mut best: Option<DiscordantWitness<S>> = None;
    for i in 0..p.facets.len() {
        for j in 0..p.facets.len() {
            if i == j {
                continue;
            }
            let Some((a, t)) = witness_measures(p, &p.facets[i], &p.facets[j])? else {
                continue;
            };
            if a < threshold || t > m * s {
                continue;
            }
            let better = match &best {
                None => true,
                Some(b) => a > b.angle || (a == b.angle && t < b.tip_distance),
            };
            if better {
                best = Some(DiscordantWitness {
                    facet_i: i,
                    facet_j: j,
                    angle: a,
                    tip_distance: t,
                });
            }
        }
    }
    best.ok_or_else(|| Error::LemmaViolation(format!("no facet pair with angle >= {threshold} and tip distance <= {}", m * s)))
}

/// A random instance for [`find_discordant`] in `R^d`: a wedge with opening
/// angle `pi - kappa` at the origin and the hull of `points` Gaussian points
/// inside it, shifted so that its nearest vertex touches distance `s` of the tip.
pub fn random_wedge_instance(d: usize, kappa: f64, points: usize, rng: &mut SimRng) -> Result<(AmbientWedge<f64>, Polytope<f64>, f64)> {
    if d < 2 {
        return Err(invalid("need d >= 2"));
    }
    let gauss = |rng: &mut SimRng| -> Vec<f64> { (0..d).map(|_| rng.normal()).collect() };
    let u = normalized(&gauss(rng)).unwrap();
    let v = loop {
        let g = gauss(rng);
        if let Some(w) = normalized(&sub(&g, &scale(&u, dot(&g, &u)))) {
            break w;
        }
    };
    // outward normals at angle kappa
    let n1 = u.clone();
    let n2: Vec<f64> = (0..d).map(|k| kappa.cos() * u[k] + kappa.sin() * v[k]).collect();
    let wedge = AmbientWedge::new(vec![0.0; d], n1, n2)?;
    let centre: Vec<f64> = {
        // inward bisector direction, two units deep
        let b = normalized(&(0..d).map(|k| -(wedge.n1[k] + wedge.n2[k])).collect::<Vec<_>>()).unwrap();
        scale(&b, 2.0)
    };
    let mut pts = Vec::with_capacity(points);
    while pts.len() < points {
        let g: Vec<f64> = gauss(rng).iter().zip(&centre).map(|(x, c)| x + c).collect();
        if wedge.contains(&g, 0.0) {
            pts.push(g);
        }
    }
    let hull = crate::hull::build_hull(&pts)?;
    let s = hull
        .vertex_points()
        .iter()
        .map(|p| wedge.distance_to_tip(p))
        .fold(f64::INFINITY, f64::min);
    Ok((wedge, hull, s))
}

/// Smallest `j` in `0..=2n` with
/// `t_{j+1} - t_j >= alpha^(1/(10n)) max(min(|b_j - w0|, |b_{j+1} - w0|)^2, 1/alpha)`.
///
/// `t` holds `t_0 = 0, ..., t_{2n+1} = 1` and `pb` the matching planar points
/// with `pb_0 = 0`. The increment bound and the closeness hypothesis
/// (`|pb_j0 - w0| < M phi(alpha)^2 / sqrt(alpha)` for some `j0`) are checked
/// first. `None` is possible when `alpha` is too small for the guarantee.
pub fn special_index<S: Scalar>(t: &[S], pb: &[[S; 2]], w0: [S; 2], alpha: S, m: S, n: usize) -> Result<Option<usize>> {
    if n == 0 || t.len() != 2 * n + 2 || pb.len() != 2 * n + 2 {
        return Err(invalid("need 2n + 2 times and points"));
    }
    if t[0] != S::zero() || t[2 * n + 1] != S::one() || t.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("times must increase strictly from 0 to 1"));
    }
    let ph = phi(alpha)?;
    let slack = alpha.powf(-S::from_usize_lossy(2 * n + 1));
    let d2 = |a: &[S; 2], b: &[S; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    for i in 0..=2 * n {
        let step = d2(&pb[i + 1], &pb[i]);
        let bound = ph * (t[i + 1] - t[i]).sqrt() + slack;
        if step > bound {
            return Err(Error::Hypothesis {
                hypothesis: "increment bound",
                detail: format!("|b_{} - b_{}| = {step} exceeds {bound}", i + 1, i),
            });
        }
    }
    let radius = m * enlargement(alpha)?;
    if !pb.iter().any(|b| d2(b, &w0) < radius) {
        return Err(Error::Hypothesis {
            hypothesis: "point near the tip",
            detail: format!("no b_j within {radius} of w0"),
        });
    }
    let factor = alpha.powf(S::one() / S::from_usize_lossy(10 * n));
    Ok((0..=2 * n).find(|&j| special_condition(t, pb, w0, alpha, factor, j)))
}

fn special_condition<S: Scalar>(t: &[S], pb: &[[S; 2]], w0: [S; 2], alpha: S, factor: S, j: usize) -> bool {
    let d2 = |a: &[S; 2]| ((a[0] - w0[0]).powi(2) + (a[1] - w0[1]).powi(2)).sqrt();
    let near = d2(&pb[j]).min(d2(&pb[j + 1]));
    t[j + 1] - t[j] >= factor * (near * near).max(alpha.recip())
}

/// Re-checks the special-index inequality at `j`.
pub fn verify_special_index<S: Scalar>(t: &[S], pb: &[[S; 2]], w0: [S; 2], alpha: S, n: usize, j: usize) -> bool {
    j <= 2 * n && special_condition(t, pb, w0, alpha, alpha.powf(S::one() / S::from_usize_lossy(10 * n)), j)
}

/// A random instance for [`special_index`]: uniform times, Brownian planar
/// points (increments clipped to the hypothesis), and `w0` uniform in the
/// open disk of radius `M phi^2/sqrt(alpha)` about a random `b_j0`.
pub fn random_special_instance(n: usize, alpha: f64, m: f64, rng: &mut SimRng) -> Result<(Vec<f64>, Vec<[f64; 2]>, [f64; 2])> {
    let mut t = vec![0.0];
    t.extend(rng.sorted_uniforms(2 * n));
    t.push(1.0);
    if t.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("tied uniform times"));
    }
    let ph = phi(alpha)?;
    let mut pb = vec![[0.0, 0.0]];
    for i in 0..=2 * n {
        let gap = t[i + 1] - t[i];
        let mut step = [gap.sqrt() * rng.normal(), gap.sqrt() * rng.normal()];
        let len = (step[0] * step[0] + step[1] * step[1]).sqrt();
        let cap = ph * gap.sqrt();
        if len > cap {
            step = [step[0] * cap / len, step[1] * cap / len];
        }
        let last = pb[i];
        pb.push([last[0] + step[0], last[1] + step[1]]);
    }
    let j0 = (rng.uniform() * (2 * n + 2) as f64) as usize;
    let radius = m * enlargement(alpha)?;
    let rad = radius * rng.uniform().sqrt();
    let ang = 2.0 * std::f64::consts::PI * rng.uniform();
    let w0 = [pb[j0][0] + rad * ang.cos(), pb[j0][1] + rad * ang.sin()];
    Ok((t, pb, w0))
}

/// Event `H_i` on one path segment: at every grid time
/// `<B(t), n_r> <= <B(r_1), n_r> + phi^2/sqrt(alpha)` and likewise for `n_s`.
pub fn check_events_h<S: Scalar>(segment: &PathSample<S>, pair: &WedgePair<S>, r1_value: &[S], s1_value: &[S], alpha: S) -> Result<bool> {
    let enl = enlargement(alpha)?;
    let cap_r = dot(r1_value, &pair.n_r) + enl;
    let cap_s = dot(s1_value, &pair.n_s) + enl;
    Ok(segment.points().all(|p| dot(p, &pair.n_r) <= cap_r && dot(p, &pair.n_s) <= cap_s))
}

/// Event `E~_alpha(r)` on the path grid: `<B(t), n_r> <= <B(r_1), n_r> + phi^2/sqrt(alpha)`.
pub fn check_e_tilde<S: Scalar>(path: &PathSample<S>, n_r: &[S], r1_value: &[S], alpha: S) -> Result<bool> {
    let cap = dot(r1_value, n_r) + enlargement(alpha)?;
    Ok(path.points().all(|p| dot(p, n_r) <= cap))
}

/// Distance from the projected tip to the nearest vertex of either facet
/// projected to the plane, for reports.
pub fn projected_tip_gap<S: Scalar>(f_r: &FacetGeom<S>, f_s: &FacetGeom<S>, pair: &WedgePair<S>) -> S {
    f_r.points
        .iter()
        .chain(&f_s.points)
        .map(|p| {
            let q = pair.project(p);
            dist(&q, &pair.projected_tip)
        })
        .fold(S::infinity(), S::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{E, FRAC_PI_2, FRAC_PI_4, PI};

    fn facet(points: Vec<Vec<f64>>, normal: Vec<f64>) -> FacetGeom<f64> {
        FacetGeom::with_normal(points, normal).unwrap()
    }

    #[test]
    fn angle_examples() {
        let a = [1.0, 0.0];
        assert_eq!(angle(&a, &a).unwrap(), 0.0);
        assert_relative_eq!(angle(&a, &[0.0, 1.0]).unwrap(), FRAC_PI_2);
        assert_relative_eq!(angle(&a, &[-1.0, 0.0]).unwrap(), PI);
        assert!(angle(&a, &[2.0, 0.0]).is_err());
    }

    #[test]
    fn wedge_membership() {
        let w = Wedge2D::new([0.0, 0.0], 0.0, FRAC_PI_4).unwrap();
        assert!(w.contains(&[0.0, 0.0]));
        assert!(w.contains(&[1.0, 0.5]));
        assert!(!w.contains(&[1.0, 1.5]));
        assert!(w.contains(&[2.0, 2.0 - 1e-12]));
        let half = Wedge2D::new([0.0, 0.0], 0.0, FRAC_PI_2).unwrap();
        assert!(half.contains(&[0.1, -5.0]) && !half.contains(&[-0.1, 3.0]));
        let reflex = Wedge2D::new([0.0, 0.0], 0.0, 3.0 * FRAC_PI_4).unwrap();
        assert!(reflex.contains(&[-0.5, 0.866]));
        assert!(!reflex.contains(&[-1.0, 0.1]));
        assert!(Wedge2D::new([0.0, 0.0], 0.0, 0.0).is_err());
    }

    #[test]
    fn enlarged_edges_shift_by_delta() {
        let w = Wedge2D::new([1.0, -2.0], 0.7, 0.4).unwrap();
        let big = w.enlarged(0.3).unwrap();
        let d = w.edge_distances(&big.tip);
        assert_relative_eq!(d[0], -0.3, epsilon = 1e-12);
        assert_relative_eq!(d[1], -0.3, epsilon = 1e-12);
    }

    #[test]
    fn right_angle_pair_in_the_plane() {
        let fr = facet(vec![vec![1.0, 0.0], vec![1.0, 1.0]], vec![1.0, 0.0]);
        let fs = facet(vec![vec![0.0, 1.0], vec![1.0, 1.0]], vec![0.0, 1.0]);
        let p = pair_geometry(&fr, &fs, E.powi(4), 1.0).unwrap();
        assert_relative_eq!(p.theta, FRAC_PI_2);
        assert_relative_eq!(p.ridge_point[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(p.ridge_point[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(p.enlargement, E * E, max_relative = 1e-12);
        assert_relative_eq!(p.wedge.half_angle, FRAC_PI_4, epsilon = 1e-12);
        // the square's corner region lies in the projected wedge
        assert!(p.wedge.contains(&p.project(&[0.5, 0.5])));
        assert!(!p.wedge.contains(&p.project(&[1.5, 0.5])));
        assert_relative_eq!(ridge_distance(&fr, &fs, &p), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn parallel_facets() {
        let fr = facet(vec![vec![1.0, 0.0], vec![1.0, 1.0]], vec![1.0, 0.0]);
        let fs = facet(vec![vec![2.0, 0.0], vec![2.0, 1.0]], vec![1.0, 0.0]);
        assert!(matches!(pair_geometry(&fr, &fs, 10.0, 1.0), Err(Error::NearParallel { .. })));
        assert!(!check_discordant(&fr, &fs, 10.0, 1.0, 0.1).unwrap());
    }

    #[test]
    fn discordant_is_inclusive() {
        let fr = facet(vec![vec![1.0, 1.0], vec![1.0, 1.0 + 1e-300]], vec![1.0, 0.0]);
        let fs = facet(vec![vec![1.0, 1.0], vec![0.0, 1.0]], vec![0.0, 1.0]);
        assert!(check_discordant(&fr, &fs, 10.0, 1.0, FRAC_PI_2).unwrap());
        assert!(!check_discordant(&fr, &fs, 10.0, 0.5, FRAC_PI_2).unwrap());
    }

    #[test]
    fn lemma3_constant_values() {
        let m = lemma3_constant(FRAC_PI_2).unwrap();
        let direct = 4.0 / ((PI / 4.0).sin() * (PI / 8.0).sin() * (PI / 16.0).sin());
        assert_relative_eq!(m, direct, max_relative = 1e-14);
        assert!(lemma3_constant(0.5).unwrap() > lemma3_constant(1.0).unwrap());
        assert!(lemma3_constant(1e-3).unwrap() > 1e9);
        assert!(lemma3_constant(0.0).is_err() && lemma3_constant(PI).is_err());
    }

    #[test]
    fn special_index_uniform_gaps() {
        let n = 2;
        let t: Vec<f64> = (0..=5).map(|k| k as f64 / 5.0).collect();
        let pb = vec![[0.0, 0.0]; 6];
        assert_eq!(special_index(&t, &pb, [0.0, 0.0], 1e6, 1.0, n).unwrap(), Some(0));
    }

    #[test]
    fn special_index_can_fail_at_small_alpha() {
        let n = 1;
        // short gaps fail against 1/alpha; the long one ends far from w0
        let t = vec![0.0, 0.01, 0.02, 1.0];
        let pb = vec![[0.0, 0.0], [0.8, 0.0], [1.6, 0.0], [2.0, 0.0]];
        let w0 = [0.0, 0.0];
        assert_eq!(special_index(&t, &pb, w0, 100.0, 1.0, n).unwrap(), None);
    }

    #[test]
    fn special_index_reports_failed_hypothesis() {
        let t = vec![0.0, 0.5, 0.6, 1.0];
        let pb = vec![[0.0, 0.0], [100.0, 0.0], [100.0, 0.0], [100.0, 0.0]];
        let e = special_index(&t, &pb, [0.0, 0.0], 1e6, 1.0, 1).unwrap_err();
        assert!(matches!(e, Error::Hypothesis { hypothesis: "increment bound", .. }));
        let pb = vec![[0.0, 0.0]; 4];
        let e = special_index(&t, &pb, [5.0, 0.0], 1e6, 1.0, 1).unwrap_err();
        assert!(matches!(e, Error::Hypothesis { hypothesis: "point near the tip", .. }));
    }

    #[test]
    fn h_event_examples() {
        let fr = facet(vec![vec![1.0, 0.0], vec![1.0, 1.0]], vec![1.0, 0.0]);
        let fs = facet(vec![vec![0.0, 1.0], vec![1.0, 1.0]], vec![0.0, 1.0]);
        let pair = pair_geometry(&fr, &fs, 1e6, 1.0).unwrap();
        let grid = crate::paths::TimeGrid::uniform(5).unwrap();
        let flat = PathSample::new(grid.clone(), vec![vec![1.0, 0.0]; 5]).unwrap();
        assert!(check_events_h(&flat, &pair, &[1.0, 0.0], &[0.0, 1.0], 1e6).unwrap());
        let mut pts = vec![vec![1.0, 0.0]; 5];
        pts[2] = vec![2.0 + pair.enlargement, 0.0];
        let out = PathSample::new(grid, pts).unwrap();
        assert!(!check_events_h(&out, &pair, &[1.0, 0.0], &[0.0, 1.0], 1e6).unwrap());
    }

    #[test]
    fn witness_found_for_planted_corner() {
        let mut rng = SimRng::new(5);
        for kappa in [0.3, 0.8, 1.5] {
            let (wedge, hull, s) = random_wedge_instance(3, kappa, 30, &mut rng).unwrap();
            let w = find_discordant(&hull, &wedge, kappa, s).unwrap();
            assert!(w.verify(&hull, kappa, s).unwrap());
        }
    }
}
