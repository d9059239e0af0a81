//! Convex hulls in dimensions 2 to 4, facet events and the facet counts
//! `q_alpha`, `w_alpha`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{cross, dist, dot, normalized, sub};
use crate::paths::PathSample;
use crate::rain::RainLevel;
use crate::scalar::Scalar;

/// Relative tolerance: `eps_geom = GEOM_REL_TOL * diameter`.
pub const GEOM_REL_TOL: f64 = 1e-9;

/// A hull facet; `normal` points outward and `<normal, x> = offset` on the facet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Facet<S: Scalar> {
    /// Indices into the polytope's input points, ascending.
    pub vertex_indices: Vec<usize>,
    pub normal: Vec<S>,
    pub offset: S,
}

impl<S: Scalar> Facet<S> {
    /// Signed distance of `p` to the facet hyperplane, positive outside.
    #[inline]
    pub fn height(&self, p: &[S]) -> S {
        dot(&self.normal, p) - self.offset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Polytope<S: Scalar> {
    pub dim: usize,
    /// All input points; facets and vertices index into this list.
    pub points: Vec<Vec<S>>,
    /// Indices of the hull vertices, ascending.
    pub vertices: Vec<usize>,
    pub facets: Vec<Facet<S>>,
    pub eps_geom: S,
}

impl<S: Scalar> Polytope<S> {
    pub fn vertex_points(&self) -> Vec<Vec<S>> {
        self.vertices.iter().map(|&i| self.points[i].clone()).collect()
    }

    /// Weak containment: `p` is on the inner side of every facet within `eps`.
    pub fn contains(&self, p: &[S], eps: S) -> bool {
        self.facets.iter().all(|f| f.height(p) <= eps)
    }

    /// Number of distinct edges (pairs of vertices sharing a ridge) for `d = 3`.
    pub fn edge_count(&self) -> usize {
        let mut edges = std::collections::BTreeSet::new();
        for f in &self.facets {
            let v = &f.vertex_indices;
            for i in 0..v.len() {
                for j in i + 1..v.len() {
                    edges.insert((v[i], v[j]));
                }
            }
        }
        edges.len()
    }

    /// `V - E + F` for a 3-polytope.
    pub fn euler_characteristic(&self) -> Result<i64> {
        if self.dim != 3 {
            return Err(invalid("Euler characteristic is reported for d = 3 only"));
        }
        Ok(self.vertices.len() as i64 - self.edge_count() as i64 + self.facets.len() as i64)
    }

    /// Geomview OFF text for `d = 2` (one polygon, z = 0) and `d = 3`.
    pub fn to_off(&self) -> Result<String> {
        let remap: HashMap<usize, usize> = self.vertices.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let mut out = String::from("OFF\n");
        let coords = |p: &[S]| p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        match self.dim {
            2 => {
                out += &format!("{} 1 0\n", self.vertices.len());
                for &i in &self.vertices {
                    out += &format!("{} 0\n", coords(&self.points[i]));
                }
                let cycle = self.polygon_cycle();
                let idx: Vec<String> = cycle.iter().map(|i| remap[i].to_string()).collect();
                out += &format!("{} {}\n", cycle.len(), idx.join(" "));
            }
            3 => {
                out += &format!("{} {} {}\n", self.vertices.len(), self.facets.len(), self.edge_count());
                for &i in &self.vertices {
                    out += &format!("{}\n", coords(&self.points[i]));
                }
                for f in &self.facets {
                    let mut v = f.vertex_indices.clone();
                    // counter-clockwise seen from outside
                    let n = cross(&[
                        sub(&self.points[v[1]], &self.points[v[0]]),
                        sub(&self.points[v[2]], &self.points[v[0]]),
                    ]);
                    if dot(&n, &f.normal) < S::zero() {
                        v.swap(1, 2);
                    }
                    out += &format!("3 {} {} {}\n", remap[&v[0]], remap[&v[1]], remap[&v[2]]);
                }
            }
            d => return Err(invalid(format!("OFF output is available for d = 2, 3 (got {d})"))),
        }
        Ok(out)
    }

    /// Hull vertices of a polygon in boundary order.
    fn polygon_cycle(&self) -> Vec<usize> {
        let mut next: HashMap<usize, Vec<usize>> = HashMap::new();
        for f in &self.facets {
            let (a, b) = (f.vertex_indices[0], f.vertex_indices[1]);
            next.entry(a).or_default().push(b);
            next.entry(b).or_default().push(a);
        }
        let mut cycle = vec![self.vertices[0]];
        let mut prev = usize::MAX;
        while cycle.len() < self.vertices.len() {
            let cur = *cycle.last().unwrap();
            let nb = next[&cur].iter().copied().find(|&x| x != prev && !cycle.contains(&x));
            match nb {
                Some(x) => {
                    prev = cur;
                    cycle.push(x);
                }
                None => break,
            }
        }
        cycle
    }
}

/// Largest pairwise distance (exact, quadratic).
pub fn diameter<S: Scalar>(points: &[Vec<S>]) -> S {
    let mut best = S::zero();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.max(dist(&points[i], &points[j]));
        }
    }
    best
}

/// Unit normal of the hyperplane through `d` points in `R^d`, or `None` if
/// they are affinely dependent at tolerance `eps`.
fn hyperplane_normal<S: Scalar>(pts: &[&[S]], eps: S) -> Option<Vec<S>> {
    let rows: Vec<Vec<S>> = pts[1..].iter().map(|p| sub(p, pts[0])).collect();
    let c = cross(&rows);
    let scale = rows.iter().map(|r| dot(r, r).sqrt()).fold(S::one(), |a, b| a * b);
    // |c| is the (d-1)-volume; compare against the edge-length product
    let len = dot(&c, &c).sqrt();
    if !(len > eps * scale / (S::one() + scale).max(S::one()) && len > S::zero()) {
        return None;
    }
    normalized(&c)
}

/// Affine rank of `points` at tolerance `eps` (Gram-Schmidt on differences).
pub fn affine_rank<S: Scalar>(points: &[Vec<S>], eps: S) -> usize {
    if points.is_empty() {
        return 0;
    }
    let mut basis: Vec<Vec<S>> = Vec::new();
    for p in &points[1..] {
        let mut v = sub(p, &points[0]);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                v = v.iter().zip(b).map(|(&x, &y)| x - c * y).collect();
            }
        }
        if dot(&v, &v).sqrt() > eps {
            basis.push(normalized(&v).unwrap());
        }
    }
    basis.len()
}

/// Picks `d + 1` affinely independent points greedily (farthest from the
/// current affine span at every step).
fn initial_simplex<S: Scalar>(points: &[Vec<S>], d: usize, eps: S) -> Result<Vec<usize>> {
    let mut chosen = vec![0usize];
    let mut basis: Vec<Vec<S>> = Vec::new();
    while chosen.len() < d + 1 {
        let mut best = (S::zero(), usize::MAX, Vec::new());
        for (i, p) in points.iter().enumerate() {
            let mut v = sub(p, &points[chosen[0]]);
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(&v, b);
                    v = v.iter().zip(b).map(|(&x, &y)| x - c * y).collect();
                }
            }
            let len = dot(&v, &v).sqrt();
            if len > best.0 {
                best = (len, i, v);
            }
        }
        if !(best.0 > eps) {
            return Err(Error::Degenerate {
                rank: chosen.len() - 1,
                dim: d,
            });
        }
        basis.push(normalized(&best.2).unwrap());
        chosen.push(best.1);
    }
    Ok(chosen)
}

fn make_facet<S: Scalar>(points: &[Vec<S>], mut idx: Vec<usize>, interior: &[S], eps: S) -> Result<Facet<S>> {
    idx.sort_unstable();
    let pts: Vec<&[S]> = idx.iter().map(|&i| points[i].as_slice()).collect();
    let mut normal = hyperplane_normal(&pts, eps).ok_or(Error::Degenerate {
        rank: idx.len() - 2,
        dim: points[0].len(),
    })?;
    let mut offset = dot(&normal, pts[0]);
    if dot(&normal, interior) > offset {
        normal.iter_mut().for_each(|x| *x = -*x);
        offset = -offset;
    }
    Ok(Facet {
        vertex_indices: idx,
        normal,
        offset,
    })
}

/// Convex hull of `points` in `R^d`, `d in {2, 3, 4}`, by incremental
/// insertion: each outside point replaces its visible facets by cones over
/// the horizon ridges.
pub fn build_hull<S: Scalar>(points: &[Vec<S>]) -> Result<Polytope<S>> {
    let d = points.first().map_or(0, Vec::len);
    if !(2..=4).contains(&d) {
        return Err(invalid(format!("hull dimension must be 2, 3 or 4 (got {d})")));
    }
    if points.iter().any(|p| p.len() != d || p.iter().any(|x| !x.is_finite())) {
        return Err(invalid("points must be finite and share one dimension"));
    }
    if points.len() < d + 1 {
        return Err(invalid(format!("need at least {} points in dimension {d}", d + 1)));
    }
    let eps = S::lit(GEOM_REL_TOL) * diameter(points);
    let simplex = initial_simplex(points, d, eps)?;
    let inv = S::one() / S::from_usize_lossy(d + 1);
    let interior: Vec<S> = (0..d)
        .map(|k| simplex.iter().map(|&i| points[i][k]).sum::<S>() * inv)
        .collect();

    let mut facets: Vec<Facet<S>> = (0..=d)
        .map(|skip| {
            let idx: Vec<usize> = simplex.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &i)| i).collect();
            make_facet(points, idx, &interior, eps)
        })
        .collect::<Result<_>>()?;

    for (pi, p) in points.iter().enumerate() {
        if simplex.contains(&pi) {
            continue;
        }
        let visible: Vec<bool> = facets.iter().map(|f| f.height(p) > eps).collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut ridge_count: HashMap<Vec<usize>, usize> = HashMap::new();
        for (f, _) in facets.iter().zip(&visible).filter(|(_, &v)| v) {
            for skip in 0..d {
                let ridge: Vec<usize> = f.vertex_indices.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &i)| i).collect();
                *ridge_count.entry(ridge).or_default() += 1;
            }
        }
        let mut horizon: Vec<Vec<usize>> = ridge_count.into_iter().filter(|(_, c)| *c == 1).map(|(r, _)| r).collect();
        horizon.sort();
        let mut kept: Vec<Facet<S>> = facets.into_iter().zip(visible).filter(|(_, v)| !v).map(|(f, _)| f).collect();
        for ridge in horizon {
            let mut idx = ridge;
            idx.push(pi);
            kept.push(make_facet(points, idx, &interior, eps)?);
        }
        facets = kept;
    }

    facets.sort_by(|a, b| a.vertex_indices.cmp(&b.vertex_indices));
    let mut vertices: Vec<usize> = facets.iter().flat_map(|f| f.vertex_indices.iter().copied()).collect();
    vertices.sort_unstable();
    vertices.dedup();
    Ok(Polytope {
        dim: d,
        points: points.to_vec(),
        vertices,
        facets,
        eps_geom: eps,
    })
}

/// Unit normal of the affine span of `facet_points` (`d` points in `R^d`)
/// with `<n, reference> >= 0`; in the tie `|<n, reference>| <= eps_geom` the
/// first nonzero coordinate is made positive.
pub fn oriented_normal<S: Scalar>(facet_points: &[Vec<S>], reference: &[S]) -> Result<Vec<S>> {
    let d = reference.len();
    if facet_points.len() != d || facet_points.iter().any(|p| p.len() != d) {
        return Err(invalid("need d points in R^d"));
    }
    let eps = S::lit(GEOM_REL_TOL) * diameter(facet_points).max(S::min_positive_value());
    let pts: Vec<&[S]> = facet_points.iter().map(Vec::as_slice).collect();
    let mut n = hyperplane_normal(&pts, eps).ok_or(Error::Degenerate {
        rank: affine_rank(facet_points, eps),
        dim: d,
    })?;
    let s = dot(&n, reference);
    let flip = if s.abs() <= eps {
        n.iter().find(|x| x.abs() > eps).is_some_and(|&x| x < S::zero())
    } else {
        s < S::zero()
    };
    if flip {
        n.iter_mut().for_each(|x| *x = -*x);
    }
    Ok(n)
}

/// Facet event for explicit points: every point of `level_points` lies weakly
/// on one side of the hyperplane through `facet_points` (tolerance
/// `eps_geom` relative to the diameter of all points involved).
pub fn event_e_points<S: Scalar>(facet_points: &[Vec<S>], level_points: &[Vec<S>]) -> Result<bool> {
    let d = facet_points.first().map_or(0, Vec::len);
    if facet_points.len() != d || d == 0 {
        return Err(invalid("need d facet points in R^d"));
    }
    let mut all: Vec<Vec<S>> = facet_points.to_vec();
    all.extend_from_slice(level_points);
    let eps = S::lit(GEOM_REL_TOL) * diameter(&all);
    let pts: Vec<&[S]> = facet_points.iter().map(Vec::as_slice).collect();
    let n = hyperplane_normal(&pts, eps).ok_or(Error::Degenerate {
        rank: affine_rank(facet_points, eps),
        dim: d,
    })?;
    let off = dot(&n, &facet_points[0]);
    let (mut above, mut below) = (false, false);
    for p in level_points {
        let h = dot(&n, p) - off;
        above |= h > eps;
        below |= h < -eps;
        if above && below {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Strictly increasing times in `[0, 1]`: a point of the simplex `Delta_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SimplexTimes<S: Scalar> {
    r: Vec<S>,
}

impl<S: Scalar> SimplexTimes<S> {
    pub fn new(r: Vec<S>) -> Result<Self> {
        if r.is_empty() {
            return Err(invalid("simplex times must be nonempty"));
        }
        if r.iter().any(|t| !(*t >= S::zero() && *t <= S::one())) {
            return Err(invalid("simplex times must lie in [0, 1]"));
        }
        if r.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("simplex times must be strictly increasing"));
        }
        Ok(Self { r })
    }

    pub fn times(&self) -> &[S] {
        &self.r
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    /// In the open simplex: `r_1 > 0` and `r_n < 1`.
    pub fn is_interior(&self) -> bool {
        self.r[0] > S::zero() && self.r[self.r.len() - 1] < S::one()
    }

    /// Sorted union `t(r, s)`; errors if the two share a time.
    pub fn merged(&self, other: &Self) -> Result<Vec<S>> {
        let mut t: Vec<S> = self.r.iter().chain(&other.r).copied().collect();
        t.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        if t.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid("r and s share a time"));
        }
        Ok(t)
    }
}

/// Facet event `E_alpha(r)`: the simplex on `B(r)` is a facet of
/// `Conv(B(r) ∪ B(Lambda_alpha))`. `path` must contain every level time and
/// every `r_i` on its grid.
pub fn event_e<S: Scalar>(r: &SimplexTimes<S>, path: &PathSample<S>, levelset: &RainLevel<S>) -> Result<bool> {
    if r.len() != path.dim() {
        return Err(invalid("facet needs as many times as the dimension"));
    }
    let facet = path.values_at(r.times())?;
    let level = path.values_at(levelset.times())?;
    event_e_points(&facet, &level)
}

/// `q_alpha(A)`: facets of `polytope` whose vertex times lie in `region`.
/// `times[i]` is the time of `polytope.points[i]`.
pub fn count_q<S: Scalar>(polytope: &Polytope<S>, times: &[S], region: impl Fn(&SimplexTimes<S>) -> bool) -> Result<usize> {
    if times.len() != polytope.points.len() {
        return Err(invalid("one time per hull input point required"));
    }
    let mut count = 0;
    for f in &polytope.facets {
        let mut r: Vec<S> = f.vertex_indices.iter().map(|&i| times[i]).collect();
        r.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        if region(&SimplexTimes::new(r)?) {
            count += 1;
        }
    }
    Ok(count)
}

/// `w_alpha(A)`: increasing `n`-tuples of level times lying in `region`.
pub fn count_w<S: Scalar>(levelset: &RainLevel<S>, n: usize, region: impl Fn(&SimplexTimes<S>) -> bool) -> Result<usize> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    let t = levelset.times();
    let mut idx: Vec<usize> = (0..n).collect();
    if n > t.len() {
        return Ok(0);
    }
    let mut count = 0;
    loop {
        let r = SimplexTimes::new(idx.iter().map(|&i| t[i]).collect())?;
        if region(&r) {
            count += 1;
        }
        // next combination in lexicographic order
        let mut k = n;
        loop {
            if k == 0 {
                return Ok(count);
            }
            k -= 1;
            if idx[k] < t.len() - n + k {
                break;
            }
            if k == 0 {
                return Ok(count);
            }
        }
        idx[k] += 1;
        for j in k + 1..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;

    fn gaussian_cloud(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = SimRng::new(seed);
        (0..n).map(|_| (0..d).map(|_| rng.normal()).collect()).collect()
    }

    #[test]
    fn square_has_four_edges() {
        let sq = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
        let p = build_hull(&sq).unwrap();
        assert_eq!(p.facets.len(), 4);
        assert_eq!(p.vertices, vec![0, 1, 2, 3]);
    }

    #[test]
    fn tetrahedron_has_four_facets() {
        let t = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let p = build_hull(&t).unwrap();
        assert_eq!(p.facets.len(), 4);
        assert_eq!(p.euler_characteristic().unwrap(), 2);
    }

    #[test]
    fn degenerate_input_reports_rank() {
        let line = vec![vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0], vec![3.0, 3.0, 3.0]];
        assert_eq!(build_hull(&line).unwrap_err(), Error::Degenerate { rank: 1, dim: 3 });
        assert!(build_hull(&[vec![0.0, 0.0], vec![1.0, 0.0]]).is_err());
    }

    #[test]
    fn gaussian_cloud_in_3d() {
        let pts = gaussian_cloud(1000, 3, 1);
        let p = build_hull(&pts).unwrap();
        assert_eq!(p.euler_characteristic().unwrap(), 2);
        for q in &pts {
            assert!(p.contains(q, p.eps_geom));
        }
        for f in &p.facets {
            assert!((dot(&f.normal, &f.normal).sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn facets_match_brute_force_enumeration() {
        for d in 2..=4 {
            for seed in 0..5 {
                let pts = gaussian_cloud(12, d, 100 + seed);
                let p = build_hull(&pts).unwrap();
                let mut brute = Vec::new();
                let mut idx: Vec<usize> = (0..d).collect();
                loop {
                    let fp: Vec<Vec<f64>> = idx.iter().map(|&i| pts[i].clone()).collect();
                    if event_e_points(&fp, &pts).unwrap() {
                        brute.push(idx.clone());
                    }
                    let mut k = d;
                    let mut done = true;
                    while k > 0 {
                        k -= 1;
                        if idx[k] < pts.len() - d + k {
                            idx[k] += 1;
                            for j in k + 1..d {
                                idx[j] = idx[j - 1] + 1;
                            }
                            done = false;
                            break;
                        }
                    }
                    if done {
                        break;
                    }
                }
                let got: Vec<Vec<usize>> = p.facets.iter().map(|f| f.vertex_indices.clone()).collect();
                assert_eq!(got, brute, "d={d} seed={seed}");
            }
        }
    }

    #[test]
    fn oriented_normal_examples() {
        let n: Vec<f64> = oriented_normal(&[vec![1.0, 0.0], vec![1.0, 1.0]], &[1.0, 0.0]).unwrap();
        assert!((n[0] - 1.0).abs() < 1e-15 && n[1].abs() < 1e-15);
        let n: Vec<f64> = oriented_normal(&[vec![0.0, 0.0], vec![0.0, 1.0]], &[0.0, 1.0]).unwrap();
        assert!((n[0] - 1.0).abs() < 1e-15 && n[1].abs() < 1e-15);
        assert!(matches!(
            oriented_normal(&[vec![1.0, 1.0], vec![1.0, 1.0]], &[1.0, 1.0]),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn event_e_two_point_level() {
        let facet = vec![vec![1.0, -1.0], vec![1.0, 1.0]];
        assert!(event_e_points(&facet, &[vec![0.0, 0.0], vec![0.5, 3.0]]).unwrap());
        assert!(!event_e_points(&facet, &[vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap());
    }

    #[test]
    fn counts_on_small_levels() {
        let l = RainLevel::from_times(1.0, &[0.5]).unwrap();
        let tri = vec![vec![0.0, 0.0], vec![1.0, 2.0], vec![2.0, 0.5]];
        let p = build_hull(&tri).unwrap();
        assert_eq!(count_q(&p, l.times(), |_| true).unwrap(), 3);
        assert_eq!(count_q(&p, l.times(), |_| false).unwrap(), 0);
        assert_eq!(count_q(&p, l.times(), SimplexTimes::is_interior).unwrap(), 0);
        assert_eq!(count_w(&RainLevel::from_times(1.0, &[]).unwrap(), 2, |_| true).unwrap(), 1);
        let five = RainLevel::from_times(1.0, &[0.2, 0.4, 0.6]).unwrap();
        assert_eq!(count_w(&five, 2, |_| true).unwrap(), 10);
        assert_eq!(count_w(&five, 3, |_| true).unwrap(), 10);
        assert_eq!(count_w(&five, 6, |_| true).unwrap(), 0);
    }

    #[test]
    fn off_output() {
        let t = vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let off = build_hull(&t).unwrap().to_off().unwrap();
        assert!(off.starts_with("OFF\n4 4 6\n"));
        let sq = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let off = build_hull(&sq).unwrap().to_off().unwrap();
        assert!(off.ends_with("4 0 2 1 3\n") || off.ends_with("4 0 3 1 2\n"), "{off}");
    }
}
