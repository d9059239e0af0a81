//! Brownian motion and Brownian bridges on finite time grids, plus the grid
//! versions of the modulus of continuity and of the regularity event `Y_alpha`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::integrals::phi;
use crate::linalg::dist;
use crate::rng::SimRng;
use crate::scalar::Scalar;

/// Default number of grid points per unit time for sup-type events.
pub const DEFAULT_GRID_POINTS: usize = 1 << 10;

/// Sorted, strictly increasing evaluation times in `[0, 1]`.
///
/// Bridges on `[s1, s2]` use grids restricted to that interval, so only the
/// ordering and finiteness are enforced here; `[0, 1]` membership is checked by
/// [`TimeGrid::new`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TimeGrid<S: Scalar> {
    times: Vec<S>,
}

impl<S: Scalar> TimeGrid<S> {
    pub fn new(times: Vec<S>) -> Result<Self> {
        if times.iter().any(|&t| !(t >= S::zero() && t <= S::one())) {
            return Err(invalid("grid times must lie in [0, 1]"));
        }
        Self::unchecked_range(times)
    }

    /// Like [`TimeGrid::new`] but allows times outside `[0, 1]` (used for
    /// rescaled horizons).
    pub fn unchecked_range(times: Vec<S>) -> Result<Self> {
        if times.is_empty() {
            return Err(invalid("time grid must be nonempty"));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(invalid("grid times must be finite"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("grid times must be strictly increasing"));
        }
        Ok(Self { times })
    }

    /// `points` equally spaced times from 0 to 1 inclusive.
    pub fn uniform(points: usize) -> Result<Self> {
        Self::uniform_on(S::zero(), S::one(), points)
    }

    pub fn uniform_on(a: S, b: S, points: usize) -> Result<Self> {
        if points < 2 || !(a < b) {
            return Err(invalid("uniform grid needs >= 2 points and a < b"));
        }
        let steps = S::from_usize_lossy(points - 1);
        let mut times: Vec<S> = (0..points)
            .map(|i| a + (b - a) * S::from_usize_lossy(i) / steps)
            .collect();
        times[points - 1] = b;
        Self::unchecked_range(times)
    }

    /// Sorted union of several time lists (exact duplicates merged).
    pub fn merged(parts: &[&[S]]) -> Result<Self> {
        let mut all: Vec<S> = parts.iter().flat_map(|p| p.iter().copied()).collect();
        all.sort_by(|a, b| a.partial_cmp(b).expect("finite grid times"));
        all.dedup();
        Self::new(all)
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

    pub fn first(&self) -> S {
        self.times[0]
    }

    pub fn last(&self) -> S {
        self.times[self.times.len() - 1]
    }

    /// Index of an exact grid time.
    pub fn index_of(&self, t: S) -> Option<usize> {
        self.times
            .binary_search_by(|x| x.partial_cmp(&t).expect("finite"))
            .ok()
    }

    /// Index range of the grid times inside `[a, b]`.
    pub fn range_within(&self, a: S, b: S) -> std::ops::Range<usize> {
        let lo = self.times.partition_point(|&x| x < a);
        let hi = self.times.partition_point(|&x| x <= b);
        lo..hi.max(lo)
    }
}

/// A path realized on a grid: `points[k]` is the value at `grid.times()[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample<S: Scalar> {
    grid: TimeGrid<S>,
    dim: usize,
    coords: Vec<S>,
}

impl<S: Scalar> PathSample<S> {
    pub fn new(grid: TimeGrid<S>, points: Vec<Vec<S>>) -> Result<Self> {
        if points.len() != grid.len() {
            return Err(invalid("one point per grid time required"));
        }
        let dim = points.first().map_or(0, Vec::len);
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(invalid("points must share a positive dimension"));
        }
        let coords: Vec<S> = points.into_iter().flatten().collect();
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(invalid("path points must be finite"));
        }
        Ok(Self { grid, dim, coords })
    }

    pub(crate) fn from_flat(grid: TimeGrid<S>, dim: usize, coords: Vec<S>) -> Self {
        debug_assert_eq!(coords.len(), grid.len() * dim);
        Self { grid, dim, coords }
    }

    pub(crate) fn coords(&self) -> &[S] {
        &self.coords
    }

    pub fn grid(&self) -> &TimeGrid<S> {
        &self.grid
    }

    pub fn times(&self) -> &[S] {
        self.grid.times()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    #[inline]
    pub fn point(&self, k: usize) -> &[S] {
        &self.coords[k * self.dim..(k + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[S]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    /// Value at an exact grid time.
    pub fn at(&self, t: S) -> Option<&[S]> {
        self.grid.index_of(t).map(|k| self.point(k))
    }

    /// Points at the given exact grid times, in the order given.
    pub fn values_at(&self, ts: &[S]) -> Result<Vec<Vec<S>>> {
        ts.iter()
            .map(|&t| {
                self.at(t)
                    .map(<[S]>::to_vec)
                    .ok_or_else(|| invalid(format!("time {t} is not on the path grid")))
            })
            .collect()
    }

    /// Writes `t,x_1,..,x_d` rows with a header line.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=self.dim).map(|i| format!("x_{i}")))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        for (k, p) in self.points().enumerate() {
            write!(w, "{}", self.times()[k])?;
            for x in p {
                write!(w, ",{x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct PathSampleRepr<S: Scalar> {
    dim: usize,
    times: Vec<S>,
    points: Vec<Vec<S>>,
}

impl<S: Scalar> Serialize for PathSample<S> {
    fn serialize<Z: serde::Serializer>(&self, z: Z) -> std::result::Result<Z::Ok, Z::Error> {
        PathSampleRepr {
            dim: self.dim,
            times: self.times().to_vec(),
            points: self.points().map(<[S]>::to_vec).collect(),
        }
        .serialize(z)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for PathSample<S> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PathSampleRepr::<S>::deserialize(d)?;
        let grid = TimeGrid::unchecked_range(repr.times).map_err(serde::de::Error::custom)?;
        let path = PathSample::new(grid, repr.points).map_err(serde::de::Error::custom)?;
        if path.dim != repr.dim {
            return Err(serde::de::Error::custom("dimension mismatch"));
        }
        Ok(path)
    }
}

/// Endpoint data of a Brownian bridge pinned at `a` (time `s1`) and `b` (time `s2`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BridgeSpec<S: Scalar> {
    pub a: Vec<S>,
    pub b: Vec<S>,
    pub s1: S,
    pub s2: S,
}

impl<S: Scalar> BridgeSpec<S> {
    pub fn new(a: Vec<S>, b: Vec<S>, s1: S, s2: S) -> Result<Self> {
        if !(s1 < s2) {
            return Err(invalid("bridge requires s1 < s2"));
        }
        if a.len() != b.len() || a.is_empty() {
            return Err(invalid("bridge endpoints must share a positive dimension"));
        }
        if a.iter().chain(&b).any(|x| !x.is_finite()) {
            return Err(invalid("bridge endpoints must be finite"));
        }
        Ok(Self { a, b, s1, s2 })
    }
}

/// Standard Brownian motion started at `B(0) = 0`, evaluated on `grid`.
///
/// Increments are `sqrt(dt) * Z` with independent standard normals drawn in
/// grid order, so rescaling the grid by `c` rescales the path by `sqrt(c)`.
pub fn sample_brownian<S: Scalar>(dim: usize, grid: &TimeGrid<S>, rng: &mut SimRng) -> Result<PathSample<S>> {
    if dim == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let mut coords = Vec::with_capacity(dim * grid.len());
    let mut current = vec![0.0f64; dim];
    let mut prev_t = 0.0f64;
    for &t in grid.times() {
        let t = t.as_f64();
        let dt = t - prev_t;
        if dt < 0.0 {
            return Err(invalid("Brownian grid times must be >= 0"));
        }
        if dt > 0.0 {
            let sd = dt.sqrt();
            for x in current.iter_mut() {
                *x += sd * rng.normal();
            }
        }
        coords.extend(current.iter().map(|&x| S::lit(x)));
        prev_t = t;
    }
    Ok(PathSample {
        grid: grid.clone(),
        dim,
        coords,
    })
}

/// Brownian bridge from `spec.a` at `spec.s1` to `spec.b` at `spec.s2`.
///
/// Built by sequential conditioning: given `X(u) = x`, the next grid value
/// `X(t)` is Gaussian with mean `x + (t-u)/(s2-u) (b - x)` and variance
/// `(t-u)(s2-t)/(s2-u)` per coordinate. The endpoints are copied, not
/// sampled, so they are exact.
pub fn sample_bridge<S: Scalar>(
    spec: &BridgeSpec<S>,
    dim: usize,
    grid: &TimeGrid<S>,
    rng: &mut SimRng,
) -> Result<PathSample<S>> {
    if dim != spec.a.len() {
        return Err(invalid("bridge dimension does not match its endpoints"));
    }
    if grid.first() != spec.s1 || grid.last() != spec.s2 {
        return Err(invalid("bridge grid must start at s1 and end at s2"));
    }
    let a: Vec<f64> = spec.a.iter().map(|x| x.as_f64()).collect();
    let b: Vec<f64> = spec.b.iter().map(|x| x.as_f64()).collect();
    let coords = bridge_coords(&a, &b, grid.times(), rng);
    let mut coords: Vec<S> = coords.into_iter().map(S::lit).collect();
    // pin the endpoints in the target precision
    coords[..dim].copy_from_slice(&spec.a);
    let n = grid.len();
    coords[(n - 1) * dim..].copy_from_slice(&spec.b);
    Ok(PathSample {
        grid: grid.clone(),
        dim,
        coords,
    })
}

/// Sequential bridge construction in `f64`; `times` starts at the time of `a`
/// and ends at the time of `b`.
pub(crate) fn bridge_coords(a: &[f64], b: &[f64], times: &[impl Scalar], rng: &mut SimRng) -> Vec<f64> {
    let dim = a.len();
    let n = times.len();
    let s2 = times[n - 1].as_f64();
    let mut coords = Vec::with_capacity(n * dim);
    coords.extend_from_slice(a);
    let mut x = a.to_vec();
    for k in 1..n {
        let u = times[k - 1].as_f64();
        let t = times[k].as_f64();
        if k == n - 1 {
            coords.extend_from_slice(b);
            break;
        }
        let w = (t - u) / (s2 - u);
        let sd = ((t - u) * (s2 - t) / (s2 - u)).sqrt();
        for i in 0..dim {
            x[i] += w * (b[i] - x[i]) + sd * rng.normal();
        }
        coords.extend_from_slice(&x);
    }
    coords
}

/// Grid approximation of the modulus of continuity: the largest
/// `|B(t_j) - B(t_i)|` over grid pairs with `|t_j - t_i| <= delta`.
pub fn modulus<S: Scalar>(path: &PathSample<S>, delta: S) -> Result<S> {
    if !(delta > S::zero()) {
        return Err(invalid("delta must be positive"));
    }
    let t = path.times();
    let mut best = S::zero();
    for i in 0..path.len() {
        let pi = path.point(i);
        for j in i + 1..path.len() {
            if t[j] - t[i] > delta {
                break;
            }
            let d = dist(pi, path.point(j));
            if d > best {
                best = d;
            }
        }
    }
    Ok(best)
}

/// Grid version of the event `Y_alpha[a, b]`:
/// `|B(t_j) - B(t_i)| <= sqrt(t_j - t_i) * phi(alpha) + alpha^(-2n-1)` for all
/// grid pairs inside `[a, b]`.
///
/// Checking each pair against its own gap is equivalent to checking
/// `M_delta <= sqrt(delta) phi + alpha^(-2n-1)` for every realized `delta`.
/// The scan skips ahead using the largest one-step displacement `D`: from a
/// pair with slack `s`, the next `floor(s / D)` partners cannot violate.
pub fn check_y<S: Scalar>(path: &PathSample<S>, alpha: S, interval: (S, S), n_dim: usize) -> Result<bool> {
    let (a, b) = interval;
    if !(alpha > S::one()) {
        return Err(invalid("Y_alpha needs alpha > 1"));
    }
    if !(a <= b) || a < path.grid().first() || b > path.grid().last() {
        return Err(invalid("interval must lie within the path grid"));
    }
    let slack_const = (-(S::from_usize_lossy(2 * n_dim + 1)) * alpha.ln()).exp();
    let scale = phi(alpha)?;
    Ok(check_increments(path, path.grid().range_within(a, b), |gap| {
        gap.sqrt() * scale + slack_const
    }))
}

/// True iff every pair `i < j` in `range` satisfies
/// `|B_j - B_i| <= threshold(t_j - t_i)`; `threshold` must be nondecreasing.
pub(crate) fn check_increments<S: Scalar>(
    path: &PathSample<S>,
    range: std::ops::Range<usize>,
    threshold: impl Fn(S) -> S,
) -> bool {
    if range.len() < 2 {
        return true;
    }
    let t = path.times();
    let max_step = (range.start..range.end - 1)
        .map(|k| dist(path.point(k), path.point(k + 1)))
        .fold(S::zero(), S::max);
    if max_step == S::zero() {
        return true;
    }
    for i in range.start..range.end {
        let pi = path.point(i);
        let mut j = i + 1;
        while j < range.end {
            let d = dist(pi, path.point(j));
            let thr = threshold(t[j] - t[i]);
            if d > thr {
                return false;
            }
            let skip = ((thr - d) / max_step).floor().to_usize().unwrap_or(usize::MAX);
            j = j.saturating_add(skip.max(1));
        }
    }
    true
}
