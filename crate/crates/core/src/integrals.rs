//! Scalar helpers and the integrals over pairs of simplices.
//!
//! `phi`, `gamma_ak` and `rhs_bound` are the deterministic ingredients of the
//! discordant-facet bound; the `Z_a` functions compute the integral that
//! controls its total mass.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::mc::{estimate, Estimate, EstimatorConfig};
use crate::rng::{tag, SimRng};
use crate::scalar::Scalar;
use crate::wedge::lemma3_constant;

/// `phi(alpha) = exp(sqrt(ln alpha))`, defined for `alpha > 1`.
pub fn phi<S: Scalar>(alpha: S) -> Result<S> {
    if !(alpha > S::one()) || !alpha.is_finite() {
        return Err(invalid(format!("phi needs finite alpha > 1, got {alpha}")));
    }
    Ok(alpha.ln().sqrt().exp())
}

/// `gamma(alpha, kappa) = M_kappa phi(alpha)^2 / sqrt(alpha)`.
pub fn gamma_ak<S: Scalar>(alpha: S, kappa: S) -> Result<S> {
    let m = lemma3_constant(kappa)?;
    Ok(m * enlargement(alpha)?)
}

/// Edge offset of the enlarged wedge, `phi(alpha)^2 / sqrt(alpha)`.
///
/// Evaluated as `exp(2 sqrt(ln a) - ln(a) / 2)` to stay finite for huge alpha.
pub fn enlargement<S: Scalar>(alpha: S) -> Result<S> {
    phi(alpha)?;
    Ok(enlargement_ln(alpha.ln()))
}

pub fn enlargement_ln<S: Scalar>(ln_alpha: S) -> S {
    (S::lit(2.0) * ln_alpha.sqrt() - ln_alpha / S::lit(2.0)).exp()
}

/// `{t in Delta_{2n} : t_1 >= a, 1 - t_{2n} >= a, t_i - t_{i-1} >= a}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZaRegion {
    pub a: f64,
    pub n: usize,
}

const A_TOL: f64 = 1e-12;

fn check_a(a: f64) -> Result<()> {
    // a = 1/e itself is admitted (within rounding) so that |ln a| = 1 is usable
    if !(a > 0.0 && a <= (-1.0f64).exp() * (1.0 + A_TOL)) {
        return Err(invalid(format!("a must lie in (0, 1/e], got {a}")));
    }
    Ok(())
}

impl ZaRegion {
    pub fn new(a: f64, n: usize) -> Result<Self> {
        check_a(a)?;
        if n == 0 {
            return Err(invalid("n must be positive"));
        }
        Ok(Self { a, n })
    }

    /// Membership of sorted merged times `t_1 < ... < t_{2n}`.
    pub fn contains(&self, t: &[f64]) -> bool {
        debug_assert_eq!(t.len(), 2 * self.n);
        gaps(t).iter().all(|&g| g >= self.a)
    }
}

/// The `2n + 1` spacings `t_1, t_2 - t_1, ..., 1 - t_{2n}`.
pub fn gaps(t: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len() + 1);
    let mut prev = 0.0;
    for &x in t {
        out.push(x - prev);
        prev = x;
    }
    out.push(1.0 - prev);
    out
}

/// `|ln a|^(2n)`, the value of `int_{[a,1]^{2n}} prod 1/y_j dy`.
pub fn integral_za_bound(a: f64, n: usize) -> Result<f64> {
    ZaRegion::new(a, n)?;
    Ok(a.ln().abs().powi(2 * n as i32))
}

/// Tensor-product midpoint rule for `int_{[a,1]^{2n}} prod 1/y_j dy` with
/// `resolution` nodes per axis.
pub fn integral_za_quadrature(a: f64, n: usize, resolution: usize) -> Result<f64> {
    ZaRegion::new(a, n)?;
    if n > 2 {
        return Err(invalid("quadrature is limited to n <= 2"));
    }
    if resolution < 32 {
        return Err(invalid("resolution must be at least 32"));
    }
    let dim = 2 * n;
    let h = (1.0 - a) / resolution as f64;
    let inv: Vec<f64> = (0..resolution).map(|k| 1.0 / (a + (k as f64 + 0.5) * h)).collect();
    let cell = h.powi(dim as i32);
    let mut idx = vec![0usize; dim];
    let mut total = 0.0;
    loop {
        let mut f = 1.0;
        for &k in &idx {
            f *= inv[k];
        }
        total += f;
        // odometer increment
        let mut axis = 0;
        loop {
            if axis == dim {
                return Ok(total * cell);
            }
            idx[axis] += 1;
            if idx[axis] < resolution {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

/// Right-hand side of the discordant-facet bound at merged times `t`:
/// `alpha^(-2n-1) + alpha^(-2n - kappa/(16000 n)) / sqrt(t_1 (1 - t_{2n})) * prod 1/(t_i - t_{i-1})`.
pub fn rhs_bound(t: &[f64], alpha: f64, kappa: f64, n: usize) -> Result<f64> {
    if n == 0 || t.len() != 2 * n {
        return Err(invalid("rhs_bound needs 2n merged times"));
    }
    if !(t[0] > 0.0 && t[2 * n - 1] < 1.0) || t.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("merged times must be strictly increasing inside (0, 1)"));
    }
    if !(alpha > 0.0) {
        return Err(invalid("alpha must be positive"));
    }
    let nf = n as f64;
    let first = alpha.powf(-2.0 * nf - 1.0);
    let mut second = alpha.powf(-2.0 * nf - kappa / (16000.0 * nf)) / (t[0] * (1.0 - t[2 * n - 1])).sqrt();
    for i in 1..2 * n {
        second /= t[i] - t[i - 1];
    }
    Ok(first + second)
}

/// Explicit upper-bound assembly for `alpha^(2n) int P(C~) dr ds` at `n`:
/// `1/alpha + alpha^(-kappa/(16000 n)) C(2n,n) |ln a|^(2n) + (2n+1) alpha^(2n) a`
/// with `a = alpha^(-2n-1)`.
pub fn final_assembly(alpha: f64, kappa: f64, n: usize) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(invalid("final_assembly needs alpha > 1"));
    }
    final_assembly_ln(alpha.ln(), kappa, n)
}

/// [`final_assembly`] in terms of `ln alpha`, for alphas beyond `f64` range.
pub fn final_assembly_ln(ln_alpha: f64, kappa: f64, n: usize) -> Result<f64> {
    if !(ln_alpha > 0.0) || !ln_alpha.is_finite() {
        return Err(invalid("ln alpha must be positive and finite"));
    }
    if n == 0 || kappa < 0.0 {
        return Err(invalid("need n >= 1 and kappa >= 0"));
    }
    let nf = n as f64;
    let k = 2.0 * nf + 1.0;
    let log_za = 2.0 * nf * (k * ln_alpha).ln();
    let second = (-kappa / (16000.0 * nf) * ln_alpha + log_za).exp() * binomial(2 * n, n);
    // (2n+1) alpha^(2n) alpha^(-2n-1) = (2n+1)/alpha
    let inv_alpha = (-ln_alpha).exp();
    Ok(inv_alpha + second + k * inv_alpha)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Fraction of uniform points of `[0,1]^(2n)` with `x_1 <= a`.
pub fn single_constraint_fraction(a: f64, n: usize, config: &EstimatorConfig) -> Result<Estimate> {
    if !(a > 0.0 && a < 1.0) || n == 0 {
        return Err(invalid("need a in (0,1) and n >= 1"));
    }
    estimate("single_constraint", config, tag::SINGLE_CONSTRAINT, |rng| {
        let x: Vec<f64> = (0..2 * n).map(|_| rng.uniform()).collect();
        Ok(f64::from(x[0] <= a))
    })
}

/// Probability that the merged times of `(r, s)`, uniform on
/// `Delta_n x Delta_n`, fall outside `Z_a`. Multiply by `1/(n!)^2` for the
/// Lebesgue measure of the complement.
pub fn measure_za_complement(a: f64, n: usize, config: &EstimatorConfig) -> Result<Estimate> {
    let region = ZaRegion::new(a, n)?;
    estimate("za_complement", config, tag::ZA_COMPLEMENT, |rng| {
        Ok(f64::from(!region.contains(&merged_pair_times(rng, n))))
    })
}

/// Exact union bound on the probability returned by [`measure_za_complement`]:
/// each of the `2n+1` spacings of `2n` uniforms is below `a` with probability
/// `1 - (1-a)^(2n)`.
pub fn za_complement_union_bound(a: f64, n: usize) -> f64 {
    let m = 2 * n;
    ((m + 1) as f64 * (1.0 - (1.0 - a).powi(m as i32))).min(1.0)
}

/// The Lebesgue-measure bound `C(2n,n) (2n+1) a` on the complement of `Z_a`.
pub fn za_complement_measure_bound(a: f64, n: usize) -> f64 {
    binomial(2 * n, n) * (2 * n + 1) as f64 * a
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Draws `r, s` uniformly from `Delta_n` and returns `r ∪ s` sorted.
pub(crate) fn merged_pair_times(rng: &mut SimRng, n: usize) -> Vec<f64> {
    let mut t = rng.sorted_uniforms(n);
    t.extend(rng.sorted_uniforms(n));
    t.sort_by(f64::total_cmp);
    t
}
