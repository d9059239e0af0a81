//! Small dense vector helpers for dimensions 2..=4.

use crate::scalar::Scalar;

#[inline]
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

#[inline]
pub fn norm<S: Scalar>(a: &[S]) -> S {
    dot(a, a).sqrt()
}

#[inline]
pub fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

#[inline]
pub fn dist<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<S>()
        .sqrt()
}

/// `a + t * b`
#[inline]
pub fn axpy<S: Scalar>(a: &[S], t: S, b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(&x, &y)| x + t * y).collect()
}

pub fn scale<S: Scalar>(a: &[S], t: S) -> Vec<S> {
    a.iter().map(|&x| x * t).collect()
}

pub fn normalized<S: Scalar>(a: &[S]) -> Option<Vec<S>> {
    let n = norm(a);
    if n > S::zero() && n.is_finite() {
        Some(scale(a, S::one() / n))
    } else {
        None
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det<S: Scalar>(mut m: Vec<Vec<S>>) -> S {
    let k = m.len();
    let mut det = S::one();
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col] == S::zero() {
            return S::zero();
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for row in col + 1..k {
            let f = m[row][col] / m[col][col];
            for c in col..k {
                let v = m[col][c];
                m[row][c] -= f * v;
            }
        }
    }
    det
}

/// Generalized cross product: a vector orthogonal to the `d - 1` rows of a
/// `(d-1) x d` matrix, with norm equal to the `(d-1)`-volume of the
/// parallelotope they span.
pub fn cross<S: Scalar>(rows: &[Vec<S>]) -> Vec<S> {
    let d = rows.len() + 1;
    if d == 1 {
        return vec![S::one()];
    }
    (0..d)
        .map(|j| {
            let minor: Vec<Vec<S>> = rows
                .iter()
                .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                .collect();
            let sign = if (j + d + 1) % 2 == 0 { S::one() } else { -S::one() };
            sign * det(minor)
        })
        .collect()
}

/// Orthonormal basis of the orthogonal complement of `span(vs)` in `R^d`.
/// `vs` must already be orthonormal.
pub fn orthonormal_complement<S: Scalar>(vs: &[Vec<S>], d: usize) -> Vec<Vec<S>> {
    let mut basis: Vec<Vec<S>> = vs.to_vec();
    let mut out = Vec::new();
    for axis in 0..d {
        let mut e = vec![S::zero(); d];
        e[axis] = S::one();
        for b in &basis {
            let c = dot(&e, b);
            e = axpy(&e, -c, b);
        }
        // second pass for stability
        for b in &basis {
            let c = dot(&e, b);
            e = axpy(&e, -c, b);
        }
        if norm(&e) > S::lit(1e-6) {
            let e = normalized(&e).unwrap();
            basis.push(e.clone());
            out.push(e);
        }
        if basis.len() == d {
            break;
        }
    }
    out
}

/// Euclidean distance from `p` to the simplex with the given vertices
/// (exhaustive over faces; fine for at most five vertices).
pub fn dist_point_simplex<S: Scalar>(p: &[S], verts: &[Vec<S>]) -> S {
    let k = verts.len();
    let mut best = S::infinity();
    for mask in 1u32..(1 << k) {
        let face: Vec<&Vec<S>> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| &verts[i]).collect();
        if let Some(q) = project_onto_face(p, &face) {
            let d = dist(p, &q);
            if d < best {
                best = d;
            }
        }
    }
    best
}

/// Orthogonal projection of `p` onto the affine hull of `face`, if it lands
/// inside the face (all barycentric coordinates >= 0).
fn project_onto_face<S: Scalar>(p: &[S], face: &[&Vec<S>]) -> Option<Vec<S>> {
    let origin = face[0];
    if face.len() == 1 {
        return Some(origin.clone());
    }
    let edges: Vec<Vec<S>> = face[1..].iter().map(|v| sub(v, origin)).collect();
    // Gram system G c = E^T (p - origin)
    let rhs: Vec<S> = edges.iter().map(|e| dot(e, &sub(p, origin))).collect();
    let gram: Vec<Vec<S>> = edges
        .iter()
        .map(|a| edges.iter().map(|b| dot(a, b)).collect())
        .collect();
    let coef = solve(gram, rhs)?;
    let sum: S = coef.iter().copied().sum();
    let tol = S::lit(1e-12);
    if coef.iter().any(|&c| c < -tol) || sum > S::one() + tol {
        return None;
    }
    let mut q = origin.clone();
    for (c, e) in coef.iter().zip(&edges) {
        q = axpy(&q, *c, e);
    }
    Some(q)
}

/// Solves a small linear system; `None` if singular.
pub fn solve<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Option<Vec<S>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col] == S::zero() {
            return None;
        }
        a.swap(pivot, col);
        b.swap(pivot, col);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                let v = a[col][c];
                a[row][c] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![S::zero(); n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for c in row + 1..n {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}
