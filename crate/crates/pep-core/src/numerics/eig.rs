//! Dense complex eigensolver: Householder Hessenberg reduction followed by
//! an explicitly shifted QR iteration (Wilkinson shift, occasional
//! exceptional shift), with optional Schur-vector accumulation and
//! triangular back-substitution for eigenvectors.
//!
//! The QR sweep is split into a row pass (building R) and a row-batched
//! column pass (forming RQ), so both phases walk the row-major storage
//! contiguously.  Matrices up to a few thousand rows are practical.

use super::matrix::{vec_dot, vec_max_abs, vec_norm, vec_scale, C64, ComplexMatrix};
use crate::error::{Error, Result};

/// Eigenvalues below this distance (relative to `max|A|`) count as a
/// coalescing cluster; eigenvectors are still reported but the
/// decomposition is flagged because a defective matrix has no eigenbasis.
pub const COALESCENCE_RTOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct EigenSystem {
    /// Sorted by descending real part, ties by descending imaginary part.
    pub values: Vec<C64>,
    /// Unit-norm right eigenvectors, index-aligned with `values`; the first
    /// nonzero component of each is made real and positive.
    pub vectors: Vec<Vec<C64>>,
    /// Two or more eigenvalues lie within `1e-8 * max|A|` of each other.
    pub coalescing: bool,
}

impl EigenSystem {
    /// Worst residual `max|A v - lambda v|` over all pairs.
    pub fn max_residual(&self, a: &ComplexMatrix) -> f64 {
        self.values
            .iter()
            .zip(&self.vectors)
            .map(|(&lam, v)| {
                let av = a.apply(v);
                av.iter()
                    .zip(v)
                    .map(|(x, y)| (x - lam * y).norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Full eigendecomposition of a general complex matrix.
pub fn eig_general(a: &ComplexMatrix) -> Result<EigenSystem> {
    a.check_square_finite()?;
    let n = a.rows();
    if n == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    let scale = a.max_abs();
    let mut h = a.clone();
    let mut z = ComplexMatrix::identity(n);
    hessenberg(&mut h, Some(&mut z));
    qr_iterate(&mut h, Some(&mut z))?;
    let mut values: Vec<C64> = (0..n).map(|i| h[(i, i)]).collect();
    let mut vectors = triangular_eigenvectors(&h, &z);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        values[j]
            .re
            .partial_cmp(&values[i].re)
            .unwrap()
            .then(values[j].im.partial_cmp(&values[i].im).unwrap())
    });
    values = order.iter().map(|&i| values[i]).collect();
    vectors = order.iter().map(|&i| std::mem::take(&mut vectors[i])).collect();

    let coalescing = has_cluster(&values, COALESCENCE_RTOL * scale.max(f64::MIN_POSITIVE));
    Ok(EigenSystem { values, vectors, coalescing })
}

/// Eigenvalues only (no Schur vectors); much cheaper for large matrices.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<C64>> {
    a.check_square_finite()?;
    let n = a.rows();
    if n == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    let mut h = a.clone();
    hessenberg(&mut h, None);
    qr_iterate(&mut h, None)?;
    let mut values: Vec<C64> = (0..n).map(|i| h[(i, i)]).collect();
    values.sort_by(|x, y| {
        y.re.partial_cmp(&x.re).unwrap().then(y.im.partial_cmp(&x.im).unwrap())
    });
    Ok(values)
}

fn has_cluster(values: &[C64], tol: f64) -> bool {
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            if (a - b).norm() < tol {
                return true;
            }
        }
    }
    false
}

/// In-place Householder reduction to upper Hessenberg form; `q`, when given,
/// accumulates the orthogonal factor so that `A = Q H Q^dagger`.
fn hessenberg(h: &mut ComplexMatrix, mut q: Option<&mut ComplexMatrix>) {
    let n = h.rows();
    let mut v = vec![C64::new(0.0, 0.0); n];
    for k in 0..n.saturating_sub(2) {
        // Householder vector for column k, rows k+1..n
        let mut norm_sq = 0.0;
        for i in k + 1..n {
            norm_sq += h[(i, k)].norm_sqr();
        }
        if norm_sq == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let norm = norm_sq.sqrt();
        let alpha = if x0.norm() == 0.0 {
            C64::new(-norm, 0.0)
        } else {
            -(x0 / x0.norm()) * norm
        };
        for i in k + 1..n {
            v[i] = h[(i, k)];
        }
        v[k + 1] -= alpha;
        let vsq: f64 = v[k + 1..n].iter().map(|z| z.norm_sqr()).sum();
        if vsq == 0.0 {
            continue;
        }
        let tau = 2.0 / vsq;

        // Left: H[k+1.., k..] -= tau * v (v^dagger H), accumulated row-wise.
        let mut w = vec![C64::new(0.0, 0.0); n - k];
        for i in k + 1..n {
            let vi = v[i].conj();
            for (wj, &hij) in w.iter_mut().zip(&h.row(i)[k..]) {
                *wj += vi * hij;
            }
        }
        for i in k + 1..n {
            let f = tau * v[i];
            for (hij, &wj) in h.row_mut(i)[k..].iter_mut().zip(&w) {
                *hij -= f * wj;
            }
        }
        // Right: H[.., k+1..] -= tau * (H v) v^dagger, row by row.
        for i in 0..n {
            let row = &mut h.row_mut(i)[k + 1..];
            let s: C64 = row.iter().zip(&v[k + 1..n]).map(|(a, b)| a * b).sum();
            let f = tau * s;
            for (hij, vj) in row.iter_mut().zip(&v[k + 1..n]) {
                *hij -= f * vj.conj();
            }
        }
        if let Some(q) = q.as_deref_mut() {
            for i in 0..n {
                let row = &mut q.row_mut(i)[k + 1..];
                let s: C64 = row.iter().zip(&v[k + 1..n]).map(|(a, b)| a * b).sum();
                let f = tau * s;
                for (qij, vj) in row.iter_mut().zip(&v[k + 1..n]) {
                    *qij -= f * vj.conj();
                }
            }
        }
        // Entries that are now zero by construction.
        for i in k + 2..n {
            h[(i, k)] = C64::new(0.0, 0.0);
        }
    }
}

/// A complex Givens rotation `[[c, s], [-conj(s), c]]` with real `c >= 0`
/// that maps `(a, b)` to `(r, 0)`.
#[inline]
fn givens(a: C64, b: C64) -> (f64, C64) {
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    let an = a.norm();
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let d = (an * an + bn * bn).sqrt();
    let c = an / d;
    let s = (a / an) * b.conj() / d;
    (c, s)
}

/// Explicitly shifted QR iteration on an upper Hessenberg matrix.  With
/// `z = Some(..)` the full Schur form is produced and the unitary factor
/// accumulated; with `None` only the eigenvalues (diagonal) are reliable.
fn qr_iterate(h: &mut ComplexMatrix, mut z: Option<&mut ComplexMatrix>) -> Result<()> {
    let n = h.rows();
    if n <= 1 {
        return Ok(());
    }
    let full = z.is_some();
    let eps = f64::EPSILON;
    let hnorm = h.norm_one().max(f64::MIN_POSITIVE);
    let mut cs = vec![(0.0f64, C64::new(0.0, 0.0)); n];

    let mut hi = n - 1;
    let mut stagnation = 0usize;
    let mut total_iters = 0usize;
    let max_total = 60 * n;

    'outer: loop {
        // Deflate converged 1x1 blocks off the bottom.
        loop {
            if hi == 0 {
                break 'outer;
            }
            let tst = {
                let t = h[(hi - 1, hi - 1)].norm() + h[(hi, hi)].norm();
                if t == 0.0 { hnorm } else { t }
            };
            if h[(hi, hi - 1)].norm() <= eps * tst {
                h[(hi, hi - 1)] = C64::new(0.0, 0.0);
                hi -= 1;
                stagnation = 0;
            } else {
                break;
            }
        }
        // Find the window start: first negligible subdiagonal above hi.
        let mut lo = hi;
        while lo > 0 {
            let tst = {
                let t = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
                if t == 0.0 { hnorm } else { t }
            };
            if h[(lo, lo - 1)].norm() <= eps * tst {
                h[(lo, lo - 1)] = C64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            if hi == 0 {
                break;
            }
            hi -= 1;
            stagnation = 0;
            continue;
        }

        total_iters += 1;
        stagnation += 1;
        if total_iters > max_total {
            return Err(Error::NonConvergence {
                residual: h[(hi, hi - 1)].norm() / hnorm,
            });
        }

        // Wilkinson shift from the trailing 2x2, exceptional shift when stuck.
        let shift = if stagnation % 12 == 0 {
            C64::new(
                h[(hi, hi - 1)].norm()
                    + if hi >= 2 { h[(hi - 1, hi - 2)].norm() } else { 0.0 },
                0.0,
            )
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        for i in lo..=hi {
            h[(i, i)] -= shift;
        }

        // Row pass: left rotations build R in place.
        let right_edge = if full { n } else { hi + 1 };
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            cs[k] = (c, s);
            let (top, bot) = h.row_pair_mut(k, k + 1);
            for (a, b) in top[k..right_edge].iter_mut().zip(&mut bot[k..right_edge]) {
                let ta = *a;
                *a = c * ta + s * *b;
                *b = -s.conj() * ta + c * *b;
            }
        }
        // Column pass: right rotations form RQ^dagger, batched per row.
        let row_top = if full { 0 } else { lo };
        for r in row_top..=hi {
            let kmin = if r > lo { (r - 1).max(lo) } else { lo };
            let row = h.row_mut(r);
            for k in kmin..hi {
                let (c, s) = cs[k];
                let a = row[k];
                let b = row[k + 1];
                row[k] = a * c + b * s.conj();
                row[k + 1] = -a * s + b * c;
            }
        }
        if let Some(z) = z.as_deref_mut() {
            for r in 0..n {
                let row = z.row_mut(r);
                for k in lo..hi {
                    let (c, s) = cs[k];
                    let a = row[k];
                    let b = row[k + 1];
                    row[k] = a * c + b * s.conj();
                    row[k + 1] = -a * s + b * c;
                }
            }
        }
        for i in lo..=hi {
            h[(i, i)] += shift;
        }
    }
    Ok(())
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    let r1 = 0.5 * (tr + disc);
    let r2 = 0.5 * (tr - disc);
    if (r1 - d).norm() <= (r2 - d).norm() {
        r1
    } else {
        r2
    }
}

/// Right eigenvectors of the triangular Schur factor, transformed back by
/// `Z` and normalized.  Near-degenerate diagonals are perturbed by an
/// ulp-sized amount so the back-substitution stays finite; the resulting
/// near-parallel vectors are exactly what the coalescence flag reports.
fn triangular_eigenvectors(t: &ComplexMatrix, z: &ComplexMatrix) -> Vec<Vec<C64>> {
    let n = t.rows();
    let tnorm = t.norm_one().max(f64::MIN_POSITIVE);
    let smin = f64::EPSILON * tnorm;
    let mut out = Vec::with_capacity(n);
    let mut y = vec![C64::new(0.0, 0.0); n];
    for i in 0..n {
        let lam = t[(i, i)];
        for e in y.iter_mut() {
            *e = C64::new(0.0, 0.0);
        }
        y[i] = C64::new(1.0, 0.0);
        for j in (0..i).rev() {
            let mut s = C64::new(0.0, 0.0);
            for k in j + 1..=i {
                s += t[(j, k)] * y[k];
            }
            let mut den = t[(j, j)] - lam;
            if den.norm() < smin {
                den = C64::new(smin, 0.0);
            }
            y[j] = -s / den;
            let m = y[j].norm();
            if m > 1e100 {
                let inv = C64::new(1e-100, 0.0);
                for e in y[j..=i].iter_mut() {
                    *e *= inv;
                }
            }
        }
        // x = Z y over the leading i+1 components.
        let mut x = vec![C64::new(0.0, 0.0); n];
        for (r, xe) in x.iter_mut().enumerate() {
            *xe = z.row(r)[..=i].iter().zip(&y[..=i]).map(|(a, b)| a * b).sum();
        }
        normalize_phase(&mut x);
        out.push(x);
    }
    out
}

/// Scale to unit norm and rotate so the first non-negligible component is
/// real and positive (the crate-wide phase convention).
pub fn normalize_phase(x: &mut [C64]) {
    let norm = vec_norm(x);
    if norm > 0.0 {
        vec_scale(x, C64::new(1.0 / norm, 0.0));
    }
    let cutoff = 1e-12 * vec_max_abs(x);
    if let Some(first) = x.iter().find(|z| z.norm() > cutoff) {
        let phase = first.conj() / first.norm();
        vec_scale(x, phase);
    }
}

/// `|<u|v>|` for unit vectors; 1 means parallel (coalesced) directions.
pub fn overlap(u: &[C64], v: &[C64]) -> f64 {
    vec_dot(u, v).norm() / (vec_norm(u) * vec_norm(v))
}

/// Numerical rank of the matrix whose columns are the given vectors, from a
/// QR-style pivoted Gram-Schmidt with the given relative tolerance.
pub fn vector_rank(vectors: &[Vec<C64>], rtol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let scale = vectors
        .iter()
        .map(|v| vec_norm(v))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    for v in vectors {
        let mut w = v.clone();
        for b in &basis {
            let proj = vec_dot(b, &w);
            for (we, be) in w.iter_mut().zip(b) {
                *we -= proj * be;
            }
        }
        // second orthogonalization pass for numerical safety
        for b in &basis {
            let proj = vec_dot(b, &w);
            for (we, be) in w.iter_mut().zip(b) {
                *we -= proj * be;
            }
        }
        let norm = vec_norm(&w);
        if norm > rtol * scale {
            vec_scale(&mut w, C64::new(1.0 / norm, 0.0));
            basis.push(w);
        }
    }
    basis.len()
}
