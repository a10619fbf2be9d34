//! Dense complex matrices and vectors, row-major storage.
//!
//! This is the carrier type for operators, density matrices and
//! superoperators throughout the crate.  Only the operations the rest of the
//! crate actually needs are implemented; no attempt is made at a general
//! linear-algebra library.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

pub type C64 = Complex64;
pub type ComplexVector = Vec<C64>;

/// Dense `rows x cols` complex matrix, entries stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    /// Build from nested rows; panics if the rows are ragged.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        ComplexMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    /// Reinterpret a flat vector as a matrix; the length must match.
    pub fn from_data(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(rows * cols, data.len(), "entry count must equal rows*cols");
        ComplexMatrix { rows, cols, data }
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [C64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Two row slices at once, `i != j`.
    pub fn row_pair_mut(&mut self, i: usize, j: usize) -> (&mut [C64], &mut [C64]) {
        assert!(i != j);
        let c = self.cols;
        let (lo, hi) = (i.min(j), i.max(j));
        let (head, tail) = self.data.split_at_mut(hi * c);
        let a = &mut head[lo * c..lo * c + c];
        let b = &mut tail[..c];
        if i < j { (a, b) } else { (b, a) }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut sums = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (j, z) in self.row(i).iter().enumerate() {
                sums[j] += z.norm();
            }
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hermiticity defect `max|A - A^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermiticity_defect() <= tol * self.max_abs().max(1e-300)
    }

    /// Replace by the Hermitian part `(A + A^dagger)/2`.
    pub fn hermitize(&mut self) {
        assert!(self.is_square());
        for i in 0..self.rows {
            for j in i..self.cols {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)].conj());
                self[(i, j)] = avg;
                self[(j, i)] = avg.conj();
            }
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Matrix product, cache-friendly (ikj loop order over row slices).
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must match");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let arow = self.row(i);
            // split indexing so the compiler sees disjoint slices
            let orow = out.row_mut(i);
            for (k, &aik) in arow.iter().enumerate() {
                if aik.re == 0.0 && aik.im == 0.0 {
                    continue;
                }
                let brow = other.row(k);
                for (o, &bkj) in orow.iter_mut().zip(brow) {
                    *o += aik * bkj;
                }
            }
        }
        out
    }

    /// Kronecker product, `(A kron B)[(i1*rb+i2),(j1*cb+j2)] = A[i1,j1]*B[i2,j2]`.
    pub fn kron(&self, other: &Self) -> Self {
        let (ra, ca) = (self.rows, self.cols);
        let (rb, cb) = (other.rows, other.cols);
        let mut out = Self::zeros(ra * rb, ca * cb);
        for i1 in 0..ra {
            for j1 in 0..ca {
                let a = self[(i1, j1)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for i2 in 0..rb {
                    let dst = &mut out.data
                        [(i1 * rb + i2) * ca * cb + j1 * cb..(i1 * rb + i2) * ca * cb + j1 * cb + cb];
                    for (d, &b) in dst.iter_mut().zip(other.row(i2)) {
                        *d = a * b;
                    }
                }
            }
        }
        out
    }

    /// Require a square matrix with finite entries.
    pub fn check_square_finite(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "expected square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        if self.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
        }
        Ok(())
    }

    /// Submatrix given by row/column index lists (used for sector blocks).
    pub fn select(&self, row_idx: &[usize], col_idx: &[usize]) -> Self {
        Self::from_fn(row_idx.len(), col_idx.len(), |i, j| self[(row_idx[i], col_idx[j])])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Mul<C64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: C64) -> ComplexMatrix {
        self.scale(rhs)
    }
}

impl std::fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        let show = self.rows.min(8);
        for i in 0..show {
            write!(f, "  ")?;
            for j in 0..self.cols.min(8) {
                let z = self[(i, j)];
                write!(f, "{:+.3e}{:+.3e}i ", z.re, z.im)?;
            }
            writeln!(f, "{}", if self.cols > 8 { "..." } else { "" })?;
        }
        if self.rows > show {
            writeln!(f, "  ...")?;
        }
        write!(f, "]")
    }
}

/// Euclidean norm of a complex vector.
pub fn vec_norm(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Inner product `<x|y>` (conjugate-linear in the first argument).
pub fn vec_dot(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_scale(x: &mut [C64], s: C64) {
    for z in x {
        *z *= s;
    }
}

/// Largest entry magnitude of a vector.
pub fn vec_max_abs(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
