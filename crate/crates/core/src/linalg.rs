//! Dense vectors and matrices over a [`Real`] scalar.
//!
//! The Hilbert space is instantiated as `R^n` with the Euclidean inner
//! product, so the adjoint of a matrix is its transpose. Everything here is
//! small and dense: the problems this crate targets have `n <= 10`.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{DsmError, Result};
use crate::scalar::Real;

/// Element of `R^n`.
#[derive(Clone, PartialEq, Default)]
pub struct Vector<T> {
    entries: Vec<T>,
}

impl<T: Real> Vector<T> {
    /// Builds a vector, rejecting empty input and non-finite entries.
    pub fn new(entries: Vec<T>) -> Result<Self> {
        if entries.is_empty() {
            return Err(DsmError::DimensionMismatch {
                context: "Vector::new",
                expected: 1,
                got: 0,
            });
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(DsmError::NonFiniteInput {
                context: "Vector::new",
            });
        }
        Ok(Self { entries })
    }

    /// Builds a vector from `f64` literals. Panics on non-finite input.
    pub fn from_f64(entries: &[f64]) -> Self {
        Self::new(entries.iter().map(|&x| T::lit(x)).collect()).expect("finite literal vector")
    }

    /// Wraps raw storage without validation. Used on hot paths where the
    /// caller checks finiteness separately.
    pub(crate) fn from_raw(entries: Vec<T>) -> Self {
        Self { entries }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            entries: vec![T::zero(); n],
        }
    }

    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.entries[i] = T::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<T> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.entries.iter()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|x| x.is_finite())
    }

    pub fn dot(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim(), other.dim());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| a * b)
            .sum()
    }

    /// Euclidean norm, computed with scaling so that tiny and huge entries
    /// do not underflow or overflow.
    pub fn norm(&self) -> T {
        let scale = self
            .entries
            .iter()
            .fold(T::zero(), |m, x| m.max(x.abs()));
        if scale == T::zero() {
            return T::zero();
        }
        let sum: T = self
            .entries
            .iter()
            .map(|&x| {
                let s = x / scale;
                s * s
            })
            .sum();
        scale * sum.sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_raw(self.entries.iter().map(|&x| x * s).collect())
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: T, other: &Self) -> Self {
        debug_assert_eq!(self.dim(), other.dim());
        Self::from_raw(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| a + s * b)
                .collect(),
        )
    }

    pub fn distance(&self, other: &Self) -> T {
        (self - other).norm()
    }

    /// Unit vector in the direction of `self`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        (n > T::zero()).then(|| self.scale(T::one() / n))
    }
}

impl<T> From<Vec<T>> for Vector<T> {
    /// Unchecked conversion, meant for the outputs of user-supplied maps;
    /// finiteness is enforced where those outputs enter the solvers.
    fn from(entries: Vec<T>) -> Self {
        Self { entries }
    }
}

impl<T> Index<usize> for Vector<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.entries[i]
    }
}

impl<T> IndexMut<usize> for Vector<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.entries[i]
    }
}

impl<T: Real> Add for &Vector<T> {
    type Output = Vector<T>;
    fn add(self, rhs: Self) -> Vector<T> {
        self.axpy(T::one(), rhs)
    }
}

impl<T: Real> Sub for &Vector<T> {
    type Output = Vector<T>;
    fn sub(self, rhs: Self) -> Vector<T> {
        self.axpy(-T::one(), rhs)
    }
}

impl<T: Real> Neg for &Vector<T> {
    type Output = Vector<T>;
    fn neg(self) -> Vector<T> {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul<T> for &Vector<T> {
    type Output = Vector<T>;
    fn mul(self, rhs: T) -> Vector<T> {
        self.scale(rhs)
    }
}

impl<T: fmt::Debug> fmt::Debug for Vector<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.entries).finish()
    }
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(DsmError::DimensionMismatch {
                context: "Matrix::new",
                expected: rows * cols,
                got: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(DsmError::NonFiniteInput {
                context: "Matrix::new",
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested `f64` rows. Panics on ragged or
    /// non-finite input.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let data = rows.iter().flat_map(|row| row.iter().map(|&x| T::lit(x))).collect();
        Self::new(r, c, data).expect("finite literal matrix")
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, vec![T::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[Vector<T>]) -> Self {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vector::dim);
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            for i in 0..rows {
                m[(i, j)] = c[i];
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn column(&self, j: usize) -> Vector<T> {
        Vector::from_raw((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `A x`.
    pub fn matvec(&self, x: &Vector<T>) -> Vector<T> {
        debug_assert_eq!(self.cols, x.dim());
        Vector::from_raw(
            self.data
                .chunks_exact(self.cols)
                .map(|row| row.iter().zip(x.iter()).map(|(&a, &b)| a * b).sum())
                .collect(),
        )
    }

    /// `A^T x`, without forming the transpose.
    pub fn tr_matvec(&self, x: &Vector<T>) -> Vector<T> {
        debug_assert_eq!(self.rows, x.dim());
        let mut out = vec![T::zero(); self.cols];
        for (row, &xi) in self.data.chunks_exact(self.cols).zip(x.iter()) {
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a * xi;
            }
        }
        Vector::from_raw(out)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// `A^T A`.
    pub fn gram(&self) -> Self {
        self.transpose().matmul(self)
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|&x| x * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_raw(
            self.rows,
            self.cols,
            self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-T::one()))
    }

    pub fn frobenius_norm(&self) -> T {
        Vector::from_raw(self.data.clone()).norm()
    }

    /// Spectral norm (largest singular value) by power iteration on `A^T A`.
    ///
    /// Relative tolerance `1e-10` on the Rayleigh quotient, at most `10^4`
    /// sweeps. The estimate approaches the true norm from below.
    pub fn spectral_norm(&self) -> T {
        self.spectral_norm_with(T::tol(1e-10), 10_000)
    }

    pub fn spectral_norm_with(&self, tol: T, max_iter: usize) -> T {
        // Start from the column of largest norm pushed through A^T A, which
        // is never orthogonal to the dominant right singular vector unless A
        // is zero.
        let (best, best_norm) = (0..self.cols)
            .map(|j| (j, self.column(j).norm()))
            .fold((0, T::zero()), |acc, c| if c.1 > acc.1 { c } else { acc });
        if best_norm == T::zero() {
            return T::zero();
        }
        let mut x = Vector::basis(self.cols, best);
        let mut sigma_sq = best_norm * best_norm;
        for _ in 0..max_iter {
            let y = self.tr_matvec(&self.matvec(&x));
            let Some(next) = y.normalized() else {
                return T::zero();
            };
            let ax = self.matvec(&next);
            let next_sq = ax.dot(&ax);
            x = next;
            let done = (next_sq - sigma_sq).abs() <= tol * next_sq;
            sigma_sq = sigma_sq.max(next_sq);
            if done {
                break;
            }
        }
        sigma_sq.sqrt()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = self.data.chunks(self.cols.max(1)).collect();
        f.debug_struct("Matrix")
            .field("rows", &self.rows)
            .field("cols", &self.cols)
            .field("data", &rows)
            .finish()
    }
}

/// Householder QR factorization of a tall matrix (`rows >= cols`).
///
/// Stores the reflectors compactly; `R` is the upper `cols x cols` block.
#[derive(Debug, Clone)]
pub struct HouseholderQr<T> {
    rows: usize,
    cols: usize,
    /// Reflector `k` acts on rows `k..rows`; entry 0 is implicitly 1.
    reflectors: Vec<Vec<T>>,
    betas: Vec<T>,
    r: Matrix<T>,
}

impl<T: Real> HouseholderQr<T> {
    pub fn new(a: &Matrix<T>) -> Self {
        let (rows, cols) = (a.rows(), a.cols());
        assert!(rows >= cols, "QR requires rows >= cols");
        let mut work = a.clone();
        let mut reflectors = Vec::with_capacity(cols);
        let mut betas = Vec::with_capacity(cols);
        for k in 0..cols {
            let x = Vector::from_raw((k..rows).map(|i| work[(i, k)]).collect());
            let norm_x = x.norm();
            if norm_x == T::zero() {
                reflectors.push(vec![T::zero(); rows - k]);
                betas.push(T::zero());
                continue;
            }
            let x0 = x[0];
            let alpha = if x0 >= T::zero() { -norm_x } else { norm_x };
            // v = x - alpha e1, scaled so that v[0] = 1.
            let v0 = x0 - alpha;
            let mut v: Vec<T> = x.iter().map(|&xi| xi / v0).collect();
            v[0] = T::one();
            let vtv: T = v.iter().map(|&vi| vi * vi).sum();
            let beta = T::lit(2.0) / vtv;
            for j in k..cols {
                let s: T = (k..rows).map(|i| v[i - k] * work[(i, j)]).sum();
                let s = s * beta;
                for i in k..rows {
                    let vi = v[i - k];
                    work[(i, j)] -= s * vi;
                }
            }
            work[(k, k)] = alpha;
            for i in (k + 1)..rows {
                work[(i, k)] = T::zero();
            }
            reflectors.push(v);
            betas.push(beta);
        }
        let mut r = Matrix::zeros(cols, cols);
        for i in 0..cols {
            for j in i..cols {
                r[(i, j)] = work[(i, j)];
            }
        }
        Self {
            rows,
            cols,
            reflectors,
            betas,
            r,
        }
    }

    pub fn r(&self) -> &Matrix<T> {
        &self.r
    }

    /// `Q^T b` for a vector of length `rows`.
    pub fn apply_qt(&self, b: &Vector<T>) -> Vector<T> {
        debug_assert_eq!(b.dim(), self.rows);
        let mut out = b.clone();
        for (k, (v, &beta)) in self.reflectors.iter().zip(&self.betas).enumerate() {
            if beta == T::zero() {
                continue;
            }
            let s: T = v.iter().enumerate().map(|(i, &vi)| vi * out[k + i]).sum();
            let s = s * beta;
            for (i, &vi) in v.iter().enumerate() {
                out[k + i] -= s * vi;
            }
        }
        out
    }

    /// Solves `R x = b` by back substitution.
    pub fn solve_r(&self, b: &Vector<T>) -> Vector<T> {
        let n = self.cols;
        let mut x = vec![T::zero(); n];
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in (i + 1)..n {
                s -= self.r[(i, j)] * x[j];
            }
            x[i] = s / self.r[(i, i)];
        }
        Vector::from_raw(x)
    }

    /// Solves `R^T x = b` by forward substitution.
    pub fn solve_rt(&self, b: &Vector<T>) -> Vector<T> {
        let n = self.cols;
        let mut x = vec![T::zero(); n];
        for i in 0..n {
            let mut s = b[i];
            for j in 0..i {
                s -= self.r[(j, i)] * x[j];
            }
            x[i] = s / self.r[(i, i)];
        }
        Vector::from_raw(x)
    }
}
