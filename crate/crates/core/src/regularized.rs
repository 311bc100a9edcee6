//! Solves with the regularized normal operator `T_a = A^T A + a I`.
//!
//! `T_a` is never formed. Both entry points factor the augmented matrix
//! `[A; sqrt(a) I] = Q R`, so that `R^T R = T_a` while `R` carries only the
//! square root of the condition number of `T_a`.

use crate::error::{DsmError, Result};
use crate::linalg::{HouseholderQr, Matrix, Vector};
use crate::scalar::Real;

/// Factorization of `T_a` for a fixed `A` and `a > 0`.
#[derive(Debug, Clone)]
pub struct RegularizedNormal<T> {
    a: Matrix<T>,
    reg: T,
    qr: HouseholderQr<T>,
}

impl<T: Real> RegularizedNormal<T> {
    pub fn new(a: &Matrix<T>, reg: T) -> Result<Self> {
        if !(reg > T::zero()) || !reg.is_finite() {
            return Err(DsmError::DegenerateRegularization(reg.to_f64_lossy()));
        }
        if !a.is_finite() {
            return Err(DsmError::NonFiniteInput {
                context: "regularized operator",
            });
        }
        let (m, n) = (a.rows(), a.cols());
        let sqrt_reg = reg.sqrt();
        let mut aug = Matrix::zeros(m + n, n);
        for i in 0..m {
            for j in 0..n {
                aug[(i, j)] = a[(i, j)];
            }
        }
        for j in 0..n {
            aug[(m + j, j)] = sqrt_reg;
        }
        Ok(Self {
            a: a.clone(),
            reg,
            qr: HouseholderQr::new(&aug),
        })
    }

    pub fn regularization(&self) -> T {
        self.reg
    }

    /// `T_a x`, evaluated as `A^T (A x) + a x`.
    pub fn apply(&self, x: &Vector<T>) -> Vector<T> {
        self.a.tr_matvec(&self.a.matvec(x)).axpy(self.reg, x)
    }

    /// `T_a^{-1} rhs` via two triangular solves plus one refinement sweep.
    pub fn solve(&self, rhs: &Vector<T>) -> Result<Vector<T>> {
        check_dim("regularized_solve", self.a.cols(), rhs)?;
        let mut x = self.qr.solve_r(&self.qr.solve_rt(rhs));
        let residual = rhs - &self.apply(&x);
        let correction = self.qr.solve_r(&self.qr.solve_rt(&residual));
        x = &x + &correction;
        finite(x, "regularized_solve")
    }

    /// `T_a^{-1} A^T w`, the minimizer of `|A x - w|^2 + a |x|^2`, followed
    /// by one refinement sweep on the normal equations.
    pub fn pullback(&self, w: &Vector<T>) -> Result<Vector<T>> {
        let m = self.a.rows();
        let n = self.a.cols();
        check_dim("regularized_pullback", m, w)?;
        let mut padded = vec![T::zero(); m + n];
        padded[..m].copy_from_slice(w.as_slice());
        let qtb = self.qr.apply_qt(&Vector::from_raw(padded));
        let top = Vector::from_raw(qtb.as_slice()[..n].to_vec());
        let mut x = self.qr.solve_r(&top);
        let residual = &self.a.tr_matvec(w) - &self.apply(&x);
        x = &x + &self.qr.solve_r(&self.qr.solve_rt(&residual));
        debug_assert!(
            x.norm() <= w.norm() / (T::lit(2.0) * self.reg.sqrt()) * (T::one() + T::epsilon() * T::lit(64.0)),
            "pullback bound |T_a^-1 A^T w| <= |w| / (2 sqrt a) violated"
        );
        finite(x, "regularized_pullback")
    }

    /// Explicit `T_a^{-1}` assembled column by column.
    pub fn inverse(&self) -> Result<Matrix<T>> {
        let n = self.a.cols();
        let cols = (0..n)
            .map(|j| self.solve(&Vector::basis(n, j)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_columns(&cols))
    }
}

/// Returns `x` with `(A^T A + a I) x = rhs`.
pub fn regularized_solve<T: Real>(a: &Matrix<T>, reg: T, rhs: &Vector<T>) -> Result<Vector<T>> {
    RegularizedNormal::new(a, reg)?.solve(rhs)
}

/// Returns `(A^T A + a I)^{-1} A^T w`; its norm never exceeds `|w| / (2 sqrt a)`.
pub fn regularized_pullback<T: Real>(a: &Matrix<T>, reg: T, w: &Vector<T>) -> Result<Vector<T>> {
    RegularizedNormal::new(a, reg)?.pullback(w)
}

fn check_dim<T: Real>(context: &'static str, expected: usize, v: &Vector<T>) -> Result<()> {
    if v.dim() != expected {
        return Err(DsmError::DimensionMismatch {
            context,
            expected,
            got: v.dim(),
        });
    }
    if !v.is_finite() {
        return Err(DsmError::NonFiniteInput { context });
    }
    Ok(())
}

fn finite<T: Real>(x: Vector<T>, context: &'static str) -> Result<Vector<T>> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(DsmError::NonFiniteOutput { context })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Dense inverse of a diagonal matrix, independent of the QR path.
    fn diag_inverse_apply(diag: &[f64], rhs: &[f64]) -> Vec<f64> {
        diag.iter().zip(rhs).map(|(d, r)| r / d).collect()
    }

    #[test]
    fn identity_operator() {
        let a = Matrix::<f64>::identity(2);
        let x = regularized_solve(&a, 1.0, &Vector::from_f64(&[2.0, 4.0])).unwrap();
        assert_relative_eq!(x[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(x[1], 2.0, max_relative = 1e-14);
    }

    #[test]
    fn zero_operator_reduces_to_scaling() {
        let a = Matrix::<f64>::zeros(2, 2);
        let x = regularized_solve(&a, 0.5, &Vector::from_f64(&[1.0, 0.0])).unwrap();
        assert_relative_eq!(x[0], 2.0, max_relative = 1e-14);
        assert_eq!(x[1], 0.0);
    }

    #[test]
    fn tall_rank_deficient_matches_dense_oracle() {
        let a = Matrix::<f64>::from_rows(&[&[1.0, 0.0], &[0.0, 2.0], &[0.0, 0.0]]);
        let x = regularized_solve(&a, 0.25, &Vector::from_f64(&[1.0, 1.0])).unwrap();
        let expected = diag_inverse_apply(&[1.25, 4.25], &[1.0, 1.0]);
        assert_relative_eq!(x[0], expected[0], max_relative = 1e-13);
        assert_relative_eq!(x[1], expected[1], max_relative = 1e-13);
        assert_relative_eq!(x[0], 0.8, max_relative = 1e-13);
        assert_relative_eq!(x[1], 0.23529411764705882, max_relative = 1e-13);
    }

    #[test]
    fn rejects_nonpositive_regularization() {
        let a = Matrix::<f64>::identity(1);
        let rhs = Vector::from_f64(&[1.0]);
        assert!(matches!(
            regularized_solve(&a, 0.0, &rhs),
            Err(DsmError::DegenerateRegularization(_))
        ));
        assert!(matches!(
            regularized_pullback(&a, -1.0, &rhs),
            Err(DsmError::DegenerateRegularization(_))
        ));
    }

    #[test]
    fn pullback_equality_case() {
        let a = Matrix::<f64>::from_rows(&[&[1.0]]);
        let x = regularized_pullback(&a, 1.0, &Vector::from_f64(&[1.0])).unwrap();
        assert_eq!(x[0], 0.5);
    }

    #[test]
    fn pullback_scalar_formula() {
        let a = Matrix::<f64>::from_rows(&[&[3.0]]);
        let x = regularized_pullback(&a, 4.0, &Vector::from_f64(&[1.0])).unwrap();
        assert_relative_eq!(x[0], 3.0 / 13.0, max_relative = 1e-14);
        assert!(x[0] <= 0.25);
    }

    #[test]
    fn pullback_of_zero_operator_vanishes() {
        let a = Matrix::<f64>::zeros(3, 2);
        let x = regularized_pullback(&a, 0.7, &Vector::from_f64(&[1.0, -2.0, 5.0])).unwrap();
        assert_eq!(x.norm(), 0.0);
    }

    #[test]
    fn dimension_errors() {
        let a = Matrix::<f64>::zeros(3, 2);
        assert!(matches!(
            regularized_solve(&a, 1.0, &Vector::from_f64(&[1.0, 2.0, 3.0])),
            Err(DsmError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            regularized_pullback(&a, 1.0, &Vector::from_f64(&[1.0, 2.0])),
            Err(DsmError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn works_in_single_precision() {
        let a = Matrix::<f32>::from_rows(&[&[1.0, 0.0], &[0.0, 2.0], &[0.0, 0.0]]);
        let x = regularized_solve(&a, 0.25f32, &Vector::from_f64(&[1.0, 1.0])).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-6);
    }
}
