use serde::{Deserialize, Serialize};

use crate::error::{DsmError, Result};
use crate::linalg::Vector;
use crate::problem::{Problem, SmoothnessBounds};
use crate::scalar::Real;

/// How the shift element `z` in the flow is chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum ZPolicy<T> {
    Explicit(Vector<T>),
    /// Benchmark mode: `z = y - F'(y)^T F'(y) v` for the supplied `v`, so that
    /// `y - z` lies in the range of `F'(y)^T F'(y)`.
    FromV(Vector<T>),
    /// `z = u0`. The convergence guarantee does not formally cover this choice.
    EqualU0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZPolicyKind {
    Explicit,
    FromV,
    EqualU0,
}

impl<T> ZPolicy<T> {
    pub fn kind(&self) -> ZPolicyKind {
        match self {
            ZPolicy::Explicit(_) => ZPolicyKind::Explicit,
            ZPolicy::FromV(_) => ZPolicyKind::FromV,
            ZPolicy::EqualU0 => ZPolicyKind::EqualU0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverConfig<T> {
    pub z_policy: ZPolicy<T>,
    /// Constant in the error envelope `sqrt(a(t)) / lambda`.
    pub lambda: T,
    /// Step factor of the discrete iteration, in `(0, 1)`.
    pub h: T,
    /// Target geometric ratio of the discrete iteration, in `(0, 1)`.
    pub q: T,
    pub t_max: T,
    pub n_max: usize,
    pub residual_tol: T,
    /// RK4 step.
    pub dt: T,
    /// Smoothness bounds used to certify hypotheses; `None` leaves every
    /// bound-dependent hypothesis uncertified.
    pub bounds: Option<SmoothnessBounds<T>>,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            z_policy: ZPolicy::EqualU0,
            lambda: T::one(),
            h: T::lit(0.5),
            q: T::lit(0.9),
            t_max: T::lit(1e3),
            n_max: 1000,
            residual_tol: T::lit(1e-6),
            dt: T::lit(0.01),
            bounds: None,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    /// Checks the structural invariants `0 < h < 1`, `0 < q < 1`, `q + h > 1`
    /// and positivity of the remaining scalars.
    pub fn validate(&self) -> Result<()> {
        let (zero, one) = (T::zero(), T::one());
        let fail = |msg: String| Err(DsmError::InvalidConfig(msg));
        if !(self.h > zero && self.h < one) {
            return fail(format!("h must lie in (0, 1), got {}", self.h));
        }
        if !(self.q > zero && self.q < one) {
            return fail(format!("q must lie in (0, 1), got {}", self.q));
        }
        if !(self.q + self.h > one) {
            return fail(format!("q + h must exceed 1, got {}", self.q + self.h));
        }
        for (name, v) in [
            ("lambda", self.lambda),
            ("t_max", self.t_max),
            ("residual_tol", self.residual_tol),
            ("dt", self.dt),
        ] {
            if !(v > zero) || !v.is_finite() {
                return fail(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.n_max == 0 {
            return fail("n_max must be positive".into());
        }
        Ok(())
    }

    /// The source element `v`, when the policy supplies one.
    pub fn v(&self) -> Option<&Vector<T>> {
        match &self.z_policy {
            ZPolicy::FromV(v) => Some(v),
            _ => None,
        }
    }

    /// Resolves the shift element `z` for `problem`.
    pub fn resolve_z(&self, problem: &Problem<T>) -> Result<Vector<T>> {
        let n = problem.dim_domain();
        let z = match &self.z_policy {
            ZPolicy::Explicit(z) => z.clone(),
            ZPolicy::EqualU0 => problem.u0().clone(),
            ZPolicy::FromV(v) => {
                let y = problem.known_solution().ok_or(DsmError::MissingOracle)?;
                if v.dim() != n {
                    return Err(DsmError::DimensionMismatch {
                        context: "source element v",
                        expected: n,
                        got: v.dim(),
                    });
                }
                let jy = problem.jacobian(y)?;
                let tv = jy.tr_matvec(&jy.matvec(v));
                y - &tv
            }
        };
        if z.dim() != n {
            return Err(DsmError::DimensionMismatch {
                context: "shift element z",
                expected: n,
                got: z.dim(),
            });
        }
        if !z.is_finite() {
            return Err(DsmError::NonFiniteInput { context: "shift element z" });
        }
        Ok(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    #[test]
    fn validates_step_and_ratio() {
        let mut c = SolverConfig::<f64>::default();
        assert!(c.validate().is_ok());
        c.h = 1.0;
        assert!(c.validate().is_err());
        c.h = 0.05;
        assert!(c.validate().is_err(), "q + h <= 1 must be rejected");
        c.h = 0.5;
        c.q = 1.0;
        assert!(c.validate().is_err());
        c.q = 0.9;
        c.dt = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn z_from_v_uses_range_of_normal_operator() {
        let p = Problem::new(2, Vector::from_f64(&[0.3, 0.2]), 1.0, |u: &Vector<f64>| {
            vec![u[0], u[0] * u[1]].into()
        })
        .unwrap()
        .with_jacobian(|u| Matrix::from_rows(&[&[1.0, 0.0], &[u[1], u[0]]]))
        .with_known_solution(Vector::from_f64(&[0.0, 0.0]))
        .unwrap();
        let c = SolverConfig {
            z_policy: ZPolicy::FromV(Vector::from_f64(&[0.1, 0.1])),
            ..Default::default()
        };
        // F'(y)^T F'(y) = diag(1, 0).
        assert_eq!(c.resolve_z(&p).unwrap(), Vector::from_f64(&[-0.1, 0.0]));
        let c = SolverConfig::<f64>::default();
        assert_eq!(c.resolve_z(&p).unwrap(), Vector::from_f64(&[0.3, 0.2]));
    }
}
