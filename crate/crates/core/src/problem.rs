//! Nonlinear problems `F(u) = 0` on `R^n`, their Jacobians, and estimates of
//! the local smoothness constants `M0`, `M1`, `M2` over the ball `B(u0, R)`.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{DsmError, Result};
use crate::linalg::{Matrix, Vector};
use crate::scalar::Real;

pub type MapFn<T> = Arc<dyn Fn(&Vector<T>) -> Vector<T> + Send + Sync>;
pub type JacobianFn<T> = Arc<dyn Fn(&Vector<T>) -> Matrix<T> + Send + Sync>;

/// A map `F: R^n -> R^m` together with its domain ball and, in benchmark
/// mode, a known zero `y`.
#[derive(Clone)]
pub struct Problem<T> {
    eval: MapFn<T>,
    jacobian: Option<JacobianFn<T>>,
    u0: Vector<T>,
    radius: T,
    known_solution: Option<Vector<T>>,
    dim_domain: usize,
    dim_range: usize,
}

impl<T: Real> Problem<T> {
    pub fn new<F>(dim_range: usize, u0: Vector<T>, radius: T, eval: F) -> Result<Self>
    where
        F: Fn(&Vector<T>) -> Vector<T> + Send + Sync + 'static,
    {
        if dim_range == 0 {
            return Err(DsmError::InvalidConfig("range dimension must be positive".into()));
        }
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(DsmError::InvalidConfig(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        if !u0.is_finite() {
            return Err(DsmError::NonFiniteInput { context: "Problem::new" });
        }
        Ok(Self {
            eval: Arc::new(eval),
            jacobian: None,
            dim_domain: u0.dim(),
            u0,
            radius,
            known_solution: None,
            dim_range,
        })
    }

    /// Attaches an analytic Jacobian; without one, central differences are used.
    pub fn with_jacobian<J>(mut self, jacobian: J) -> Self
    where
        J: Fn(&Vector<T>) -> Matrix<T> + Send + Sync + 'static,
    {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    /// Drops the analytic Jacobian, forcing the finite-difference path.
    pub fn without_jacobian(mut self) -> Self {
        self.jacobian = None;
        self
    }

    /// Attaches a known zero `y`, checking `|F(y)| <= 1e-10 max(1, |y|)` and
    /// `|F'(y)| > 1e-12`.
    pub fn with_known_solution(mut self, y: Vector<T>) -> Result<Self> {
        check_dim("known solution", self.dim_domain, &y)?;
        let fy = self.evaluate(&y)?;
        let scale = T::one().max(y.norm());
        if fy.norm() > T::tol(1e-10) * scale {
            return Err(DsmError::InvalidConfig(format!(
                "known solution is not a zero: |F(y)| = {:e}",
                fy.norm()
            )));
        }
        let jn = self.jacobian(&y)?.spectral_norm();
        if !(jn > T::lit(1e-12)) {
            return Err(DsmError::InvalidConfig(
                "F'(y) vanishes at the known solution".into(),
            ));
        }
        self.known_solution = Some(y);
        Ok(self)
    }

    /// Same map and solution, new initial point.
    pub fn with_start(mut self, u0: Vector<T>) -> Result<Self> {
        check_dim("initial point", self.dim_domain, &u0)?;
        self.u0 = u0;
        Ok(self)
    }

    pub fn with_radius(mut self, radius: T) -> Result<Self> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(DsmError::InvalidConfig(format!("invalid radius {radius}")));
        }
        self.radius = radius;
        Ok(self)
    }

    pub fn u0(&self) -> &Vector<T> {
        &self.u0
    }

    pub fn radius(&self) -> T {
        self.radius
    }

    pub fn known_solution(&self) -> Option<&Vector<T>> {
        self.known_solution.as_ref()
    }

    pub fn dim_domain(&self) -> usize {
        self.dim_domain
    }

    pub fn dim_range(&self) -> usize {
        self.dim_range
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    /// `F(u)`; fails rather than returning non-finite entries.
    pub fn evaluate(&self, u: &Vector<T>) -> Result<Vector<T>> {
        check_dim("evaluate", self.dim_domain, u)?;
        let out = (self.eval)(u);
        if out.dim() != self.dim_range {
            return Err(DsmError::DimensionMismatch {
                context: "evaluate (output)",
                expected: self.dim_range,
                got: out.dim(),
            });
        }
        if !out.is_finite() {
            return Err(DsmError::NonFiniteOutput { context: "F(u)" });
        }
        Ok(out)
    }

    /// `F'(u)`, analytic when available, otherwise central differences with
    /// step `cbrt(eps) * max(1, |u_i|)` per coordinate.
    pub fn jacobian(&self, u: &Vector<T>) -> Result<Matrix<T>> {
        check_dim("jacobian", self.dim_domain, u)?;
        let jac = match &self.jacobian {
            Some(j) => {
                let m = j(u);
                if (m.rows(), m.cols()) != (self.dim_range, self.dim_domain) {
                    return Err(DsmError::DimensionMismatch {
                        context: "jacobian (output)",
                        expected: self.dim_range * self.dim_domain,
                        got: m.rows() * m.cols(),
                    });
                }
                m
            }
            None => self.finite_difference_jacobian(u)?,
        };
        if !jac.is_finite() {
            return Err(DsmError::NonFiniteOutput { context: "F'(u)" });
        }
        Ok(jac)
    }

    pub fn finite_difference_jacobian(&self, u: &Vector<T>) -> Result<Matrix<T>> {
        let step_base = T::epsilon().cbrt();
        let columns = (0..self.dim_domain)
            .map(|i| {
                let h = step_base * T::one().max(u[i].abs());
                let mut plus = u.clone();
                let mut minus = u.clone();
                plus[i] += h;
                minus[i] -= h;
                // Use the representable step actually taken.
                let span = plus[i] - minus[i];
                let diff = &self.evaluate(&plus)? - &self.evaluate(&minus)?;
                Ok(diff.scale(T::one() / span))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Matrix::from_columns(&columns))
    }

    /// `|u - u0|`.
    pub fn distance_from_center(&self, u: &Vector<T>) -> T {
        u.distance(&self.u0)
    }

    fn ensure_in_ball(&self, u: &Vector<T>) -> Result<()> {
        let d = self.distance_from_center(u);
        if d > self.radius {
            return Err(DsmError::OutOfBall {
                distance: d.to_f64_lossy(),
                radius: self.radius.to_f64_lossy(),
            });
        }
        Ok(())
    }
}

impl<T: Real> fmt::Debug for Problem<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("u0", &self.u0)
            .field("radius", &self.radius)
            .field("known_solution", &self.known_solution)
            .field("dim_domain", &self.dim_domain)
            .field("dim_range", &self.dim_range)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
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

/// Bounds `|F^(j)(u)| <= M_j` on the domain ball, with the derived
/// constants `c0 = M2 / 4` and `c1 = 2 M1 M2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessBounds<T> {
    pub m0: T,
    pub m1: T,
    pub m2: T,
    pub c0: T,
    pub c1: T,
}

impl<T: Real> SmoothnessBounds<T> {
    pub fn new(m0: T, m1: T, m2: T) -> Result<Self> {
        for (name, v) in [("M0", m0), ("M1", m1), ("M2", m2)] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(DsmError::InvalidConfig(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(Self {
            m0,
            m1,
            m2,
            c0: m2 / T::lit(4.0),
            c1: T::lit(2.0) * m1 * m2,
        })
    }

    /// Multiplies every `M_j` by `factor` and recomputes `c0`, `c1`.
    pub fn inflated(&self, factor: T) -> Result<Self> {
        Self::new(self.m0 * factor, self.m1 * factor, self.m2 * factor)
    }
}

/// Sampled lower estimates of `M0`, `M1`, `M2` over `B(u0, R)`.
///
/// Points are uniform in the ball. The second-derivative estimate is the
/// central quotient `|F'(u + h d) - F'(u - h d)| / (2h)` along one random unit
/// direction per sample. Deterministic for a fixed seed. The true suprema can
/// only be larger, so callers inflate the result (see
/// [`SmoothnessBounds::inflated`]).
pub fn estimate_bounds<T: Real>(
    problem: &Problem<T>,
    samples: usize,
    rng_seed: u64,
) -> Result<SmoothnessBounds<T>> {
    if samples == 0 {
        return Err(DsmError::InvalidConfig("samples must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let n = problem.dim_domain();
    let radius = problem.radius().to_f64_lossy();
    let unit = Uniform::new(0.0f64, 1.0).expect("valid unit interval");
    let h = T::epsilon().sqrt().sqrt();

    let (mut m0, mut m1, mut m2) = (T::zero(), T::zero(), T::zero());
    for _ in 0..samples {
        let dir = random_unit(&mut rng, n);
        let r = radius * unit.sample(&mut rng).powf(1.0 / n as f64);
        let u = problem.u0().axpy(T::lit(r), &dir);
        m0 = m0.max(problem.evaluate(&u)?.norm());
        m1 = m1.max(problem.jacobian(&u)?.spectral_norm());

        let d = random_unit(&mut rng, n);
        let step = h * T::one().max(u.norm());
        let plus = problem.jacobian(&u.axpy(step, &d))?;
        let minus = problem.jacobian(&u.axpy(-step, &d))?;
        let quotient = plus.sub(&minus).spectral_norm() / (T::lit(2.0) * step);
        m2 = m2.max(quotient);
    }
    SmoothnessBounds::new(m0, m1, m2)
}

pub(crate) fn random_unit<T: Real>(rng: &mut ChaCha8Rng, n: usize) -> Vector<T> {
    loop {
        let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return Vector::from_raw(g.into_iter().map(|x| T::lit(x / norm)).collect());
        }
    }
}

/// Norm of the first-order Taylor remainder `F(u) - F(y) - F'(u)(u - y)` and
/// the bound `M2 |u - y|^2 / 2` it must respect.
pub fn taylor_remainder_check<T: Real>(
    problem: &Problem<T>,
    u: &Vector<T>,
    y: &Vector<T>,
    bounds: &SmoothnessBounds<T>,
) -> Result<(T, T)> {
    problem.ensure_in_ball(u)?;
    problem.ensure_in_ball(y)?;
    let w = u - y;
    let lin = problem.jacobian(u)?.matvec(&w);
    let remainder = &(&problem.evaluate(u)? - &problem.evaluate(y)?) - &lin;
    let g = w.norm();
    Ok((remainder.norm(), bounds.m2 * g * g / T::lit(2.0)))
}
