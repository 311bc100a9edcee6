//! Benchmark problems with known zeros, including rank-deficient Jacobians
//! at the solution and non-isolated solution sets.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::{Matrix, Vector};
use crate::problem::{Problem, SmoothnessBounds};
use crate::scalar::Real;

/// Closed-form `(M0, M1, M2)` over the ball `B(center, radius)`.
pub type BoundsFn<T> = Arc<dyn Fn(&Vector<T>, T) -> SmoothnessBounds<T> + Send + Sync>;

#[derive(Clone)]
pub struct CorpusEntry<T> {
    pub id: &'static str,
    pub description: &'static str,
    pub problem: Problem<T>,
    bounds: Option<BoundsFn<T>>,
}

impl<T: Real> CorpusEntry<T> {
    /// Closed-form bounds over the entry's current ball `B(u0, R)`.
    pub fn closed_form_bounds(&self) -> Option<SmoothnessBounds<T>> {
        self.closed_form_bounds_on(self.problem.u0(), self.problem.radius())
    }

    pub fn closed_form_bounds_on(&self, center: &Vector<T>, radius: T) -> Option<SmoothnessBounds<T>> {
        self.bounds.as_ref().map(|b| b(center, radius))
    }

    /// Recenters the domain ball at a new initial point.
    pub fn with_start(mut self, u0: Vector<T>) -> Result<Self> {
        self.problem = self.problem.with_start(u0)?;
        Ok(self)
    }

    pub fn with_radius(mut self, radius: T) -> Result<Self> {
        self.problem = self.problem.with_radius(radius)?;
        Ok(self)
    }
}

impl<T: Real> fmt::Debug for CorpusEntry<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CorpusEntry")
            .field("id", &self.id)
            .field("problem", &self.problem)
            .field("closed_form_bounds", &self.closed_form_bounds())
            .finish()
    }
}

fn bounds<T: Real>(m0: T, m1: T, m2: T) -> SmoothnessBounds<T> {
    SmoothnessBounds::new(m0, m1, m2).expect("closed-form bounds are nonnegative")
}

/// `|center| + radius`, the largest norm in the ball.
fn reach<T: Real>(center: &Vector<T>, radius: T) -> T {
    center.norm() + radius
}

/// P1: `F(u) = u` on `R`, zero at 0.
pub fn linear_scalar<T: Real>() -> Result<CorpusEntry<T>> {
    let problem = Problem::new(1, Vector::from_f64(&[0.4]), T::one(), |u: &Vector<T>| u.clone())?
        .with_jacobian(|_| Matrix::identity(1))
        .with_known_solution(Vector::from_f64(&[0.0]))?;
    Ok(CorpusEntry {
        id: "P1",
        description: "linear scalar F(u) = u; M2 = 0 so every smallness condition is vacuous",
        problem,
        bounds: Some(Arc::new(|c, r| bounds(reach(c, r), T::one(), T::zero()))),
    })
}

/// P2: `F(u) = u + u^3` on `R`, zero at 0. On `B(c, R)` with `r = |c| + R`:
/// `M0 = r + r^3`, `M1 = 1 + 3 r^2`, `M2 = 6 r`.
pub fn cubic_scalar<T: Real>() -> Result<CorpusEntry<T>> {
    let problem = Problem::new(1, Vector::from_f64(&[0.1]), T::lit(0.9), |u: &Vector<T>| {
        vec![u[0] + u[0] * u[0] * u[0]].into()
    })?
    .with_jacobian(|u| Matrix::from_raw(1, 1, vec![T::one() + T::lit(3.0) * u[0] * u[0]]))
    .with_known_solution(Vector::from_f64(&[0.0]))?;
    Ok(CorpusEntry {
        id: "P2",
        description: "scalar cubic F(u) = u + u^3; nonzero curvature, closed-form M1 = 1 + 3R^2, M2 = 6R",
        problem,
        bounds: Some(Arc::new(|c, r| {
            let s = reach(c, r);
            bounds(s + s * s * s, T::one() + T::lit(3.0) * s * s, T::lit(6.0) * s)
        })),
    })
}

/// P3: `F(u1, u2) = (u1, u1 u2)`. Every `(0, c)` is a zero and `F'` has rank
/// one there. The second derivative is the constant bilinear form
/// `(d, e) -> (0, d1 e2 + d2 e1)` of operator norm 1.
pub fn rank_deficient<T: Real>() -> Result<CorpusEntry<T>> {
    let problem = Problem::new(2, Vector::from_f64(&[0.3, 0.2]), T::one(), |u: &Vector<T>| {
        vec![u[0], u[0] * u[1]].into()
    })?
    .with_jacobian(|u| Matrix::from_raw(2, 2, vec![T::one(), T::zero(), u[1], u[0]]))
    .with_known_solution(Vector::from_f64(&[0.0, 0.0]))?;
    Ok(CorpusEntry {
        id: "P3",
        description: "F(u1, u2) = (u1, u1 u2); solution set {u1 = 0}, F'(y) of rank 1 (non-unique zeros)",
        problem,
        bounds: Some(Arc::new(|c, r| {
            let s = reach(c, r);
            let m1 = (T::one() + s * s).sqrt();
            bounds(s * m1, m1, T::one())
        })),
    })
}

/// P4: `F(u) = exp(u) - 1` componentwise on `R^3`, zero at 0. With
/// `s = max_i c_i + R`: `M1 = M2 = e^s` and `M0 <= |F(c)| + M1 R`.
pub fn exponential<T: Real>() -> Result<CorpusEntry<T>> {
    let problem = Problem::new(3, Vector::from_f64(&[0.3, -0.2, 0.1]), T::one(), |u: &Vector<T>| {
        u.iter().map(|&x| x.exp_m1()).collect::<Vec<_>>().into()
    })?
    .with_jacobian(|u| Matrix::diagonal(&u.iter().map(|&x| x.exp()).collect::<Vec<_>>()))
    .with_known_solution(Vector::from_f64(&[0.0, 0.0, 0.0]))?;
    Ok(CorpusEntry {
        id: "P4",
        description: "F(u) = exp(u) - 1 componentwise; M_j grow exponentially with the ball radius",
        problem,
        bounds: Some(Arc::new(|c, r| {
            let top = c.iter().fold(T::neg_infinity(), |m, &x| m.max(x)) + r;
            let m1 = top.exp();
            let fc: Vector<T> = c.iter().map(|&x| x.exp_m1()).collect::<Vec<_>>().into();
            bounds(fc.norm() + m1 * r, m1, m1)
        })),
    })
}

/// Seed of the random quadratic map P5.
pub const QUADRATIC_SEED: u64 = 0x5eed_0005;

/// P5: `F(u) = B u + Q(u, u)` on `R^3` with `B` of rank 2 and `Q` a symmetric
/// quadratic form, all drawn from a fixed seed; zero at 0.
pub fn random_quadratic<T: Real>() -> Result<CorpusEntry<T>> {
    const N: usize = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(QUADRATIC_SEED);
    let mut uniform = |scale: f64| scale * (2.0 * rng.random::<f64>() - 1.0);

    // B = C D with C: 3x2 and D: 2x3, so rank B <= 2.
    let c: Vec<f64> = (0..N * 2).map(|_| uniform(1.0)).collect();
    let d: Vec<f64> = (0..2 * N).map(|_| uniform(1.0)).collect();
    let mut b = [[0.0f64; N]; N];
    for i in 0..N {
        for j in 0..N {
            b[i][j] = (0..2).map(|k| c[i * 2 + k] * d[k * N + j]).sum();
        }
    }
    let mut q = [[[0.0f64; N]; N]; N];
    for qi in q.iter_mut() {
        for j in 0..N {
            for k in j..N {
                let v = uniform(0.5);
                qi[j][k] = v;
                qi[k][j] = v;
            }
        }
    }

    let b_mat: Matrix<T> = Matrix::from_raw(N, N, b.iter().flatten().map(|&x| T::lit(x)).collect());
    let b_norm = b_mat.spectral_norm();
    // |Q''(d, e)| <= 2 sqrt(sum_i |Q_i|_F^2).
    let m2 = T::lit(2.0 * q.iter().flatten().flatten().map(|x| x * x).sum::<f64>().sqrt());

    let qt: Vec<T> = q.iter().flatten().flatten().map(|&x| T::lit(x)).collect();
    let qe = qt.clone();
    let bt = b_mat.clone();
    let eval = move |u: &Vector<T>| -> Vector<T> {
        let lin = bt.matvec(u);
        (0..N)
            .map(|i| {
                let mut s = lin[i];
                for j in 0..N {
                    for k in 0..N {
                        s += qe[i * N * N + j * N + k] * u[j] * u[k];
                    }
                }
                s
            })
            .collect::<Vec<_>>()
            .into()
    };
    let bj = b_mat.clone();
    let jac = move |u: &Vector<T>| -> Matrix<T> {
        let mut m = bj.clone();
        for i in 0..N {
            for j in 0..N {
                let s: T = (0..N).map(|k| qt[i * N * N + j * N + k] * u[k]).sum();
                m[(i, j)] += T::lit(2.0) * s;
            }
        }
        m
    };
    let problem = Problem::new(N, Vector::from_f64(&[0.2, -0.1, 0.15]), T::one(), eval)?
        .with_jacobian(jac)
        .with_known_solution(Vector::from_f64(&[0.0, 0.0, 0.0]))?;
    Ok(CorpusEntry {
        id: "P5",
        description: "seeded random quadratic map B u + Q(u, u) with singular nonzero B",
        problem,
        bounds: Some(Arc::new(move |c, r| {
            let s = reach(c, r);
            bounds(b_norm * s + m2 * s * s / T::lit(2.0), b_norm + m2 * s, m2)
        })),
    })
}

/// The benchmark corpus P1..P5. Each known solution is checked on
/// construction (`F(y) = 0`, `F'(y) != 0`).
pub fn registry<T: Real>() -> Result<Vec<CorpusEntry<T>>> {
    Ok(vec![
        linear_scalar()?,
        cubic_scalar()?,
        rank_deficient()?,
        exponential()?,
        random_quadratic()?,
    ])
}

pub fn find<T: Real>(id: &str) -> Result<Option<CorpusEntry<T>>> {
    Ok(registry()?.into_iter().find(|e| e.id.eq_ignore_ascii_case(id)))
}
