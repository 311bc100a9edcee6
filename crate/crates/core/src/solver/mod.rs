//! Continuous flow, discrete iteration and noisy-data flow.
//!
//! All three share the regularized Newton direction
//! `-T_a^{-1} [F'(u)^T (F(u) - f) + a (u - z)]` with `T_a = F'(u)^T F'(u) + a I`,
//! the Jacobian refreshed at every evaluation.

mod certify;
mod config;
mod continuous;
mod iterative;
mod trace;

pub use certify::{
    certify_continuous, certify_iterative, certify_noisy, Certification, Check, HypothesisInputs,
    STRICT_MARGIN,
};
pub use config::{SolverConfig, ZPolicy, ZPolicyKind};
pub use continuous::{solve_continuous, solve_noisy};
pub use iterative::solve_iterative;
pub use trace::{fit_geometric_rate, Trace, TraceRow, TRACE_HEADER};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::Vector;
use crate::problem::Problem;
use crate::regularized::regularized_solve;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ResidualTol,
    TMax,
    NMax,
    StoppingTime,
    Diverged,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::ResidualTol => "residual_tol",
            Termination::TMax => "t_max",
            Termination::NMax => "n_max",
            Termination::StoppingTime => "stopping_time",
            Termination::Diverged => "diverged",
        }
    }
}

/// Whether the run's error envelope was guaranteed, and whether it held.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum Guarantee {
    /// Hypotheses certified and the error stayed inside the envelope.
    Held,
    /// Hypotheses certified but the envelope was crossed at trace row `row`.
    Violated { row: usize },
    /// Hypotheses not certified; the envelope was not asserted.
    NotCertified,
}

#[derive(Debug, Clone)]
pub struct SolveResult<T> {
    pub u_final: Vector<T>,
    pub trace: Trace<T>,
    pub termination: Termination,
    /// Geometric fit of the error column, when the solution is known.
    pub fitted_rate: Option<T>,
    pub certification: Certification,
    pub guarantee: Guarantee,
    /// `t_delta`, for the noisy-data flow.
    pub stopping_time: Option<T>,
}

impl<T: Real> SolveResult<T> {
    pub fn final_residual(&self) -> T {
        self.trace.last().map_or(T::nan(), |r| r.residual)
    }

    pub fn final_error(&self) -> Option<T> {
        self.trace.last().and_then(|r| r.error)
    }
}

/// `-T_a^{-1} [F'(u)^T F(u) + a (u - z)]`.
pub fn dsm_rhs<T: Real>(problem: &Problem<T>, u: &Vector<T>, a: T, z: &Vector<T>) -> Result<Vector<T>> {
    dsm_rhs_with_data(problem, u, a, z, None)
}

/// As [`dsm_rhs`] with `F(u)` replaced by `F(u) - f` when `data = Some(f)`.
pub fn dsm_rhs_with_data<T: Real>(
    problem: &Problem<T>,
    u: &Vector<T>,
    a: T,
    z: &Vector<T>,
    data: Option<&Vector<T>>,
) -> Result<Vector<T>> {
    let jac = problem.jacobian(u)?;
    let mut fu = problem.evaluate(u)?;
    if let Some(f) = data {
        fu = &fu - f;
    }
    let rhs = jac.tr_matvec(&fu).axpy(a, &(u - z));
    Ok(-&regularized_solve(&jac, a, &rhs)?)
}

/// One step `u_{n+1} = u_n + h_n * dsm_rhs(u_n, a_n, z)`.
pub fn step_iterative<T: Real>(
    problem: &Problem<T>,
    u_n: &Vector<T>,
    a_n: T,
    h_n: T,
    z: &Vector<T>,
) -> Result<Vector<T>> {
    if h_n == T::zero() {
        return Ok(u_n.clone());
    }
    Ok(u_n.axpy(h_n, &dsm_rhs(problem, u_n, a_n, z)?))
}

pub(crate) fn hypothesis_inputs<T: Real>(
    problem: &Problem<T>,
    config: &SolverConfig<T>,
) -> HypothesisInputs<T> {
    let b = config.bounds;
    HypothesisInputs {
        m1: b.map(|b| b.m1),
        m2: b.map(|b| b.m2),
        c0: b.map(|b| b.c0),
        lambda: config.lambda,
        v_norm: config.v().map(Vector::norm),
        g0: problem.known_solution().map(|y| problem.u0().distance(y)),
        radius: problem.radius(),
    }
}
