#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

//! Dynamical systems method (DSM) for nonlinear equations `F(u) = 0` on `R^n`.
//!
//! The solution is reached as the limit of the regularized Newton flow
//!
//! ```text
//! u'(t) = -(A^T A + a(t) I)^{-1} [A^T F(u) + a(t) (u - z)],   A = F'(u(t)),
//! ```
//!
//! which stays well defined when `F'` is singular, including at the solution.
//! The crate provides the flow ([`solve_continuous`]), its explicit
//! discretization ([`solve_iterative`]), the noisy-data variant stopped at a
//! noise-dependent time ([`solve_noisy`]), and numerical verifiers for the
//! comparison lemmas that underpin the convergence envelopes
//! ([`lemma`]).
//!
//! Every numeric type is generic over [`Real`]; the `*64` aliases below fix
//! the scalar to `f64`.

pub mod bench;
pub mod corpus;
pub mod error;
pub mod lemma;
pub mod linalg;
pub mod problem;
pub mod regularized;
pub mod scalar;
pub mod schedule;
pub mod solver;

pub use error::{DsmError, Result};
pub use lemma::{
    check_lemma1_against_trace, check_lemma1_conditions, lemma1_sweep, lemma2_sweep, verify_lemma1,
    verify_lemma2, Lemma1Family, Lemma1Instance, LemmaVerdict, SweepSummary,
};
pub use linalg::{Matrix, Vector};
pub use problem::{estimate_bounds, taylor_remainder_check, Problem, SmoothnessBounds};
pub use regularized::{regularized_pullback, regularized_solve, RegularizedNormal};
pub use scalar::Real;
pub use schedule::{
    eval_schedule, next_a, stopping_time, validate_schedule, DiscreteSchedulePolicy,
    IterationState, PolicyMode, Schedule, ScheduleFamily, ValidityCertificate,
};
pub use solver::{
    dsm_rhs, fit_geometric_rate, solve_continuous, solve_iterative, solve_noisy, step_iterative,
    Certification, Guarantee, SolveResult, SolverConfig, Termination, Trace, TraceRow, ZPolicy,
};

pub type Vector64 = Vector<f64>;
pub type Matrix64 = Matrix<f64>;
pub type Problem64 = Problem<f64>;
pub type Schedule64 = Schedule<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type SolveResult64 = SolveResult<f64>;
pub type Bounds64 = SmoothnessBounds<f64>;

pub type Vector32 = Vector<f32>;
pub type Matrix32 = Matrix<f32>;
pub type Problem32 = Problem<f32>;
