use thiserror::Error;

/// Errors raised by the solvers and the linear-algebra core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DsmError {
    #[error("non-finite output while evaluating {context}")]
    NonFiniteOutput { context: &'static str },

    #[error("non-finite input passed to {context}")]
    NonFiniteInput { context: &'static str },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("regularization parameter must be positive, got {0}")]
    DegenerateRegularization(f64),

    #[error("point lies outside the ball: distance {distance} exceeds radius {radius}")]
    OutOfBall { distance: f64, radius: f64 },

    #[error("oracle schedule requested but the problem has no known solution")]
    MissingOracle,

    #[error("hypotheses not satisfied: {0}")]
    HypothesisViolated(String),

    #[error("noise level too large: 8*lambda*delta = {threshold} >= a(0) = {a0}")]
    NoiseTooLarge { threshold: f64, a0: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("integration blew up at t = {t}")]
    IntegrationBlowup { t: f64 },
}

pub type Result<T, E = DsmError> = std::result::Result<T, E>;
