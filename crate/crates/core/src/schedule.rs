//! Regularization schedules `a(t)` for the continuous flow and `a_n` for the
//! discrete iteration.
//!
//! A continuous schedule is admissible when `a(t) > 0`, `a(t) -> 0` and
//! `|a'(t)| / a(t) <= 1/2` for all `t >= 0`. Every family here has a closed
//! form for the ratio and for the inverse `a^{-1}`, so both the admissibility
//! certificate and the noisy-data stopping time are exact.

use serde::{Deserialize, Serialize};

use crate::error::{DsmError, Result};
use crate::scalar::Real;

/// Largest admissible value of `sup |a'| / a`.
pub const MAX_LOG_DECAY_RATE: f64 = 0.5;

/// Default floor for discrete regularization parameters.
pub const DEFAULT_A_MIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ScheduleFamily<T> {
    /// `a0 (1 + t)^(-b)`.
    Power,
    /// `a0 exp(-b t)`.
    Exponential,
    /// `a0` on `[0, hold]`, then `a0 (1 + t - hold)^(-b)`.
    ConstantThenPower { hold: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule<T> {
    #[serde(flatten)]
    pub family: ScheduleFamily<T>,
    pub a0: T,
    pub decay: T,
}

/// Outcome of checking a schedule against the admissibility conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityCertificate<T> {
    pub valid: bool,
    /// `sup_{t >= 0} |a'(t)| / a(t)`, in closed form.
    pub supremum: T,
    pub reason: Option<String>,
}

impl<T: Real> Schedule<T> {
    pub fn new(family: ScheduleFamily<T>, a0: T, decay: T) -> Result<Self> {
        if !(a0 > T::zero()) || !a0.is_finite() {
            return Err(DsmError::InvalidSchedule(format!("a0 must be positive, got {a0}")));
        }
        if !(decay >= T::zero()) || !decay.is_finite() {
            return Err(DsmError::InvalidSchedule(format!(
                "decay must be nonnegative, got {decay}"
            )));
        }
        if let ScheduleFamily::ConstantThenPower { hold } = family {
            if !(hold >= T::zero()) || !hold.is_finite() {
                return Err(DsmError::InvalidSchedule(format!(
                    "hold time must be nonnegative, got {hold}"
                )));
            }
        }
        Ok(Self { family, a0, decay })
    }

    pub fn power(a0: T, decay: T) -> Result<Self> {
        Self::new(ScheduleFamily::Power, a0, decay)
    }

    pub fn exponential(a0: T, decay: T) -> Result<Self> {
        Self::new(ScheduleFamily::Exponential, a0, decay)
    }

    pub fn constant_then_power(a0: T, decay: T, hold: T) -> Result<Self> {
        Self::new(ScheduleFamily::ConstantThenPower { hold }, a0, decay)
    }

    /// Same family and decay with a different initial value.
    pub fn with_a0(&self, a0: T) -> Result<Self> {
        Self::new(self.family, a0, self.decay)
    }

    /// `(a(t), a'(t))` for `t >= 0`.
    pub fn eval(&self, t: T) -> (T, T) {
        let t = t.max(T::zero());
        let b = self.decay;
        match self.family {
            ScheduleFamily::Power => power_eval(self.a0, b, t),
            ScheduleFamily::Exponential => {
                let a = self.a0 * (-b * t).exp();
                (a, -b * a)
            }
            ScheduleFamily::ConstantThenPower { hold } => {
                if t <= hold {
                    (self.a0, T::zero())
                } else {
                    power_eval(self.a0, b, t - hold)
                }
            }
        }
    }

    pub fn value(&self, t: T) -> T {
        self.eval(t).0
    }

    /// Closed-form `sup |a'| / a`: `b / (1 + t)` peaks at `b` for the power
    /// families, and the exponential ratio is the constant `b`.
    pub fn log_decay_supremum(&self) -> T {
        self.decay
    }

    pub fn validate(&self) -> ValidityCertificate<T> {
        let sup = self.log_decay_supremum();
        let reason = if !(self.decay > T::zero()) {
            Some("decay rate must be positive so that a(t) -> 0".to_string())
        } else if sup > T::lit(MAX_LOG_DECAY_RATE) {
            Some(format!("sup |a'|/a = {sup} exceeds 1/2"))
        } else {
            None
        };
        ValidityCertificate {
            valid: reason.is_none(),
            supremum: sup,
            reason,
        }
    }

    /// Time at which `a(t) = target`, or 0 when `target >= a0`.
    pub fn inverse(&self, target: T) -> T {
        if target >= self.a0 {
            return T::zero();
        }
        let ratio = self.a0 / target;
        let b = self.decay;
        match self.family {
            ScheduleFamily::Power => ratio.powf(T::one() / b) - T::one(),
            ScheduleFamily::Exponential => ratio.ln() / b,
            ScheduleFamily::ConstantThenPower { hold } => {
                hold + ratio.powf(T::one() / b) - T::one()
            }
        }
    }

    /// Noisy-data stopping time `t_delta`, the solution of `a(t) = 8 lambda delta`.
    pub fn stopping_time(&self, delta: T, lambda: T) -> T {
        self.inverse(T::lit(8.0) * lambda * delta)
    }
}

fn power_eval<T: Real>(a0: T, b: T, s: T) -> (T, T) {
    let base = T::one() + s;
    let a = a0 * base.powf(-b);
    (a, -b * a / base)
}

/// `(a(t), a'(t))`; free-function form of [`Schedule::eval`].
pub fn eval_schedule<T: Real>(s: &Schedule<T>, t: T) -> (T, T) {
    s.eval(t)
}

pub fn validate_schedule<T: Real>(s: &Schedule<T>) -> ValidityCertificate<T> {
    s.validate()
}

pub fn stopping_time<T: Real>(s: &Schedule<T>, delta: T, lambda: T) -> T {
    s.stopping_time(delta, lambda)
}

/// How the discrete iteration picks `a_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum PolicyMode<T> {
    /// `a_n = 16 c0^2 |u_n - y|^2`; needs the known solution.
    Oracle,
    /// Replaces the unknown error by `|F(u_n)| / max(M1, 1e-6)`.
    Residual { m1: T },
    /// `a_n = a0 q_a^n`.
    FixedGeometric { a0: T, ratio: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscreteSchedulePolicy<T> {
    #[serde(flatten)]
    pub mode: PolicyMode<T>,
    pub c0: T,
    pub floor: T,
}

/// Iteration state the policy may consult.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationState<T> {
    pub n: usize,
    pub error: Option<T>,
    pub residual: Option<T>,
}

impl<T: Real> DiscreteSchedulePolicy<T> {
    pub fn new(mode: PolicyMode<T>, c0: T, floor: T) -> Result<Self> {
        if !(floor > T::zero()) {
            return Err(DsmError::InvalidSchedule(format!("floor must be positive, got {floor}")));
        }
        if !(c0 >= T::zero()) || !c0.is_finite() {
            return Err(DsmError::InvalidSchedule(format!("c0 must be nonnegative, got {c0}")));
        }
        if let PolicyMode::FixedGeometric { a0, ratio } = mode {
            if !(a0 > T::zero()) || !(ratio > T::zero() && ratio <= T::one()) {
                return Err(DsmError::InvalidSchedule(format!(
                    "fixed-geometric policy needs a0 > 0 and 0 < q_a <= 1, got a0 = {a0}, q_a = {ratio}"
                )));
            }
        }
        Ok(Self { mode, c0, floor })
    }

    pub fn oracle(c0: T) -> Result<Self> {
        Self::new(PolicyMode::Oracle, c0, T::lit(DEFAULT_A_MIN))
    }

    pub fn next_a(&self, state: &IterationState<T>) -> Result<T> {
        let sixteen_c0_sq = T::lit(16.0) * self.c0 * self.c0;
        let raw = match self.mode {
            PolicyMode::Oracle => {
                let g = state.error.ok_or(DsmError::MissingOracle)?;
                sixteen_c0_sq * g * g
            }
            PolicyMode::Residual { m1 } => {
                let r = state.residual.ok_or_else(|| {
                    DsmError::InvalidConfig("residual policy needs the current residual".into())
                })?;
                let g = r / m1.max(T::lit(1e-6));
                sixteen_c0_sq * g * g
            }
            PolicyMode::FixedGeometric { a0, ratio } => a0 * ratio.powi(state.n as i32),
        };
        Ok(raw.max(self.floor))
    }
}

pub fn next_a<T: Real>(policy: &DiscreteSchedulePolicy<T>, state: &IterationState<T>) -> Result<T> {
    policy.next_a(state)
}
