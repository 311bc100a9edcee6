use crate::error::{DsmError, Result};
use crate::linalg::Vector;
use crate::problem::Problem;
use crate::scalar::Real;
use crate::schedule::Schedule;

use super::certify::{certify_continuous, certify_noisy, Certification, STRICT_MARGIN};
use super::trace::{fit_geometric_rate, Trace, TraceRow};
use super::{dsm_rhs_with_data, hypothesis_inputs, Guarantee, SolveResult, SolverConfig, Termination};

/// Integrates `u' = -T_{a(t)}^{-1} [F'(u)^T F(u) + a(t) (u - z)]`, `u(0) = u0`,
/// with classical RK4 at fixed step `dt` until `|F(u)| <= residual_tol` or
/// `t >= t_max`.
///
/// When the problem has a known solution and the hypotheses are certified,
/// every trace row is checked against `|u(t) - y| < sqrt(a(t)) / lambda`.
pub fn solve_continuous<T: Real>(
    problem: &Problem<T>,
    schedule: &Schedule<T>,
    config: &SolverConfig<T>,
) -> Result<SolveResult<T>> {
    config.validate()?;
    require_admissible(schedule)?;
    let z = config.resolve_z(problem)?;
    let certification = certify_continuous(&hypothesis_inputs(problem, config), schedule);
    let flow = Flow {
        problem,
        schedule,
        config,
        z: &z,
        data: None,
        t_end: config.t_max,
        stop_on_residual: true,
        assert_envelope: certification.all_hold(),
    };
    flow.run(certification, Termination::TMax, None)
}

/// Integrates the flow with noisy data `f_delta` in place of the exact right
/// side and stops at `t_delta`, where `a(t_delta) = 8 lambda delta`.
pub fn solve_noisy<T: Real>(
    problem: &Problem<T>,
    f_delta: &Vector<T>,
    delta: T,
    schedule: &Schedule<T>,
    config: &SolverConfig<T>,
) -> Result<SolveResult<T>> {
    config.validate()?;
    require_admissible(schedule)?;
    if !(delta > T::zero()) || !delta.is_finite() {
        return Err(DsmError::InvalidConfig(format!("delta must be positive, got {delta}")));
    }
    if f_delta.dim() != problem.dim_range() {
        return Err(DsmError::DimensionMismatch {
            context: "noisy data",
            expected: problem.dim_range(),
            got: f_delta.dim(),
        });
    }
    let threshold = T::lit(8.0) * config.lambda * delta;
    let t_delta = schedule.stopping_time(delta, config.lambda);
    if t_delta <= T::zero() {
        return Err(DsmError::NoiseTooLarge {
            threshold: threshold.to_f64_lossy(),
            a0: schedule.a0.to_f64_lossy(),
        });
    }
    let misfit = match problem.known_solution() {
        Some(y) => {
            let m = problem.evaluate(y)?.distance(f_delta);
            if m > delta * (T::one() + T::lit(1e-12)) {
                return Err(DsmError::InvalidConfig(format!(
                    "noisy data is {m} away from F(y), more than delta = {delta}"
                )));
            }
            Some(m)
        }
        None => None,
    };
    let z = config.resolve_z(problem)?;
    let certification = certify_noisy(&hypothesis_inputs(problem, config), schedule, delta, misfit);
    let flow = Flow {
        problem,
        schedule,
        config,
        z: &z,
        data: Some(f_delta),
        t_end: t_delta,
        stop_on_residual: false,
        assert_envelope: certification.all_hold(),
    };
    flow.run(certification, Termination::StoppingTime, Some(t_delta))
}

fn require_admissible<T: Real>(schedule: &Schedule<T>) -> Result<()> {
    let cert = schedule.validate();
    if cert.valid {
        Ok(())
    } else {
        Err(DsmError::InvalidSchedule(
            cert.reason.unwrap_or_else(|| "inadmissible schedule".into()),
        ))
    }
}

struct Flow<'a, T> {
    problem: &'a Problem<T>,
    schedule: &'a Schedule<T>,
    config: &'a SolverConfig<T>,
    z: &'a Vector<T>,
    data: Option<&'a Vector<T>>,
    t_end: T,
    stop_on_residual: bool,
    assert_envelope: bool,
}

impl<T: Real> Flow<'_, T> {
    fn velocity(&self, t: T, u: &Vector<T>) -> Result<Vector<T>> {
        dsm_rhs_with_data(self.problem, u, self.schedule.value(t), self.z, self.data)
    }

    fn rk4_step(&self, t: T, u: &Vector<T>, h: T) -> Result<Vector<T>> {
        let half = h / T::lit(2.0);
        let k1 = self.velocity(t, u)?;
        let k2 = self.velocity(t + half, &u.axpy(half, &k1))?;
        let k3 = self.velocity(t + half, &u.axpy(half, &k2))?;
        let k4 = self.velocity(t + h, &u.axpy(h, &k3))?;
        let sixth = h / T::lit(6.0);
        let incr = &(&k1 + &k4) + &(&k2 + &k3).scale(T::lit(2.0));
        let next = u.axpy(sixth, &incr);
        if !next.is_finite() {
            return Err(DsmError::NonFiniteOutput { context: "RK4 step" });
        }
        Ok(next)
    }

    fn row(&self, n: usize, t: T, u: &Vector<T>) -> Result<TraceRow<T>> {
        let a = self.schedule.value(t);
        let mut fu = self.problem.evaluate(u)?;
        if let Some(f) = self.data {
            fu = &fu - f;
        }
        let (error, bound) = match self.problem.known_solution() {
            Some(y) => (Some(u.distance(y)), Some(a.sqrt() / self.config.lambda)),
            None => (None, None),
        };
        Ok(TraceRow {
            n,
            t,
            a,
            residual: fu.norm(),
            error,
            bound,
        })
    }

    fn run(
        &self,
        certification: Certification,
        end_reason: Termination,
        stopping_time: Option<T>,
    ) -> Result<SolveResult<T>> {
        let dt = self.config.dt;
        let limit = self.problem.radius() * T::lit(10.0);
        let mut trace = Trace::new();
        let mut violation = None;
        let mut u = self.problem.u0().clone();
        let mut t = T::zero();
        let mut n = 0usize;

        let mut record = |trace: &mut Trace<T>, row: TraceRow<T>| {
            if let (true, None, Some(e), Some(b)) = (self.assert_envelope, violation, row.error, row.bound) {
                if !(b - e >= T::lit(STRICT_MARGIN)) {
                    violation = Some(trace.len());
                }
            }
            let residual = row.residual;
            trace.push(row);
            residual
        };

        let first = self.row(0, t, &u)?;
        let residual = record(&mut trace, first);
        let termination = if self.stop_on_residual && residual <= self.config.residual_tol {
            Termination::ResidualTol
        } else {
            loop {
                let t_next = (T::from_usize(n + 1).expect("step count") * dt).min(self.t_end);
                u = self.rk4_step(t, &u, t_next - t)?;
                t = t_next;
                n += 1;
                let row = self.row(n, t, &u)?;
                let residual = record(&mut trace, row);
                if self.problem.distance_from_center(&u) > limit {
                    break Termination::Diverged;
                }
                if self.stop_on_residual && residual <= self.config.residual_tol {
                    break Termination::ResidualTol;
                }
                if t >= self.t_end {
                    break end_reason;
                }
            }
        };

        let guarantee = match (self.assert_envelope, violation) {
            (false, _) => Guarantee::NotCertified,
            (true, None) => Guarantee::Held,
            (true, Some(row)) => Guarantee::Violated { row },
        };
        Ok(SolveResult {
            fitted_rate: fit_geometric_rate(&trace),
            u_final: u,
            trace,
            termination,
            certification,
            guarantee,
            stopping_time,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::solver::ZPolicy;

    fn linear(u0: f64) -> Problem<f64> {
        Problem::new(1, Vector::from_f64(&[u0]), 1.0, |u: &Vector<f64>| u.clone())
            .unwrap()
            .with_jacobian(|_| Matrix::identity(1))
            .with_known_solution(Vector::from_f64(&[0.0]))
            .unwrap()
    }

    #[test]
    fn starts_at_solution() {
        let p = linear(0.0);
        let cfg = SolverConfig {
            z_policy: ZPolicy::Explicit(Vector::from_f64(&[0.0])),
            ..Default::default()
        };
        let r = solve_continuous(&p, &Schedule::power(1.0, 0.5).unwrap(), &cfg).unwrap();
        assert_eq!(r.termination, Termination::ResidualTol);
        assert_eq!(r.trace.len(), 1);
        assert_eq!(r.u_final[0], 0.0);
    }

    #[test]
    fn rejects_inadmissible_schedule() {
        let p = linear(0.4);
        let cfg = SolverConfig::default();
        assert!(matches!(
            solve_continuous(&p, &Schedule::exponential(1.0, 0.7).unwrap(), &cfg),
            Err(DsmError::InvalidSchedule(_))
        ));
    }

    #[test]
    fn noise_too_large() {
        let p = linear(0.4);
        let cfg = SolverConfig::default();
        let s = Schedule::power(1.0, 0.5).unwrap();
        assert!(matches!(
            solve_noisy(&p, &Vector::from_f64(&[0.125]), 0.125, &s, &cfg),
            Err(DsmError::NoiseTooLarge { .. })
        ));
    }

    #[test]
    fn noisy_data_farther_than_delta_is_rejected() {
        let p = linear(0.4);
        let cfg = SolverConfig::default();
        let s = Schedule::power(1.0, 0.5).unwrap();
        assert!(solve_noisy(&p, &Vector::from_f64(&[0.01]), 0.001, &s, &cfg).is_err());
    }

    #[test]
    fn time_grid_lands_on_t_max() {
        let p = linear(0.4);
        let cfg = SolverConfig {
            z_policy: ZPolicy::Explicit(Vector::from_f64(&[0.0])),
            t_max: 0.105,
            dt: 0.01,
            residual_tol: 1e-30,
            ..Default::default()
        };
        let r = solve_continuous(&p, &Schedule::power(1.0, 0.5).unwrap(), &cfg).unwrap();
        assert_eq!(r.termination, Termination::TMax);
        assert_eq!(r.trace.last().unwrap().t, 0.105);
        assert_eq!(r.trace.len(), 12);
    }
}
