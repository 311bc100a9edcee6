use crate::error::{DsmError, Result};
use crate::problem::Problem;
use crate::scalar::Real;
use crate::schedule::{DiscreteSchedulePolicy, IterationState, PolicyMode};

use super::certify::certify_iterative;
use super::trace::{fit_geometric_rate, Trace, TraceRow};
use super::{hypothesis_inputs, step_iterative, Guarantee, SolveResult, SolverConfig, Termination};

/// Runs `u_{n+1} = u_n - h T_{a_n}^{-1} [F'(u_n)^T F(u_n) + a_n (u_n - z)]`
/// with `a_n` from `policy`, until `|F(u_n)| <= residual_tol`, `n_max`, or
/// divergence.
///
/// In oracle mode the hypotheses behind `|u_n - y| <= g0 q^n` must be
/// certified up front; otherwise the run is refused with
/// [`DsmError::HypothesisViolated`]. The bound column of the trace holds
/// `g0 q^n`, checked without tolerance when certified.
pub fn solve_iterative<T: Real>(
    problem: &Problem<T>,
    policy: &DiscreteSchedulePolicy<T>,
    config: &SolverConfig<T>,
) -> Result<SolveResult<T>> {
    config.validate()?;
    let oracle = matches!(policy.mode, PolicyMode::Oracle);
    let y = problem.known_solution();
    if oracle && y.is_none() {
        return Err(DsmError::MissingOracle);
    }
    let z = config.resolve_z(problem)?;
    let certification =
        certify_iterative(&hypothesis_inputs(problem, config), config.h, config.q, oracle);
    let certified = certification.all_hold();
    if oracle && !certified {
        return Err(DsmError::HypothesisViolated(certification.summary()));
    }

    let limit = problem.radius() * T::lit(10.0);
    let g0 = y.map(|y| problem.u0().distance(y));
    let mut u = problem.u0().clone();
    let mut trace = Trace::new();
    let mut violation = None;
    let mut n = 0usize;

    let termination = loop {
        let residual = problem.evaluate(&u)?.norm();
        let error = y.map(|y| u.distance(y));
        let a = policy.next_a(&IterationState {
            n,
            error,
            residual: Some(residual),
        })?;
        let bound = g0.map(|g0| g0 * config.q.powi(n as i32));
        if let (true, None, Some(e), Some(b)) = (certified, violation, error, bound) {
            if e > b {
                violation = Some(trace.len());
            }
        }
        trace.push(TraceRow {
            n,
            t: T::from_usize(n).expect("iteration count"),
            a,
            residual,
            error,
            bound,
        });
        if residual <= config.residual_tol {
            break Termination::ResidualTol;
        }
        if problem.distance_from_center(&u) > limit {
            break Termination::Diverged;
        }
        if n >= config.n_max {
            break Termination::NMax;
        }
        u = step_iterative(problem, &u, a, config.h, &z)?;
        n += 1;
    };

    let guarantee = match (certified, violation) {
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
        stopping_time: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Matrix, Vector};
    use crate::problem::SmoothnessBounds;
    use crate::solver::ZPolicy;

    fn linear(u0: f64) -> Problem<f64> {
        Problem::new(1, Vector::from_f64(&[u0]), 2.0, |u: &Vector<f64>| u.clone())
            .unwrap()
            .with_jacobian(|_| Matrix::identity(1))
            .with_known_solution(Vector::from_f64(&[0.0]))
            .unwrap()
    }

    #[test]
    fn oracle_without_solution_is_refused() {
        let p = Problem::new(1, Vector::from_f64(&[1.0]), 1.0, |u: &Vector<f64>| u.clone()).unwrap();
        let policy = DiscreteSchedulePolicy::oracle(0.0).unwrap();
        assert_eq!(
            solve_iterative(&p, &policy, &SolverConfig::default()).unwrap_err(),
            DsmError::MissingOracle
        );
    }

    #[test]
    fn oracle_with_uncertified_hypotheses_is_refused() {
        let p = linear(1.0);
        let policy = DiscreteSchedulePolicy::oracle(0.0).unwrap();
        // No bounds and no v: nothing can be certified.
        assert!(matches!(
            solve_iterative(&p, &policy, &SolverConfig::default()),
            Err(DsmError::HypothesisViolated(_))
        ));
    }

    #[test]
    fn fixed_point_terminates_immediately() {
        let p = linear(0.0);
        let policy = DiscreteSchedulePolicy::new(
            PolicyMode::FixedGeometric { a0: 1.0, ratio: 0.5 },
            0.0,
            1e-12,
        )
        .unwrap();
        let cfg = SolverConfig {
            z_policy: ZPolicy::Explicit(Vector::from_f64(&[0.0])),
            ..Default::default()
        };
        let r = solve_iterative(&p, &policy, &cfg).unwrap();
        assert_eq!(r.termination, Termination::ResidualTol);
        assert_eq!(r.trace.len(), 1);
    }

    #[test]
    fn linear_oracle_run_is_certified() {
        let p = linear(1.0);
        let policy = DiscreteSchedulePolicy::oracle(0.0).unwrap();
        let cfg = SolverConfig {
            z_policy: ZPolicy::FromV(Vector::from_f64(&[1e-3])),
            bounds: Some(SmoothnessBounds::new(3.0, 1.0, 0.0).unwrap()),
            residual_tol: 1e-12,
            ..Default::default()
        };
        let r = solve_iterative(&p, &policy, &cfg).unwrap();
        assert_eq!(r.guarantee, Guarantee::Held);
    }
}
