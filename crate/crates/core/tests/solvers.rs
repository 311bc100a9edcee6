use approx::assert_relative_eq;
use dsm_core::corpus;
use dsm_core::{
    check_lemma1_against_trace, solve_continuous, solve_iterative, solve_noisy,
    DiscreteSchedulePolicy, Guarantee, Matrix, PolicyMode, Problem, Schedule, SolverConfig,
    Termination, Vector, ZPolicy,
};

fn linear(u0: f64) -> Problem<f64> {
    Problem::new(1, Vector::from_f64(&[u0]), 1.0, |u: &Vector<f64>| u.clone())
        .unwrap()
        .with_jacobian(|_| Matrix::identity(1))
        .with_known_solution(Vector::from_f64(&[0.0]))
        .unwrap()
}

fn explicit_zero(n: usize) -> ZPolicy<f64> {
    ZPolicy::Explicit(Vector::zeros(n))
}

#[test]
fn linear_flow_matches_closed_form() {
    // With z = y = 0 the scalar flow is u' = -u whatever a(t) is.
    let cfg = SolverConfig {
        z_policy: explicit_zero(1),
        ..Default::default()
    };
    let r = solve_continuous(&linear(0.4), &Schedule::power(4.0, 0.5).unwrap(), &cfg).unwrap();
    assert_eq!(r.termination, Termination::ResidualTol);
    assert!(r.u_final[0].abs() <= 1e-6);
    let mut prev = f64::INFINITY;
    for row in &r.trace.rows {
        let exact = 0.4 * (-row.t).exp();
        assert_relative_eq!(row.error.unwrap(), exact, max_relative = 1e-8);
        assert!(row.error.unwrap() < prev);
        prev = row.error.unwrap();
    }
}

#[test]
fn rank_deficient_flow_lands_on_the_solution_set() {
    let entry = corpus::find::<f64>("P3").unwrap().unwrap();
    let run = |dt: f64, t_max: f64, tol: f64| {
        let cfg = SolverConfig {
            z_policy: ZPolicy::FromV(Vector::from_f64(&[1e-6, 0.0])),
            lambda: 2.0,
            dt,
            t_max,
            residual_tol: tol,
            ..Default::default()
        };
        solve_continuous(&entry.problem, &Schedule::power(1.0, 0.5).unwrap(), &cfg).unwrap()
    };
    let r = run(0.01, 1e3, 1e-6);
    assert_eq!(r.termination, Termination::ResidualTol);
    assert!(r.u_final[0].abs() <= 1e-6);

    let t_end = 5.0;
    let coarse = run(0.01, t_end, 1e-300);
    let fine = run(0.001, t_end, 1e-300);
    assert!(coarse.u_final.distance(&fine.u_final) <= 1e-9);
}

#[test]
fn envelope_holds_on_trace_from_certified_run() {
    let entry = corpus::find::<f64>("P1").unwrap().unwrap();
    let schedule = Schedule::power(4.0, 0.5).unwrap();
    let cfg = SolverConfig {
        z_policy: ZPolicy::FromV(Vector::from_f64(&[1e-8])),
        bounds: entry.closed_form_bounds(),
        ..Default::default()
    };
    let r = solve_continuous(&entry.problem, &schedule, &cfg).unwrap();
    assert!(r.certification.all_hold());
    assert_eq!(r.guarantee, Guarantee::Held);
    assert!(check_lemma1_against_trace(&r.trace, &schedule, 1.0).confirmed());
}

#[test]
fn uncertified_run_is_flagged_but_not_asserted() {
    let entry = corpus::find::<f64>("P2").unwrap().unwrap();
    let cfg = SolverConfig {
        z_policy: ZPolicy::FromV(Vector::from_f64(&[1e-8])),
        lambda: 1.0,
        bounds: entry.closed_form_bounds(),
        ..Default::default()
    };
    let r = solve_continuous(&entry.problem, &Schedule::power(1.0, 0.5).unwrap(), &cfg).unwrap();
    assert!(!r.certification.all_hold());
    assert_eq!(r.guarantee, Guarantee::NotCertified);
    assert_eq!(r.termination, Termination::ResidualTol);
}

#[test]
fn linear_iteration_contracts_by_one_minus_h() {
    let policy = DiscreteSchedulePolicy::new(
        PolicyMode::FixedGeometric { a0: 1.0, ratio: 0.5 },
        0.0,
        1e-12,
    )
    .unwrap();
    let h = 0.5;
    let cfg = SolverConfig {
        z_policy: explicit_zero(1),
        h,
        residual_tol: 1e-12,
        ..Default::default()
    };
    let r = solve_iterative(&linear(1.0), &policy, &cfg).unwrap();
    assert_eq!(r.termination, Termination::ResidualTol);
    // With z = y the step is u_{n+1} = u_n - h (1 + a_n) u_n / (1 + a_n) = (1 - h) u_n.
    let rate = r.fitted_rate.unwrap();
    assert!(rate <= 1.0 - h / 2.0 + 0.05, "{rate}");
    assert!((rate - (1.0 - h)).abs() <= 1e-9, "{rate}");
    for w in r.trace.rows.windows(2) {
        let expected = (1.0 - h) * w[0].error.unwrap();
        assert_relative_eq!(w[1].error.unwrap(), expected, max_relative = 1e-12);
    }
}

#[test]
fn iteration_from_the_solution_stops_at_once() {
    let policy = DiscreteSchedulePolicy::new(PolicyMode::Residual { m1: 1.0 }, 0.0, 1e-12).unwrap();
    let cfg = SolverConfig {
        z_policy: explicit_zero(1),
        ..Default::default()
    };
    let r = solve_iterative(&linear(0.0), &policy, &cfg).unwrap();
    assert_eq!(r.termination, Termination::ResidualTol);
    assert_eq!(r.trace.len(), 1);
}

#[test]
fn oracle_iteration_on_cubic() {
    let entry = corpus::find::<f64>("P2").unwrap().unwrap();
    let bounds = entry.closed_form_bounds().unwrap();
    assert_relative_eq!(bounds.m1, 4.0, max_relative = 1e-15);
    assert_relative_eq!(bounds.m2, 6.0, max_relative = 1e-15);
    let cfg = SolverConfig {
        z_policy: ZPolicy::FromV(Vector::from_f64(&[1.0 / 96.0])),
        lambda: 12.0,
        n_max: 50,
        residual_tol: 1e-300,
        bounds: Some(bounds),
        ..Default::default()
    };
    let r = solve_iterative(&entry.problem, &DiscreteSchedulePolicy::oracle(bounds.c0).unwrap(), &cfg).unwrap();
    assert_eq!(r.guarantee, Guarantee::Held);
    // Majorant from the quadratic recursion, computed independently:
    // g_{n+1} <= (1 - h/4) g_n + 16 c0^2 h |v| g_n^2.
    let (gamma, p) = (1.0 - 0.5 / 4.0, 16.0 * 2.25 * 0.5 / 96.0);
    let mut majorant = 0.1;
    for row in &r.trace.rows {
        assert!(row.error.unwrap() <= majorant * (1.0 + 1e-12), "n = {}", row.n);
        assert!(row.error.unwrap() <= 0.1 * 0.9f64.powi(row.n as i32));
        majorant = gamma * majorant + p * majorant * majorant;
    }
}

#[test]
fn oracle_iteration_refuses_large_initial_error() {
    let entry = corpus::find::<f64>("P2")
        .unwrap()
        .unwrap()
        .with_start(Vector::from_f64(&[0.5]))
        .unwrap()
        .with_radius(0.5)
        .unwrap();
    let bounds = entry.closed_form_bounds().unwrap();
    let cfg = SolverConfig {
        z_policy: ZPolicy::FromV(Vector::from_f64(&[1.0 / 96.0])),
        lambda: 12.0,
        bounds: Some(bounds),
        ..Default::default()
    };
    let err = solve_iterative(&entry.problem, &DiscreteSchedulePolicy::oracle(bounds.c0).unwrap(), &cfg)
        .unwrap_err();
    assert!(matches!(err, dsm_core::DsmError::HypothesisViolated(_)), "{err}");
}

#[test]
fn noisy_linear_flow_respects_the_bound() {
    let schedule = Schedule::power(1.0, 0.5).unwrap();
    let mut errors = Vec::new();
    for delta in [1e-2, 3e-3] {
        let cfg = SolverConfig {
            z_policy: explicit_zero(1),
            ..Default::default()
        };
        let r = solve_noisy(&linear(0.4), &Vector::from_f64(&[delta]), delta, &schedule, &cfg).unwrap();
        assert_eq!(r.termination, Termination::StoppingTime);
        let t_delta = r.stopping_time.unwrap();
        assert_relative_eq!(r.trace.last().unwrap().t, t_delta);
        assert_relative_eq!(r.trace.last().unwrap().a, 8.0 * delta, max_relative = 1e-10);
        let bound = (8.0 * delta).sqrt();
        let e = r.final_error().unwrap();
        assert!(e <= bound, "{e} > {bound}");
        errors.push(e);
    }
    assert!(errors[1] < errors[0]);
}

#[test]
fn single_precision_flow() {
    let p = Problem::<f32>::new(1, Vector::from_f64(&[0.4]), 1.0, |u: &Vector<f32>| u.clone())
        .unwrap()
        .with_known_solution(Vector::from_f64(&[0.0]))
        .unwrap();
    let cfg = SolverConfig::<f32> {
        z_policy: ZPolicy::Explicit(Vector::from_f64(&[0.0])),
        residual_tol: 1e-4,
        ..Default::default()
    };
    let r = solve_continuous(&p, &Schedule::power(1.0f32, 0.5).unwrap(), &cfg).unwrap();
    assert_eq!(r.termination, Termination::ResidualTol);
    assert!(r.u_final[0].abs() <= 1e-4);
}
