use dsm_core::bench::{
    execute, list_problems, run, sweep_noise, verify_lemmas, BoundsSource, Param, PolicyKind,
    RunConfig, RunStatus, SolverKind,
};

fn cfg(problem: &str) -> RunConfig {
    RunConfig {
        problem: problem.into(),
        ..Default::default()
    }
}

#[test]
fn linear_defaults_succeed() {
    let report = execute(&cfg("P1")).unwrap();
    assert_eq!(report.exit_code(), 0);
    assert!(report.result.as_ref().unwrap().final_residual() <= 1e-6);
    assert!(report.summary.contains("termination=residual_tol"));
    assert!(report.summary.contains("bound_held=yes"));
}

#[test]
fn unknown_problem_is_a_config_error() {
    let err = execute(&cfg("P42")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn noisy_rank_deficient_run_reports_its_bound() {
    let c = RunConfig {
        solver: SolverKind::Noisy,
        delta: Param::Value(1e-3),
        ..cfg("P3")
    };
    let report = execute(&c).unwrap();
    assert_eq!(report.exit_code(), 0, "{}", report.summary);
    let bound = report.noisy_bound.unwrap();
    let lambda = report.certification_json["lambda"].as_f64().unwrap();
    assert!((bound - (8.0 * lambda * 1e-3).sqrt() / lambda).abs() < 1e-15);
    let e = report.result.unwrap().final_error().unwrap();
    assert!(e <= bound);
    assert!(report.summary.contains("within_noisy_bound=yes"));
}

#[test]
fn sweep_errors_decrease_under_decreasing_bounds() {
    let c = RunConfig {
        schedule: dsm_core::bench::ScheduleKind::Exponential,
        a0: Param::Value(4.0),
        ..cfg("P1")
    };
    let report = sweep_noise(&c, &[1e-2, 1e-3, 1e-4]).unwrap();
    assert_eq!(report.rows.len(), 3);
    for r in &report.rows {
        assert!(r.final_error.unwrap() <= r.bound);
    }
    for w in report.rows.windows(2) {
        assert!(w[1].final_error.unwrap() < w[0].final_error.unwrap());
        assert!(w[1].bound < w[0].bound);
    }
}

#[test]
fn oversized_noise_is_flagged() {
    let report = sweep_noise(&cfg("P1"), &[1.0]).unwrap();
    assert_eq!(report.rows[0].status, "noise-too-large");
    assert!(report.rows[0].final_error.is_none());
    assert!(report.to_csv_string().lines().nth(1).unwrap().ends_with(",,,2.8284271247461903,noise-too-large"));
}

#[test]
fn asserted_hypotheses_refuse_to_run() {
    let c = RunConfig {
        lambda: Param::Value(1.0),
        assert_hypotheses: true,
        ..cfg("P2")
    };
    let report = execute(&c).unwrap();
    assert_eq!(report.status, RunStatus::HypothesisViolated);
    assert_eq!(report.exit_code(), 4);
    assert!(report.result.is_none());
}

#[test]
fn uncertified_but_converged_is_distinguished() {
    let c = RunConfig {
        solver: SolverKind::Iterative,
        policy: PolicyKind::Residual,
        ..cfg("P4")
    };
    let report = execute(&c).unwrap();
    assert_eq!(report.status, RunStatus::HypothesisNotCertifiedButRan);
    assert_eq!(report.exit_code(), 0);
}

#[test]
fn estimated_bounds_run() {
    let c = RunConfig {
        bounds: BoundsSource::Estimated,
        ..cfg("P4")
    };
    let report = execute(&c).unwrap();
    assert_eq!(report.exit_code(), 0, "{}", report.summary);
}

#[test]
fn identical_configs_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut traces = Vec::new();
    for rep in 0..2 {
        let c = RunConfig {
            output: dir.path().join(format!("t{rep}.csv")).display().to_string(),
            report: dir.path().join(format!("r{rep}.json")).display().to_string(),
            seed: 3,
            ..cfg("P5")
        };
        run(&c).unwrap();
        traces.push((std::fs::read(&c.output).unwrap(), std::fs::read(&c.report).unwrap()));
    }
    assert_eq!(traces[0], traces[1]);
    let csv = String::from_utf8(traces[0].0.clone()).unwrap();
    assert!(csv.starts_with("n,t,a,residual,error,bound\n"));
}

#[test]
fn registry_listing_and_lemma_report() {
    let listing = list_problems().unwrap();
    for id in ["P1", "P2", "P3", "P4", "P5"] {
        assert!(listing.contains(id));
    }
    let report = verify_lemmas();
    assert!(report.expectations_met, "{}", report.to_json());
    let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
    assert_eq!(json["sweeps"][0]["cases"], 1000);
}

#[test]
fn print_defaults_lists_every_key() {
    let text = RunConfig::defaults_toml();
    let table: toml::Table = text.parse().unwrap();
    let keys: Vec<&str> = table.keys().map(String::as_str).collect();
    for key in [
        "problem", "solver", "schedule", "a0", "decay", "hold", "policy", "policy_a0",
        "policy_ratio", "a_min", "z_policy", "v_norm", "z", "u0", "radius", "lambda", "h", "q",
        "dt", "t_max", "n_max", "residual_tol", "delta", "bounds", "bound_samples",
        "bound_safety", "assert_hypotheses", "seed", "output", "report",
    ] {
        assert!(keys.contains(&key), "missing {key}");
    }
    assert_eq!(keys.len(), 30);
}
