use std::path::Path;
use std::process::{Command, Output};

fn dsm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dsm"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn print_defaults_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let out = dsm(&["print-defaults"], dir.path());
    assert!(out.status.success());
    let cfg = write_config(dir.path(), "defaults.toml", &stdout(&out));
    let run = dsm(&["run", &cfg], dir.path());
    assert_eq!(run.status.code(), Some(0), "{}", stdout(&run));
    assert!(dir.path().join("trace.csv").exists());
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn run_writes_trace_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "p2.toml",
        "problem = \"P2\"\noutput = \"out/p2.csv\"\nreport = \"out/p2.json\"\n",
    );
    let out = dsm(&["run", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let summary = stdout(&out);
    assert!(summary.starts_with("status=guaranteed-and-held termination=residual_tol"), "{summary}");
    let csv = std::fs::read_to_string(dir.path().join("out/p2.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("n,t,a,residual,error,bound"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/p2.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "guaranteed-and-held");
    assert!(report["certification"]["checks"].as_array().unwrap().len() >= 5);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut traces = Vec::new();
    for rep in 0..2 {
        let cfg = write_config(
            dir.path(),
            &format!("c{rep}.toml"),
            &format!("problem = \"P3\"\nseed = 5\noutput = \"t{rep}.csv\"\nreport = \"r{rep}.json\"\n"),
        );
        assert_eq!(dsm(&["run", &cfg], dir.path()).status.code(), Some(0));
        traces.push(std::fs::read(dir.path().join(format!("t{rep}.csv"))).unwrap());
    }
    assert!(!traces[0].is_empty());
    assert_eq!(traces[0], traces[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), "bad.toml", "problem = \"nope\"\n");
    assert_eq!(dsm(&["run", &unknown], dir.path()).status.code(), Some(2));
    let typo = write_config(dir.path(), "typo.toml", "lamda = 3\n");
    assert_eq!(dsm(&["run", &typo], dir.path()).status.code(), Some(2));
    assert_eq!(dsm(&["run", "missing.toml"], dir.path()).status.code(), Some(1));

    let asserted = write_config(
        dir.path(),
        "asserted.toml",
        "problem = \"P2\"\nlambda = 1\nassert_hypotheses = true\n",
    );
    let out = dsm(&["run", &asserted], dir.path());
    assert_eq!(out.status.code(), Some(4));
    assert!(stdout(&out).starts_with("status=hypothesis-violated"));

    let stuck = write_config(
        dir.path(),
        "stuck.toml",
        "problem = \"P5\"\nz_policy = \"equal_u0\"\nt_max = 5\n",
    );
    let out = dsm(&["run", &stuck], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).starts_with("status=failed"));

    let diverging = write_config(
        dir.path(),
        "diverging.toml",
        "problem = \"P2\"\nu0 = [0.1]\nradius = 0.01\nz_policy = \"explicit\"\nz = [5.0]\nbounds = \"none\"\n",
    );
    let out = dsm(&["run", &diverging], dir.path());
    assert_eq!(out.status.code(), Some(3), "{}", stdout(&out));
    assert!(stdout(&out).starts_with("status=diverged"));
}

#[test]
fn sweep_noise_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "s.toml", "schedule = \"exponential\"\na0 = 4\n");
    let out = dsm(&["sweep-noise", &cfg, "--deltas", "1e-2,1e-3,1e-4,10"], dir.path());
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "delta,t_delta,final_error,bound,status");
    assert_eq!(lines.len(), 5);
    assert!(lines[4].ends_with("noise-too-large"));

    let empty = dsm(&["sweep-noise", &cfg, "--deltas"], dir.path());
    assert!(empty.status.success());
    assert_eq!(stdout(&empty), "delta,t_delta,final_error,bound,status\n");

    let negative = dsm(&["sweep-noise", &cfg, "--deltas=-1"], dir.path());
    assert_eq!(negative.status.code(), Some(2));
}

#[test]
fn list_problems_and_verify_lemmas() {
    let dir = tempfile::tempdir().unwrap();
    let out = dsm(&["list-problems"], dir.path());
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 5);

    let out = dsm(&["verify-lemmas"], dir.path());
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["expectations_met"], true);
}
