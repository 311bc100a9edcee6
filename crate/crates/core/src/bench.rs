//! Benchmark driver: flat key-value run configs, solver dispatch, run
//! summaries, noise sweeps and lemma reports. The command-line front end is a
//! thin layer over this module.

use std::fmt;
use std::fs;
use std::io;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::corpus::{self, CorpusEntry};
use crate::error::DsmError;
use crate::lemma::{
    self, lemma1_sweep, lemma2_sweep, Lemma1Family, Lemma1Instance, LemmaVerdict, SweepSummary,
};
use crate::linalg::Vector;
use crate::problem::{estimate_bounds, random_unit, SmoothnessBounds};
use crate::schedule::{DiscreteSchedulePolicy, PolicyMode, Schedule, ScheduleFamily};
use crate::solver::{
    solve_continuous, solve_iterative, solve_noisy, Guarantee, SolveResult, SolverConfig,
    Termination, ZPolicy, ZPolicyKind,
};

/// A scalar setting that may instead be derived (`"auto"`) or absent (`"none"`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Value(f64),
    Keyword(Keyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Keyword {
    Auto,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Continuous,
    Iterative,
    Noisy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    Power,
    Exponential,
    ConstantThenPower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Oracle,
    Residual,
    FixedGeometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsSource {
    ClosedForm,
    Estimated,
    None,
}

/// Everything a run depends on. Missing keys take the defaults shown by
/// [`RunConfig::defaults_toml`]; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: String,
    pub solver: SolverKind,
    pub schedule: ScheduleKind,
    /// `a(0)`; `"auto"` picks `max(1, (g0 lambda / 0.8)^2)` when `g0` is known.
    pub a0: Param,
    pub decay: f64,
    /// Plateau length of the constant-then-power schedule.
    pub hold: f64,
    pub policy: PolicyKind,
    pub policy_a0: f64,
    pub policy_ratio: f64,
    pub a_min: f64,
    pub z_policy: ZPolicyKind,
    /// Norm of the source element `v`; its direction is drawn from `seed`.
    pub v_norm: f64,
    /// Shift element for `z_policy = "explicit"`.
    pub z: Vec<f64>,
    /// Initial point; empty keeps the registry default. Also the ball center.
    pub u0: Vec<f64>,
    pub radius: Param,
    /// `"auto"` picks `max(8 c0, 1)`.
    pub lambda: Param,
    pub h: f64,
    pub q: f64,
    /// RK4 step; `"auto"` picks `0.01 min(1, a0)`.
    pub dt: Param,
    pub t_max: f64,
    pub n_max: usize,
    pub residual_tol: f64,
    pub delta: Param,
    pub bounds: BoundsSource,
    pub bound_samples: usize,
    /// Factor applied to sampled bounds, which can only underestimate.
    pub bound_safety: f64,
    /// Refuse to run when the hypotheses are not certified.
    pub assert_hypotheses: bool,
    pub seed: u64,
    /// Trace CSV path; `"-"` writes to stdout.
    pub output: String,
    /// JSON report path; `"-"` writes to stdout.
    pub report: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverConfig::<f64>::default();
        Self {
            problem: "P1".into(),
            solver: SolverKind::Continuous,
            schedule: ScheduleKind::Power,
            a0: Param::Keyword(Keyword::Auto),
            decay: 0.5,
            hold: 0.0,
            policy: PolicyKind::Oracle,
            policy_a0: 1.0,
            policy_ratio: 0.5,
            a_min: crate::schedule::DEFAULT_A_MIN,
            z_policy: ZPolicyKind::FromV,
            v_norm: 1e-8,
            z: Vec::new(),
            u0: Vec::new(),
            radius: Param::Keyword(Keyword::Auto),
            lambda: Param::Keyword(Keyword::Auto),
            h: solver.h,
            q: solver.q,
            dt: Param::Keyword(Keyword::Auto),
            t_max: solver.t_max,
            n_max: solver.n_max,
            residual_tol: solver.residual_tol,
            delta: Param::Keyword(Keyword::None),
            bounds: BoundsSource::ClosedForm,
            bound_samples: 200,
            bound_safety: 1.5,
            assert_hypotheses: false,
            seed: 0,
            output: "trace.csv".into(),
            report: "report.json".into(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] DsmError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
}

impl BenchError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Solver(e) => match e {
                DsmError::HypothesisViolated(_) => 4,
                DsmError::IntegrationBlowup { .. } | DsmError::NonFiniteOutput { .. } => 3,
                _ => 2,
            },
            BenchError::Io { .. } => 1,
        }
    }
}

fn config_err<T>(msg: impl Into<String>) -> Result<T, BenchError> {
    Err(BenchError::Config(msg.into()))
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, BenchError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| BenchError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// The default config, every key spelled out.
    pub fn defaults_toml() -> String {
        Self::default().to_toml_string()
    }

    /// Structural checks that need no solver: known problem, keyword use,
    /// and a noise level for the noisy solver.
    pub fn check(&self) -> Result<(), BenchError> {
        if corpus::find::<f64>(&self.problem)?.is_none() {
            return config_err(format!("unknown problem id {:?}", self.problem));
        }
        for (name, p) in [
            ("a0", self.a0),
            ("radius", self.radius),
            ("lambda", self.lambda),
            ("dt", self.dt),
        ] {
            if p == Param::Keyword(Keyword::None) {
                return config_err(format!("{name} accepts a number or \"auto\", not \"none\""));
            }
        }
        match self.delta {
            Param::Keyword(Keyword::Auto) => {
                return config_err("delta accepts a number or \"none\", not \"auto\"");
            }
            Param::Keyword(Keyword::None) if self.solver == SolverKind::Noisy => {
                return config_err("solver = \"noisy\" needs a delta");
            }
            _ => {}
        }
        if !(self.v_norm >= 0.0) || !self.v_norm.is_finite() {
            return config_err(format!("v_norm must be nonnegative, got {}", self.v_norm));
        }
        if !(self.bound_safety >= 1.0) {
            return config_err(format!("bound_safety must be at least 1, got {}", self.bound_safety));
        }
        Ok(())
    }
}

/// The config with every `"auto"` resolved and the solver inputs built.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub entry: CorpusEntry<f64>,
    pub bounds: Option<SmoothnessBounds<f64>>,
    pub lambda: f64,
    pub schedule: Schedule<f64>,
    pub solver: SolverConfig<f64>,
    pub delta: Option<f64>,
}

impl Resolved {
    pub fn new(cfg: &RunConfig) -> Result<Self, BenchError> {
        cfg.check()?;
        let mut entry = corpus::find::<f64>(&cfg.problem)?.expect("checked by RunConfig::check");
        if !cfg.u0.is_empty() {
            entry = entry.with_start(Vector::new(cfg.u0.clone())?)?;
        }
        if let Param::Value(r) = cfg.radius {
            entry = entry.with_radius(r)?;
        }
        let problem = &entry.problem;
        let bounds = match cfg.bounds {
            BoundsSource::ClosedForm => Some(entry.closed_form_bounds().ok_or_else(|| {
                BenchError::Config(format!("{} has no closed-form bounds", entry.id))
            })?),
            BoundsSource::Estimated => {
                Some(estimate_bounds(problem, cfg.bound_samples, cfg.seed)?.inflated(cfg.bound_safety)?)
            }
            BoundsSource::None => None,
        };
        let lambda = match cfg.lambda {
            Param::Value(l) => l,
            _ => (8.0 * bounds.map_or(0.0, |b| b.c0)).max(1.0),
        };
        if !(lambda > 0.0) || !lambda.is_finite() {
            return config_err(format!("lambda must be positive, got {lambda}"));
        }
        let g0 = problem.known_solution().map(|y| problem.u0().distance(y));
        let a0 = match cfg.a0 {
            Param::Value(a) => a,
            _ => g0.map_or(1.0, |g| (g * lambda / 0.8).powi(2).max(1.0)),
        };
        let family = match cfg.schedule {
            ScheduleKind::Power => ScheduleFamily::Power,
            ScheduleKind::Exponential => ScheduleFamily::Exponential,
            ScheduleKind::ConstantThenPower => ScheduleFamily::ConstantThenPower { hold: cfg.hold },
        };
        let schedule = Schedule::new(family, a0, cfg.decay)?;

        let n = problem.dim_domain();
        let z_policy = match cfg.z_policy {
            ZPolicyKind::EqualU0 => ZPolicy::EqualU0,
            ZPolicyKind::Explicit => {
                if cfg.z.len() != n {
                    return config_err(format!("z must have {n} entries, got {}", cfg.z.len()));
                }
                ZPolicy::Explicit(Vector::new(cfg.z.clone())?)
            }
            ZPolicyKind::FromV => {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                ZPolicy::FromV(random_unit::<f64>(&mut rng, n).scale(cfg.v_norm))
            }
        };
        let solver = SolverConfig {
            z_policy,
            lambda,
            h: cfg.h,
            q: cfg.q,
            t_max: cfg.t_max,
            n_max: cfg.n_max,
            residual_tol: cfg.residual_tol,
            dt: match cfg.dt {
                Param::Value(dt) => dt,
                _ => 0.01 * a0.min(1.0),
            },
            bounds,
        };
        solver.validate()?;
        let delta = match cfg.delta {
            Param::Value(d) => Some(d),
            _ => None,
        };
        Ok(Self {
            entry,
            bounds,
            lambda,
            schedule,
            solver,
            delta,
        })
    }

    pub fn policy(&self, cfg: &RunConfig) -> Result<DiscreteSchedulePolicy<f64>, BenchError> {
        let mode = match cfg.policy {
            PolicyKind::Oracle => PolicyMode::Oracle,
            PolicyKind::Residual => PolicyMode::Residual {
                m1: self.bounds.map_or(1.0, |b| b.m1),
            },
            PolicyKind::FixedGeometric => PolicyMode::FixedGeometric {
                a0: cfg.policy_a0,
                ratio: cfg.policy_ratio,
            },
        };
        let c0 = self.bounds.map_or(0.0, |b| b.c0);
        Ok(DiscreteSchedulePolicy::new(mode, c0, cfg.a_min)?)
    }

    /// `f_delta = F(y) + delta d` with a unit direction `d` drawn from
    /// `seed` on its own stream.
    pub fn noisy_data(&self, delta: f64, seed: u64, stream: u64) -> Result<Vector<f64>, BenchError> {
        let problem = &self.entry.problem;
        let y = problem.known_solution().ok_or_else(|| {
            BenchError::Config(format!("{} has no known solution to build noisy data from", self.entry.id))
        })?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream + 1);
        let d = random_unit::<f64>(&mut rng, problem.dim_range());
        Ok(problem.evaluate(y)?.axpy(delta, &d))
    }

    /// Error bound `sqrt(8 lambda delta) / lambda` at the stopping time.
    pub fn noisy_bound(&self, delta: f64) -> f64 {
        (8.0 * self.lambda * delta).sqrt() / self.lambda
    }
}

/// How a run ended, in the terms of the guarantee it was (or was not) under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    /// Hypotheses certified and the error envelope held at every row.
    GuaranteedAndHeld,
    /// Hypotheses not certified; the run still converged.
    HypothesisNotCertifiedButRan,
    /// Hypotheses not certified and the run stopped short of the tolerance.
    Failed,
    Diverged,
    /// Hypotheses certified, yet the envelope was crossed.
    BoundViolated,
    /// Hypotheses not certified and `assert_hypotheses` set; nothing ran.
    HypothesisViolated,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::GuaranteedAndHeld | RunStatus::HypothesisNotCertifiedButRan => 0,
            RunStatus::Failed | RunStatus::Diverged => 3,
            RunStatus::BoundViolated | RunStatus::HypothesisViolated => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::GuaranteedAndHeld => "guaranteed-and-held",
            RunStatus::HypothesisNotCertifiedButRan => "hypothesis-not-certified-but-ran",
            RunStatus::Failed => "failed",
            RunStatus::Diverged => "diverged",
            RunStatus::BoundViolated => "bound-violated",
            RunStatus::HypothesisViolated => "hypothesis-violated",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub status: RunStatus,
    /// `None` when the run was refused.
    pub result: Option<SolveResult<f64>>,
    pub certification_json: serde_json::Value,
    pub summary: String,
    /// `sqrt(8 lambda delta) / lambda` for noisy runs.
    pub noisy_bound: Option<f64>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn trace_csv(&self) -> String {
        self.result
            .as_ref()
            .map_or_else(String::new, |r| r.trace.to_csv_string())
    }
}

fn classify(result: &SolveResult<f64>) -> RunStatus {
    let converged = matches!(
        result.termination,
        Termination::ResidualTol | Termination::StoppingTime
    );
    match (result.termination, result.guarantee) {
        (Termination::Diverged, _) => RunStatus::Diverged,
        (_, Guarantee::Violated { .. }) => RunStatus::BoundViolated,
        (_, Guarantee::Held) => RunStatus::GuaranteedAndHeld,
        (_, Guarantee::NotCertified) if converged => RunStatus::HypothesisNotCertifiedButRan,
        (_, Guarantee::NotCertified) => RunStatus::Failed,
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), |v| format!("{v:e}"))
}

/// Runs `cfg` without touching the file system.
pub fn execute(cfg: &RunConfig) -> Result<RunReport, BenchError> {
    let r = Resolved::new(cfg)?;
    let problem = &r.entry.problem;
    let (outcome, noisy_bound) = match cfg.solver {
        SolverKind::Continuous => (guarded(cfg, || solve_continuous(problem, &r.schedule, &r.solver))?, None),
        SolverKind::Iterative => {
            let policy = r.policy(cfg)?;
            (guarded(cfg, || solve_iterative(problem, &policy, &r.solver))?, None)
        }
        SolverKind::Noisy => {
            let delta = r.delta.expect("checked by RunConfig::check");
            let data = r.noisy_data(delta, cfg.seed, 0)?;
            let out = guarded(cfg, || solve_noisy(problem, &data, delta, &r.schedule, &r.solver))?;
            (out, Some(r.noisy_bound(delta)))
        }
    };
    let base = json!({
        "problem": r.entry.id,
        "solver": cfg.solver,
        "lambda": r.lambda,
        "schedule": r.schedule,
        "bounds": r.bounds,
        "v_norm": r.solver.v().map(Vector::norm),
        "delta": r.delta,
    });
    match outcome {
        Err(summary) => {
            let status = RunStatus::HypothesisViolated;
            let line = format!("status={status} {summary}");
            let mut report = base;
            report["status"] = json!(status);
            report["detail"] = json!(summary);
            Ok(RunReport {
                status,
                result: None,
                certification_json: report,
                summary: line,
                noisy_bound,
            })
        }
        Ok(result) => {
            let status = classify(&result);
            let mut line = format!(
                "status={status} termination={} final_residual={:e} final_error={} fitted_rate={} bound_held={}",
                result.termination.as_str(),
                result.final_residual(),
                opt(result.final_error()),
                opt(result.fitted_rate),
                match result.guarantee {
                    Guarantee::Held => "yes",
                    Guarantee::Violated { .. } => "no",
                    Guarantee::NotCertified => "not-asserted",
                },
            );
            if let Some(b) = noisy_bound {
                let within = result.final_error().map(|e| e <= b);
                line.push_str(&format!(
                    " t_delta={} noisy_bound={b:e} within_noisy_bound={}",
                    opt(result.stopping_time),
                    within.map_or("n/a", |w| if w { "yes" } else { "no" }),
                ));
            }
            let mut report = base;
            report["status"] = json!(status);
            report["certification"] = serde_json::to_value(&result.certification).expect("serializes");
            report["termination"] = json!(result.termination);
            report["guarantee"] = json!(result.guarantee);
            report["final_residual"] = json!(result.final_residual());
            report["final_error"] = json!(result.final_error());
            report["fitted_rate"] = json!(result.fitted_rate);
            report["stopping_time"] = json!(result.stopping_time);
            report["noisy_bound"] = json!(noisy_bound);
            Ok(RunReport {
                status,
                result: Some(result),
                certification_json: report,
                summary: line,
                noisy_bound,
            })
        }
    }
}

/// Runs `solve`, turning a refusal under `assert_hypotheses` (or an oracle
/// run the solver refuses) into `Err(summary)`.
fn guarded(
    cfg: &RunConfig,
    solve: impl FnOnce() -> crate::error::Result<SolveResult<f64>>,
) -> Result<Result<SolveResult<f64>, String>, BenchError> {
    match solve() {
        Ok(result) => {
            if cfg.assert_hypotheses && !result.certification.all_hold() {
                Ok(Err(result.certification.summary()))
            } else {
                Ok(Ok(result))
            }
        }
        Err(DsmError::HypothesisViolated(summary)) => Ok(Err(summary)),
        Err(e) => Err(e.into()),
    }
}

fn write_target(path: &str, contents: &str) -> Result<(), BenchError> {
    if path == "-" {
        print!("{contents}");
        return Ok(());
    }
    if let Some(dir) = Path::new(path).parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| BenchError::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    fs::write(path, contents).map_err(|source| BenchError::Io {
        path: path.into(),
        source,
    })
}

/// Runs `cfg`, writes the trace CSV and the JSON report, and returns the
/// report (whose summary line the caller prints).
pub fn run(cfg: &RunConfig) -> Result<RunReport, BenchError> {
    let report = execute(cfg)?;
    if report.result.is_some() {
        write_target(&cfg.output, &report.trace_csv())?;
    }
    let json = serde_json::to_string_pretty(&report.certification_json).expect("report serializes");
    write_target(&cfg.report, &format!("{json}\n"))?;
    Ok(report)
}

pub const SWEEP_HEADER: &str = "delta,t_delta,final_error,bound,status";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub delta: f64,
    pub t_delta: Option<f64>,
    pub final_error: Option<f64>,
    pub bound: f64,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn to_csv_string(&self) -> String {
        let cell = |x: Option<f64>| x.map_or_else(String::new, |v| v.to_string());
        let mut out = String::from(SWEEP_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.delta,
                cell(r.t_delta),
                cell(r.final_error),
                r.bound,
                r.status
            ));
        }
        out
    }
}

/// One noisy run per `delta`, each with its own seeded noise direction.
/// Levels too large for the schedule are flagged, not fatal.
pub fn sweep_noise(cfg: &RunConfig, deltas: &[f64]) -> Result<SweepReport, BenchError> {
    let mut base = cfg.clone();
    base.solver = SolverKind::Noisy;
    if base.delta == Param::Keyword(Keyword::None) {
        base.delta = Param::Value(deltas.first().copied().unwrap_or(1.0));
    }
    let r = Resolved::new(&base)?;
    let problem = &r.entry.problem;
    if problem.known_solution().is_none() {
        return config_err(format!("{} has no known solution", r.entry.id));
    }
    let mut report = SweepReport::default();
    for (i, &delta) in deltas.iter().enumerate() {
        if !(delta > 0.0) || !delta.is_finite() {
            return config_err(format!("deltas must be positive, got {delta}"));
        }
        let bound = r.noisy_bound(delta);
        let data = r.noisy_data(delta, cfg.seed, i as u64)?;
        let row = match solve_noisy(problem, &data, delta, &r.schedule, &r.solver) {
            Ok(result) => SweepRow {
                delta,
                t_delta: result.stopping_time,
                final_error: result.final_error(),
                bound,
                status: classify(&result).as_str().into(),
            },
            Err(DsmError::NoiseTooLarge { .. }) => SweepRow {
                delta,
                t_delta: None,
                final_error: None,
                bound,
                status: "noise-too-large".into(),
            },
            Err(e) => return Err(e.into()),
        };
        report.rows.push(row);
    }
    Ok(report)
}

/// One line per corpus entry: id, dimensions, start, radius, bounds and description.
pub fn list_problems() -> Result<String, BenchError> {
    let mut out = String::new();
    for entry in corpus::registry::<f64>()? {
        let p = &entry.problem;
        let bounds = entry
            .closed_form_bounds()
            .map_or_else(|| "none".into(), |b| format!("M0={:.4} M1={:.4} M2={:.4}", b.m0, b.m1, b.m2));
        out.push_str(&format!(
            "{}\t{}->{}\tu0={:?}\tR={}\t{}\t{}\n",
            entry.id,
            p.dim_domain(),
            p.dim_range(),
            p.u0().as_slice(),
            p.radius(),
            bounds,
            entry.description
        ));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct NamedVerdict {
    pub name: String,
    /// Whether the verdict is expected to confirm the conclusion.
    pub expect_confirmed: bool,
    pub verdict: LemmaVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub instances: Vec<NamedVerdict>,
    pub sweeps: Vec<SweepSummary>,
    pub expectations_met: bool,
}

impl LemmaReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("lemma report serializes")
    }
}

pub const LEMMA_SWEEP_SEED: u64 = 0x1e44a;

/// Named lemma instances (including negative controls whose hypotheses must
/// fail) and the seeded sweeps.
pub fn verify_lemmas() -> LemmaReport {
    let power = Schedule::power(2.25, 0.5).expect("valid schedule");
    let expo = Schedule::exponential(4.0, 0.5).expect("valid schedule");
    let mut instances = vec![
        NamedVerdict {
            name: "constants gamma=1/2 alpha=beta=1/8 mu=2 g0=0.4".into(),
            expect_confirmed: true,
            verdict: lemma::verify_lemma1(&Lemma1Instance::constant(0.5, 0.125, 0.125, 2.0, 0.4, 100.0), 0.01),
        },
        NamedVerdict {
            name: "constants with g0 mu(0) = 1.2 (hypothesis iii fails)".into(),
            expect_confirmed: false,
            verdict: lemma::verify_lemma1(&Lemma1Instance::constant(0.5, 0.125, 0.125, 2.0, 0.6, 100.0), 0.01),
        },
        NamedVerdict {
            name: "flow: power a0=2.25 b=1/2, c0=1.5, lambda=12, |v|=1e-8, g0=0.1".into(),
            expect_confirmed: true,
            verdict: lemma::verify_lemma1(
                &Lemma1Instance::continuous_flow(power, 1.5, 12.0, 1e-8, 0.1, 100.0),
                0.01,
            ),
        },
        NamedVerdict {
            name: "flow with lambda = 11 < 8 c0 (hypothesis i fails)".into(),
            expect_confirmed: false,
            verdict: lemma::verify_lemma1(
                &Lemma1Instance::continuous_flow(power, 1.5, 11.0, 1e-8, 0.1, 100.0),
                0.01,
            ),
        },
        NamedVerdict {
            name: "noisy flow: exponential a0=4 b=1/2, c0=0.25, lambda=2, |v|=1e-3, delta=1e-3, g0=0.3".into(),
            expect_confirmed: true,
            verdict: lemma::verify_lemma1(
                &Lemma1Instance::noisy_flow(expo, 0.25, 2.0, 1e-3, 1e-3, 0.3),
                0.01,
            ),
        },
    ];
    for (m, expect) in [(0.3, true), (0.6, false)] {
        instances.push(NamedVerdict {
            name: format!("recursion gamma=1/2 p=1 q=0.9 m={m}"),
            expect_confirmed: expect,
            verdict: lemma::verify_lemma2(0.5, 1.0, m, 0.9, 200),
        });
    }
    let sweeps = vec![
        lemma2_sweep(1000, 200, LEMMA_SWEEP_SEED),
        lemma1_sweep(Lemma1Family::Constant, 100, 100.0, 0.01, LEMMA_SWEEP_SEED),
        lemma1_sweep(Lemma1Family::Flow, 100, 100.0, 0.01, LEMMA_SWEEP_SEED),
    ];
    let expectations_met = instances
        .iter()
        .all(|i| i.verdict.confirmed() == i.expect_confirmed && (i.expect_confirmed || !i.verdict.hypotheses_hold))
        && sweeps.iter().all(SweepSummary::all_confirmed);
    LemmaReport {
        instances,
        sweeps,
        expectations_met,
    }
}
