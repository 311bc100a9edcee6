//! Numerical verifiers for the two comparison lemmas behind the convergence
//! results.
//!
//! * Differential inequality: if `g' <= -gamma g + alpha g^2 + beta` and a
//!   positive `mu` with `mu -> infinity` satisfies
//!   `alpha <= (mu / 2)(gamma - mu'/mu)`, `beta <= (gamma - mu'/mu) / (2 mu)` and
//!   `g(0) mu(0) < 1`, then `0 <= g(t) < 1 / mu(t)`.
//! * Quadratic recursion: if `g_{n+1} <= gamma g_n + p g_n^2` with
//!   `0 < gamma < q < 1` and `g_0 = m < (q - gamma) / p`, then `g_n <= m q^n`.
//!
//! Neither statement can be checked over "all solutions", so the verifiers
//! run the extremal equality (the largest admissible trajectory) and rely on
//! the comparison principle.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Real;
use crate::schedule::Schedule;
use crate::solver::{Check, Trace, STRICT_MARGIN};

/// Extremal trajectories above this value are reported as blow-up.
pub const BLOWUP_LEVEL: f64 = 1e6;

/// Default grid size for hypothesis checks.
pub const DEFAULT_GRID_POINTS: usize = 10_000;

pub type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Coefficients of the differential inequality on `[0, horizon]`.
#[derive(Clone)]
pub struct Lemma1Instance<T> {
    pub gamma: ScalarFn<T>,
    pub alpha: ScalarFn<T>,
    pub beta: ScalarFn<T>,
    pub mu: ScalarFn<T>,
    pub mu_dot: ScalarFn<T>,
    pub g0: T,
    pub horizon: T,
}

impl<T: Real> fmt::Debug for Lemma1Instance<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lemma1Instance")
            .field("g0", &self.g0)
            .field("horizon", &self.horizon)
            .finish_non_exhaustive()
    }
}

impl<T: Real> Lemma1Instance<T> {
    /// Constant coefficients with constant `mu`.
    pub fn constant(gamma: T, alpha: T, beta: T, mu: T, g0: T, horizon: T) -> Self {
        Self {
            gamma: Arc::new(move |_| gamma),
            alpha: Arc::new(move |_| alpha),
            beta: Arc::new(move |_| beta),
            mu: Arc::new(move |_| mu),
            mu_dot: Arc::new(|_| T::zero()),
            g0,
            horizon,
        }
    }

    /// The instance produced by the continuous flow: `gamma = 1/2`,
    /// `alpha = c0 / sqrt(a)`, `beta = a |v|`, `mu = lambda / sqrt(a)`.
    pub fn continuous_flow(
        schedule: Schedule<T>,
        c0: T,
        lambda: T,
        v_norm: T,
        g0: T,
        horizon: T,
    ) -> Self {
        Self::flow_instance(schedule, c0, lambda, g0, horizon, move |a: T| a * v_norm)
    }

    /// The noisy-data variant: `beta = a |v| + delta / (2 sqrt(a))`, on
    /// `[0, t_delta]`.
    pub fn noisy_flow(schedule: Schedule<T>, c0: T, lambda: T, v_norm: T, delta: T, g0: T) -> Self {
        let horizon = schedule.stopping_time(delta, lambda);
        Self::flow_instance(schedule, c0, lambda, g0, horizon, move |a: T| {
            a * v_norm + delta / (T::lit(2.0) * a.sqrt())
        })
    }

    fn flow_instance(
        schedule: Schedule<T>,
        c0: T,
        lambda: T,
        g0: T,
        horizon: T,
        beta_of_a: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        let s = schedule;
        Self {
            gamma: Arc::new(|_| T::lit(0.5)),
            alpha: Arc::new(move |t| c0 / s.value(t).sqrt()),
            beta: Arc::new(move |t| beta_of_a(s.value(t))),
            mu: Arc::new(move |t| lambda / s.value(t).sqrt()),
            mu_dot: Arc::new(move |t| {
                let (a, adot) = s.eval(t);
                -lambda * adot / (T::lit(2.0) * a * a.sqrt())
            }),
            g0,
            horizon,
        }
    }

    fn drift(&self, t: T, g: T, shift: T) -> T {
        -(self.gamma)(t) * g + (self.alpha)(t) * g * g + (self.beta)(t) - shift
    }
}

/// First place where a checked property failed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub index: usize,
    pub t: f64,
    pub value: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaVerdict {
    pub lemma: String,
    pub hypotheses: Vec<Check>,
    pub hypotheses_hold: bool,
    /// `None` when the hypotheses failed and the conclusion was not examined.
    pub conclusion_holds: Option<bool>,
    /// Smallest observed `bound - value` over the checked points.
    pub conclusion_margin: Option<f64>,
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl LemmaVerdict {
    fn hypotheses_only(lemma: &str, hypotheses: Vec<Check>) -> Self {
        let hold = !hypotheses.is_empty() && hypotheses.iter().all(|c| c.holds);
        Self {
            lemma: lemma.into(),
            hypotheses,
            hypotheses_hold: hold,
            conclusion_holds: None,
            conclusion_margin: None,
            witness: None,
            note: None,
        }
    }

    /// True when the hypotheses held and so did the conclusion.
    pub fn confirmed(&self) -> bool {
        self.hypotheses_hold && self.conclusion_holds == Some(true)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serializes")
    }
}

fn f<T: Real>(x: T) -> f64 {
    x.to_f64_lossy()
}

/// Tracks the tightest point of a family of `lhs <= rhs` comparisons.
struct Worst {
    lhs: f64,
    rhs: f64,
}

impl Worst {
    fn new() -> Self {
        Self {
            lhs: f64::NEG_INFINITY,
            rhs: f64::INFINITY,
        }
    }

    fn offer(&mut self, lhs: f64, rhs: f64) {
        let margin = rhs - lhs;
        if margin.is_nan() || margin < self.rhs - self.lhs {
            self.lhs = lhs;
            self.rhs = rhs;
        }
    }
}

/// Evaluates conditions i), ii), iii) (and the sign conditions on the
/// coefficients) on a uniform grid of `grid_points` over `[0, horizon]`.
pub fn check_lemma1_conditions<T: Real>(inst: &Lemma1Instance<T>, grid_points: usize) -> LemmaVerdict {
    let grid_points = grid_points.max(2);
    let horizon = f(inst.horizon);
    let mut cond_i = Worst::new();
    let mut cond_ii = Worst::new();
    let mut min_coeff = f64::INFINITY;
    let mut min_mu = f64::INFINITY;
    for k in 0..grid_points {
        let t = T::lit(horizon * k as f64 / (grid_points - 1) as f64);
        let (gamma, alpha, beta) = ((inst.gamma)(t), (inst.alpha)(t), (inst.beta)(t));
        let (mu, mu_dot) = ((inst.mu)(t), (inst.mu_dot)(t));
        let slack = gamma - mu_dot / mu;
        cond_i.offer(f(alpha), f(mu / T::lit(2.0) * slack));
        cond_ii.offer(f(beta), f(slack / (T::lit(2.0) * mu)));
        min_coeff = min_coeff.min(f(gamma)).min(f(alpha)).min(f(beta));
        min_mu = min_mu.min(f(mu));
    }
    let hypotheses = vec![
        Check::le("gamma, alpha, beta >= 0 on grid", -min_coeff, 0.0),
        Check::lt("mu > 0 on grid", -min_mu, 0.0),
        Check::le("i) alpha <= (mu/2)(gamma - mu'/mu)", cond_i.lhs, cond_i.rhs),
        Check::le("ii) beta <= (gamma - mu'/mu) / (2 mu)", cond_ii.lhs, cond_ii.rhs),
        Check::lt("iii) g(0) mu(0) < 1", f(inst.g0 * (inst.mu)(T::zero())), 1.0),
    ];
    LemmaVerdict::hypotheses_only("differential inequality", hypotheses)
}

fn rk4_scalar<T: Real>(inst: &Lemma1Instance<T>, t: T, g: T, h: T, shift: T) -> T {
    let half = h / T::lit(2.0);
    let k1 = inst.drift(t, g, shift);
    let k2 = inst.drift(t + half, g + half * k1, shift);
    let k3 = inst.drift(t + half, g + half * k2, shift);
    let k4 = inst.drift(t + h, g + h * k3, shift);
    g + h / T::lit(6.0) * (k1 + T::lit(2.0) * (k2 + k3) + k4)
}

/// Extremal trajectory `g' = -gamma g + alpha g^2 + beta - shift` on a fixed
/// RK4 grid, as `(t, g)` pairs including the initial point.
pub fn extremal_trajectory<T: Real>(inst: &Lemma1Instance<T>, dt: T, shift: T) -> Vec<(T, T)> {
    let mut out = vec![(T::zero(), inst.g0)];
    let (mut t, mut g) = (T::zero(), inst.g0);
    let mut k = 0usize;
    while t < inst.horizon {
        k += 1;
        let t_next = (T::from_usize(k).expect("step count") * dt).min(inst.horizon);
        g = rk4_scalar(inst, t, g, t_next - t, shift);
        t = t_next;
        out.push((t, g));
        if !g.is_finite() || g > T::lit(BLOWUP_LEVEL) {
            break;
        }
    }
    out
}

/// Certifies the hypotheses on the default grid, then integrates the
/// extremal equation and checks `0 <= g(t) < 1/mu(t)` at every step.
pub fn verify_lemma1<T: Real>(inst: &Lemma1Instance<T>, dt: T) -> LemmaVerdict {
    verify_lemma1_with_grid(inst, dt, DEFAULT_GRID_POINTS)
}

pub fn verify_lemma1_with_grid<T: Real>(inst: &Lemma1Instance<T>, dt: T, grid_points: usize) -> LemmaVerdict {
    let mut verdict = check_lemma1_conditions(inst, grid_points);
    if !verdict.hypotheses_hold {
        return verdict;
    }
    if !(dt > T::zero()) {
        verdict.note = Some("dt must be positive".into());
        verdict.conclusion_holds = Some(false);
        return verdict;
    }
    let mut margin = f64::INFINITY;
    let mut witness = None;
    for (index, (t, g)) in extremal_trajectory(inst, dt, T::zero()).into_iter().enumerate() {
        let bound = f(T::one() / (inst.mu)(t));
        let value = f(g);
        let m = bound - value;
        margin = margin.min(m);
        let blown = !value.is_finite() || value > BLOWUP_LEVEL;
        if witness.is_none() && (blown || value < 0.0 || !(m >= STRICT_MARGIN)) {
            witness = Some(Witness {
                index,
                t: f(t),
                value,
                bound,
            });
            if blown {
                verdict.note = Some(format!("integration blew up at t = {}", f(t)));
            }
        }
    }
    verdict.conclusion_holds = Some(witness.is_none());
    verdict.conclusion_margin = Some(margin);
    verdict.witness = witness;
    verdict
}

/// Checks the quadratic-recursion lemma for `g_{n+1} = gamma g_n + p g_n^2`,
/// `g_0 = m`, over `steps` iterations, with `1e-12` relative slack.
pub fn verify_lemma2<T: Real>(gamma: T, p: T, m: T, q: T, steps: usize) -> LemmaVerdict {
    let (zero, one) = (T::zero(), T::one());
    let mut hypotheses = vec![
        Check::flag("0 < gamma < 1", gamma > zero && gamma < one, None),
        Check::flag("gamma < q < 1", q > gamma && q < one, None),
        Check::flag("p > 0", p > zero, None),
        Check::flag("m > 0", m > zero, None),
    ];
    if hypotheses.iter().all(|c| c.holds) {
        hypotheses.push(Check::lt("m < (q - gamma) / p", f(m), f((q - gamma) / p)));
    }
    let mut verdict = LemmaVerdict::hypotheses_only("quadratic recursion", hypotheses);
    if !verdict.hypotheses_hold {
        return verdict;
    }
    let tol = T::lit(1e-12);
    let mut g = m;
    let mut envelope = m;
    let mut margin = f64::INFINITY;
    let mut witness = None;
    for n in 0..=steps {
        let rel = f((envelope - g) / envelope);
        margin = margin.min(rel);
        if witness.is_none() && g > envelope * (one + tol) {
            witness = Some(Witness {
                index: n,
                t: n as f64,
                value: f(g),
                bound: f(envelope),
            });
        }
        g = gamma * g + p * g * g;
        envelope *= q;
    }
    verdict.conclusion_holds = Some(witness.is_none());
    verdict.conclusion_margin = Some(margin);
    verdict.witness = witness;
    verdict.note = Some("conclusion margin is relative to m q^n".into());
    verdict
}

/// Checks a solver trace against `|u(t) - y| < sqrt(a(t)) / lambda`.
pub fn check_lemma1_against_trace<T: Real>(trace: &Trace<T>, schedule: &Schedule<T>, lambda: T) -> LemmaVerdict {
    let has_errors = !trace.is_empty() && trace.rows.iter().all(|r| r.error.is_some());
    let hypotheses = vec![
        Check::flag("trace carries the error column", has_errors, None),
        Check::flag("lambda > 0", lambda > T::zero(), None),
    ];
    let mut verdict = LemmaVerdict::hypotheses_only("flow envelope on trace", hypotheses);
    if !verdict.hypotheses_hold {
        return verdict;
    }
    let mut margin = f64::INFINITY;
    let mut witness = None;
    for (index, row) in trace.rows.iter().enumerate() {
        let bound = f(schedule.value(row.t).sqrt() / lambda);
        let value = f(row.error.expect("checked above"));
        margin = margin.min(bound - value);
        if witness.is_none() && !(bound - value >= STRICT_MARGIN) {
            witness = Some(Witness {
                index,
                t: f(row.t),
                value,
                bound,
            });
        }
    }
    verdict.conclusion_holds = Some(witness.is_none());
    verdict.conclusion_margin = Some(margin);
    verdict.witness = witness;
    verdict
}

/// Outcome of a seeded family of verifier runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub family: String,
    pub cases: usize,
    pub hypotheses_held: usize,
    pub confirmed: usize,
    /// Cases whose verdict changed when the step was halved (Lemma 1 only).
    pub unstable: usize,
    /// Smallest conclusion margin over the confirmed cases.
    pub min_margin: Option<f64>,
    pub first_failure: Option<LemmaVerdict>,
}

impl SweepSummary {
    fn new(family: &str) -> Self {
        Self {
            family: family.into(),
            cases: 0,
            hypotheses_held: 0,
            confirmed: 0,
            unstable: 0,
            min_margin: None,
            first_failure: None,
        }
    }

    fn record(&mut self, verdict: LemmaVerdict) {
        self.cases += 1;
        if verdict.hypotheses_hold {
            self.hypotheses_held += 1;
        }
        if verdict.confirmed() {
            self.confirmed += 1;
            if let Some(m) = verdict.conclusion_margin {
                self.min_margin = Some(self.min_margin.map_or(m, |old| old.min(m)));
            }
        } else if self.first_failure.is_none() {
            self.first_failure = Some(verdict);
        }
    }

    /// Every case met its hypotheses and its conclusion, with stable verdicts.
    pub fn all_confirmed(&self) -> bool {
        self.confirmed == self.cases && self.unstable == 0
    }
}

/// Random `(gamma, p, q)` with `m = 0.99 (q - gamma) / p`, run for `steps`.
pub fn lemma2_sweep(cases: usize, steps: usize, seed: u64) -> SweepSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut summary = SweepSummary::new("quadratic recursion, m = 0.99 (q - gamma) / p");
    for _ in 0..cases {
        let gamma: f64 = rng.random_range(0.01..0.99);
        let q = rng.random_range(gamma..1.0);
        let p = 10f64.powf(rng.random_range(-2.0..2.0));
        let m = 0.99 * (q - gamma) / p;
        summary.record(verify_lemma2(gamma, p, m, q, steps));
    }
    summary
}

/// Coefficient families for [`lemma1_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma1Family {
    /// Constant coefficients and constant `mu` meeting i)-iii) with positive margin.
    Constant,
    /// The continuous-flow instance with a power schedule, `lambda = 8 c0`,
    /// `8 lambda sqrt(a0) |v| <= 1` and `g0 lambda / sqrt(a0) < 1`.
    Flow,
}

/// A seeded member of `family` on `[0, horizon]`.
pub fn random_lemma1_instance(family: Lemma1Family, rng: &mut ChaCha8Rng, horizon: f64) -> Lemma1Instance<f64> {
    match family {
        Lemma1Family::Constant => {
            let gamma = rng.random_range(0.1..2.0);
            let mu = rng.random_range(0.5..5.0);
            let alpha = rng.random_range(0.0..0.9) * mu * gamma / 2.0;
            let beta = rng.random_range(0.0..0.9) * gamma / (2.0 * mu);
            let g0 = rng.random_range(0.0..0.99) / mu;
            Lemma1Instance::constant(gamma, alpha, beta, mu, g0, horizon)
        }
        Lemma1Family::Flow => {
            let c0: f64 = rng.random_range(0.1..5.0);
            let a0: f64 = rng.random_range(0.1..10.0);
            let decay = rng.random_range(0.01..=0.5);
            let lambda = 8.0 * c0;
            let v_norm = rng.random_range(0.0..=1.0) / (8.0 * lambda * a0.sqrt());
            let g0 = rng.random_range(0.0..0.99) * a0.sqrt() / lambda;
            let schedule = Schedule::power(a0, decay).expect("sampled schedule is valid");
            Lemma1Instance::continuous_flow(schedule, c0, lambda, v_norm, g0, horizon)
        }
    }
}

/// Runs [`verify_lemma1`] on `cases` seeded instances at `dt` and `dt / 2`,
/// counting verdicts that differ between the two steps as unstable.
pub fn lemma1_sweep(family: Lemma1Family, cases: usize, horizon: f64, dt: f64, seed: u64) -> SweepSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = match family {
        Lemma1Family::Constant => "differential inequality, constant coefficients",
        Lemma1Family::Flow => "differential inequality, flow instance with lambda = 8 c0",
    };
    let mut summary = SweepSummary::new(name);
    for _ in 0..cases {
        let inst = random_lemma1_instance(family, &mut rng, horizon);
        let coarse = verify_lemma1(&inst, dt);
        let fine = verify_lemma1(&inst, dt / 2.0);
        if coarse.confirmed() != fine.confirmed() {
            summary.unstable += 1;
        }
        summary.record(coarse);
    }
    summary
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::TraceRow;

    fn constants(g0: f64) -> Lemma1Instance<f64> {
        Lemma1Instance::constant(0.5, 0.125, 0.125, 2.0, g0, 100.0)
    }

    fn margin_of(v: &LemmaVerdict, prefix: &str) -> f64 {
        v.hypotheses
            .iter()
            .find(|c| c.name.starts_with(prefix))
            .and_then(|c| c.margin)
            .unwrap()
    }

    #[test]
    fn constant_instance_conditions() {
        let v = check_lemma1_conditions(&constants(0.4), 100);
        assert!(v.hypotheses_hold, "{}", v.to_json());
        // i) (mu/2) gamma = 1/2 against alpha = 1/8.
        assert!((margin_of(&v, "i)") - 0.375).abs() < 1e-15);
        // ii) gamma / (2 mu) = 1/8 against beta = 1/8: zero margin, admitted.
        assert_eq!(margin_of(&v, "ii)"), 0.0);
        assert!(!check_lemma1_conditions(&constants(0.5), 100).hypotheses_hold);
        assert!(check_lemma1_conditions(&constants(0.49), 100).hypotheses_hold);
    }

    #[test]
    fn degenerate_linear_instance() {
        let inst = Lemma1Instance::constant(0.7, 0.0, 0.0, 3.0, 0.3, 10.0);
        let v = verify_lemma1(&inst, 0.01);
        assert!(v.confirmed());
    }

    #[test]
    fn constant_instance_conclusion() {
        // Equilibria of g' = -g/2 + g^2/8 + 1/8 are 2 -+ sqrt(3); the lower one
        // (0.268) attracts g0 = 0.4 and stays below 1/mu = 0.5.
        let v = verify_lemma1(&constants(0.4), 0.01);
        assert!(v.confirmed(), "{}", v.to_json());
        assert!(v.conclusion_margin.unwrap() > 0.09);
    }

    #[test]
    fn zero_solution() {
        let inst = Lemma1Instance::constant(0.5, 0.2, 0.0, 2.0, 0.0, 50.0);
        let v = verify_lemma1(&inst, 0.05);
        assert!(v.confirmed());
        assert!((v.conclusion_margin.unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn flow_instance_with_critical_lambda() {
        let s = Schedule::power(2.0, 0.5).unwrap();
        let (c0, lambda) = (0.75, 6.0);
        let v_norm = 1.0 / (8.0 * lambda * 2f64.sqrt());
        let inst = Lemma1Instance::continuous_flow(s, c0, lambda, v_norm, 0.2, 100.0);
        let cond = check_lemma1_conditions(&inst, 2000);
        assert!(cond.hypotheses_hold, "{}", cond.to_json());
        assert!(margin_of(&cond, "i)") >= -1e-15);
        let v = verify_lemma1(&inst, 0.01);
        assert!(v.confirmed(), "{}", v.to_json());
    }

    #[test]
    fn failed_hypotheses_skip_the_conclusion() {
        let inst = Lemma1Instance::constant(0.5, 2.0, 0.125, 2.0, 0.4, 10.0);
        let v = verify_lemma1(&inst, 0.01);
        assert!(!v.hypotheses_hold);
        assert_eq!(v.conclusion_holds, None);
    }

    #[test]
    fn lemma2_examples() {
        let v = verify_lemma2(0.5, 1.0, 0.3, 0.9, 200);
        assert!(v.confirmed(), "{}", v.to_json());
        let v = verify_lemma2(0.5, 1.0, 1e-9, 0.9, 200);
        assert!(v.confirmed());
        let v = verify_lemma2(0.5, 1.0, 0.6, 0.9, 200);
        assert!(!v.hypotheses_hold);
        assert_eq!(v.conclusion_holds, None);
        let v = verify_lemma2(0.95, 1.0, 0.01, 0.9, 10);
        assert!(!v.hypotheses_hold);
    }

    #[test]
    fn trace_checks() {
        let s = Schedule::power(4.0, 0.5).unwrap();
        let mut trace = Trace::new();
        for n in 0..5 {
            let t = n as f64;
            trace.push(TraceRow {
                n,
                t,
                a: s.value(t),
                residual: 0.0,
                error: Some(0.0),
                bound: None,
            });
        }
        assert!(check_lemma1_against_trace(&trace, &s, 1.0).confirmed());
        trace.rows[3].error = Some(2.0 * s.value(3.0).sqrt());
        let v = check_lemma1_against_trace(&trace, &s, 1.0);
        assert_eq!(v.conclusion_holds, Some(false));
        assert_eq!(v.witness.unwrap().index, 3);
        trace.rows[0].error = None;
        assert!(!check_lemma1_against_trace(&trace, &s, 1.0).hypotheses_hold);
    }
}
