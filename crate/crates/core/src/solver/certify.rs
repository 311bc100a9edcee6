//! Pre-run hypothesis certification.
//!
//! Each inequality the convergence guarantees rely on is listed with both
//! sides and its margin, so that a run outside the guaranteed regime can be
//! told apart from a run that failed.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;
use crate::schedule::Schedule;

/// Margin required before a strict inequality counts as satisfied.
pub const STRICT_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    /// `rhs - lhs`; absent when an input was unavailable.
    pub margin: Option<f64>,
    pub strict: bool,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// `lhs <= rhs`, up to a relative rounding slack of `1e-12`.
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        let slack = 1e-12 * rhs.abs().max(1.0);
        Self {
            name: name.into(),
            lhs: Some(lhs),
            rhs: Some(rhs),
            margin: Some(margin),
            strict: false,
            holds: lhs.is_finite() && margin >= -slack,
            note: None,
        }
    }

    /// `lhs < rhs`, with at least [`STRICT_MARGIN`] to spare.
    pub fn lt(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        Self {
            name: name.into(),
            lhs: Some(lhs),
            rhs: Some(rhs),
            margin: Some(margin),
            strict: true,
            holds: lhs.is_finite() && margin >= STRICT_MARGIN,
            note: None,
        }
    }

    pub fn unavailable(name: impl Into<String>, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            lhs: None,
            rhs: None,
            margin: None,
            strict: false,
            holds: false,
            note: Some(note.into()),
        }
    }

    pub fn flag(name: impl Into<String>, holds: bool, note: Option<String>) -> Self {
        Self {
            name: name.into(),
            lhs: None,
            rhs: None,
            margin: None,
            strict: false,
            holds,
            note,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certification {
    pub theorem: String,
    pub checks: Vec<Check>,
}

impl Certification {
    pub fn all_hold(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.holds)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.holds)
    }

    pub fn summary(&self) -> String {
        let failed: Vec<&str> = self.failed().map(|c| c.name.as_str()).collect();
        if failed.is_empty() {
            format!("{}: all {} hypotheses certified", self.theorem, self.checks.len())
        } else {
            format!("{}: not certified ({})", self.theorem, failed.join("; "))
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certification serializes")
    }
}

/// Inputs shared by the three certifications.
#[derive(Debug, Clone, Copy)]
pub struct HypothesisInputs<T> {
    pub m1: Option<T>,
    pub m2: Option<T>,
    pub c0: Option<T>,
    pub lambda: T,
    pub v_norm: Option<T>,
    /// Initial error `|u0 - y|`.
    pub g0: Option<T>,
    pub radius: T,
}

fn f<T: Real>(x: T) -> f64 {
    x.to_f64_lossy()
}

fn common_checks<T: Real>(inp: &HypothesisInputs<T>, checks: &mut Vec<Check>) {
    match inp.c0 {
        Some(c0) => checks.push(Check::le("lambda >= 8 c0", 8.0 * f(c0), f(inp.lambda))),
        None => checks.push(Check::unavailable("lambda >= 8 c0", "no smoothness bounds")),
    }
    match (inp.m1, inp.m2, inp.v_norm) {
        (Some(m1), Some(m2), Some(v)) => {
            checks.push(Check::le("2 M1 M2 |v| <= 1/2", 2.0 * f(m1) * f(m2) * f(v), 0.5))
        }
        _ => checks.push(Check::unavailable(
            "2 M1 M2 |v| <= 1/2",
            "needs smoothness bounds and a source element v",
        )),
    }
}

fn schedule_check<T: Real>(schedule: &Schedule<T>, checks: &mut Vec<Check>) {
    let cert = schedule.validate();
    checks.push(Check {
        name: "schedule: sup |a'|/a <= 1/2, a -> 0".into(),
        lhs: Some(f(cert.supremum)),
        rhs: Some(0.5),
        margin: Some(0.5 - f(cert.supremum)),
        strict: false,
        holds: cert.valid,
        note: cert.reason,
    });
}

fn envelope_checks<T: Real>(
    inp: &HypothesisInputs<T>,
    a0: T,
    v_rhs: f64,
    checks: &mut Vec<Check>,
) {
    let sqrt_a0 = f(a0).sqrt();
    let lambda = f(inp.lambda);
    let name = if v_rhs == 1.0 {
        "8 lambda sqrt(a0) |v| <= 1"
    } else {
        "8 lambda sqrt(a0) |v| <= 1/2"
    };
    match inp.v_norm {
        Some(v) => checks.push(Check::le(name, 8.0 * lambda * sqrt_a0 * f(v), v_rhs)),
        None => checks.push(Check::unavailable(name, "no source element v")),
    }
    match inp.g0 {
        Some(g0) => checks.push(Check::lt("g(0) lambda / sqrt(a0) < 1", f(g0) * lambda / sqrt_a0, 1.0)),
        None => checks.push(Check::unavailable("g(0) lambda / sqrt(a0) < 1", "no known solution")),
    }
}

/// Hypotheses under which the continuous flow obeys `|u(t) - y| < sqrt(a(t)) / lambda`.
pub fn certify_continuous<T: Real>(inp: &HypothesisInputs<T>, schedule: &Schedule<T>) -> Certification {
    let mut checks = Vec::new();
    schedule_check(schedule, &mut checks);
    common_checks(inp, &mut checks);
    envelope_checks(inp, schedule.a0, 1.0, &mut checks);
    Certification {
        theorem: "continuous flow envelope".into(),
        checks,
    }
}

/// Hypotheses for the noisy-data flow stopped at `t_delta`. The source
/// condition is tightened to `8 lambda sqrt(a0) |v| <= 1/2`.
pub fn certify_noisy<T: Real>(
    inp: &HypothesisInputs<T>,
    schedule: &Schedule<T>,
    delta: T,
    data_misfit: Option<T>,
) -> Certification {
    let mut checks = Vec::new();
    schedule_check(schedule, &mut checks);
    common_checks(inp, &mut checks);
    envelope_checks(inp, schedule.a0, 0.5, &mut checks);
    checks.push(Check::lt(
        "8 lambda delta < a0",
        8.0 * f(inp.lambda) * f(delta),
        f(schedule.a0),
    ));
    match data_misfit {
        Some(m) => checks.push(Check::le("|f_delta - F(y)| <= delta", f(m), f(delta))),
        None => checks.push(Check::unavailable("|f_delta - F(y)| <= delta", "no known solution")),
    }
    Certification {
        theorem: "noisy-data flow with stopping time".into(),
        checks,
    }
}

/// Hypotheses for the geometric decay `|u_n - y| <= g0 q^n` of the discrete
/// iteration with `a_n = 16 c0^2 |u_n - y|^2`.
///
/// Two smallness conditions on `m = g0` are listed: the threshold
/// `(q + h - 1) / (16 c0 h |v|)` in its customary form, and the threshold
/// `(q - (1 - h/4)) / (16 c0^2 h |v|)` that follows from the one-step
/// recursion `g_{n+1} <= (1 - h/4) g_n + 16 c0^2 h |v| g_n^2` via the
/// quadratic-recursion lemma. Both must hold.
pub fn certify_iterative<T: Real>(
    inp: &HypothesisInputs<T>,
    h: T,
    q: T,
    oracle_policy: bool,
) -> Certification {
    let mut checks = vec![Check::flag(
        "a_n = 16 c0^2 g_n^2 (oracle policy)",
        oracle_policy,
        (!oracle_policy).then(|| "policy does not follow the analyzed schedule".to_string()),
    )];
    common_checks(inp, &mut checks);
    let (h, q) = (f(h), f(q));
    checks.push(Check::lt("1 - h/4 < q", 1.0 - h / 4.0, q));
    match (inp.c0, inp.v_norm, inp.g0) {
        (Some(c0), Some(v), Some(m)) => {
            let (c0, v, m) = (f(c0), f(v), f(m));
            let stated = if c0 * v > 0.0 {
                (q + h - 1.0) / (16.0 * c0 * h * v)
            } else {
                f64::INFINITY
            };
            checks.push(Check::lt("m < (q + h - 1) / (16 c0 h |v|)", m, stated));
            let derived = if c0 * c0 * v > 0.0 {
                (q - (1.0 - h / 4.0)) / (16.0 * c0 * c0 * h * v)
            } else {
                f64::INFINITY
            };
            checks.push(Check::lt(
                "m < (q - 1 + h/4) / (16 c0^2 h |v|)",
                m,
                derived,
            ));
            checks.push(Check::le("m <= R", m, f(inp.radius)));
        }
        _ => checks.push(Check::unavailable(
            "m < (q + h - 1) / (16 c0 h |v|)",
            "needs bounds, v and a known solution",
        )),
    }
    Certification {
        theorem: "discrete iteration geometric decay".into(),
        checks,
    }
}
