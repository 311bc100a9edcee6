use std::fmt::Write as _;
use std::io;

use crate::scalar::Real;

/// CSV header of a serialized [`Trace`].
pub const TRACE_HEADER: &str = "n,t,a,residual,error,bound";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow<T> {
    pub n: usize,
    pub t: T,
    pub a: T,
    /// `|F(u)|` (or `|F(u) - f_delta|` for noisy data).
    pub residual: T,
    /// `|u - y|`, present iff the problem has a known solution.
    pub error: Option<T>,
    /// The theorem envelope the error is compared against.
    pub bound: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace<T> {
    pub rows: Vec<TraceRow<T>>,
}

impl<T: Real> Trace<T> {
    pub fn new() -> Self {
        Self { rows: Vec::new() }
    }

    pub fn push(&mut self, row: TraceRow<T>) {
        debug_assert!(self.rows.last().is_none_or(|last| row.t > last.t));
        debug_assert!(row.a > T::zero());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRow<T>> {
        self.rows.last()
    }

    /// Serializes with the header `n,t,a,residual,error,bound`; absent
    /// optionals become empty fields. Numbers use the shortest round-trip
    /// representation, so identical runs give identical bytes.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(TRACE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{},{},{},", r.n, r.t, r.a, r.residual);
            if let Some(e) = r.error {
                let _ = write!(out, "{e}");
            }
            out.push(',');
            if let Some(b) = r.bound {
                let _ = write!(out, "{b}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.to_csv_string().as_bytes())
    }
}

/// Least-squares fit of `log(error) ~ log(g0) + n log(q)` over the rows with
/// an error above `1e-14`; returns `q`. Needs at least five such rows.
pub fn fit_geometric_rate<T: Real>(trace: &Trace<T>) -> Option<T> {
    let floor = 1e-14;
    let points: Vec<(f64, f64)> = trace
        .rows
        .iter()
        .filter_map(|r| {
            let e = r.error?.to_f64_lossy();
            (e > floor && e.is_finite()).then(|| (r.n as f64, e.ln()))
        })
        .collect();
    if points.len() < 5 {
        return None;
    }
    let k = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / k;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return None;
    }
    T::from_f64((sxy / sxx).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace_from_errors(errors: &[f64]) -> Trace<f64> {
        let mut t = Trace::new();
        for (n, &e) in errors.iter().enumerate() {
            t.push(TraceRow {
                n,
                t: n as f64,
                a: 1.0,
                residual: e,
                error: Some(e),
                bound: None,
            });
        }
        t
    }

    #[test]
    fn exact_geometric_sequence() {
        let errors: Vec<f64> = (0..=10).map(|n| 0.3 * 0.9f64.powi(n)).collect();
        let q = fit_geometric_rate(&trace_from_errors(&errors)).unwrap();
        assert!((q - 0.9).abs() <= 1e-9, "q = {q}");
    }

    #[test]
    fn constant_sequence_has_unit_rate() {
        let q = fit_geometric_rate(&trace_from_errors(&[0.2; 8])).unwrap();
        assert!((q - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn too_few_rows() {
        assert!(fit_geometric_rate(&trace_from_errors(&[1.0, 0.5, 0.25, 0.125])).is_none());
        assert!(fit_geometric_rate(&trace_from_errors(&[1.0, 1e-15, 1e-16, 0.0, 0.0, 0.0])).is_none());
    }

    #[test]
    fn csv_layout() {
        let mut t = Trace::<f64>::new();
        t.push(TraceRow {
            n: 0,
            t: 0.0,
            a: 4.0,
            residual: 0.4,
            error: Some(0.4),
            bound: Some(2.0),
        });
        t.push(TraceRow {
            n: 1,
            t: 0.01,
            a: 3.98,
            residual: 0.39,
            error: None,
            bound: None,
        });
        assert_eq!(
            t.to_csv_string(),
            "n,t,a,residual,error,bound\n0,0,4,0.4,0.4,2\n1,0.01,3.98,0.39,,\n"
        );
    }
}
