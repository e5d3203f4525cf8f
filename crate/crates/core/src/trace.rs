//! Per-run norm traces and termination records shared by both solvers.

use crate::grid::Field;
use crate::norms::{c2_norm_proxy, l2_norm, min_value, sup_norm};

/// Norm snapshot of one recorded time level.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub sup_u: f64,
    pub min_u: f64,
    pub sup_v: f64,
    pub min_v: f64,
    pub l2_u: f64,
    pub l2_v: f64,
    pub c2proxy_u: f64,
    pub c2proxy_v: f64,
    /// Fixed-point iteration count of the slab ending at `t` (Picard runs only).
    pub picard_iters: Option<u32>,
}

impl TraceRecord {
    pub fn measure(t: f64, u: &Field, v: &Field, picard_iters: Option<u32>) -> Self {
        TraceRecord {
            t,
            sup_u: sup_norm(u),
            min_u: min_value(u),
            sup_v: sup_norm(v),
            min_v: min_value(v),
            l2_u: l2_norm(u),
            l2_v: l2_norm(v),
            c2proxy_u: c2_norm_proxy(u),
            c2proxy_v: c2_norm_proxy(v),
            picard_iters,
        }
    }
}

/// How a run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    /// Sup norm exceeded the configured threshold or values went non-finite.
    Blowup { time: f64 },
    /// CFL rejection, linear-solver divergence or fixed-point failure.
    SolverFailure { time: f64, reason: String },
}

impl Termination {
    pub fn label(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::Blowup { .. } => "blowup",
            Termination::SolverFailure { .. } => "solver_failure",
        }
    }
}

/// Recorded norms of a trajectory plus its termination record.
///
/// Record times are strictly increasing; all records are finite except
/// possibly the last one of a blown-up run.
#[derive(Debug, Clone, PartialEq)]
pub struct NormTrace {
    pub records: Vec<TraceRecord>,
    pub termination: Termination,
}

impl NormTrace {
    pub fn completed(records: Vec<TraceRecord>) -> Self {
        NormTrace {
            records,
            termination: Termination::Completed,
        }
    }

    pub fn max_sup_u(&self) -> f64 {
        self.records.iter().fold(0.0, |m, r| m.max(r.sup_u))
    }

    pub fn max_sup_v(&self) -> f64 {
        self.records.iter().fold(0.0, |m, r| m.max(r.sup_v))
    }

    pub fn min_min_u(&self) -> f64 {
        self.records.iter().fold(f64::INFINITY, |m, r| m.min(r.min_u))
    }

    pub fn min_min_v(&self) -> f64 {
        self.records.iter().fold(f64::INFINITY, |m, r| m.min(r.min_v))
    }
}

/// Full output of a run: the norm trace, the terminal state fields, and any
/// requested intermediate snapshots.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub trace: NormTrace,
    pub final_u: Field,
    pub final_v: Field,
    pub final_t: f64,
    /// (time, u, v) triples captured at the first step boundary at or after
    /// each requested snapshot time.
    pub snapshots: Vec<(f64, Field, Field)>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn record_measures_norms() {
        let g = Grid::new_1d(1.0, 10).unwrap();
        let u = Field::constant(g, 2.0);
        let v = Field::constant(g, -1.0);
        let r = TraceRecord::measure(0.5, &u, &v, Some(3));
        assert_eq!(r.t, 0.5);
        assert_eq!(r.sup_u, 2.0);
        assert_eq!(r.min_v, -1.0);
        assert_eq!(r.picard_iters, Some(3));
    }

    #[test]
    fn trace_extrema() {
        let g = Grid::new_1d(1.0, 10).unwrap();
        let mk = |t: f64, a: f64| {
            TraceRecord::measure(t, &Field::constant(g, a), &Field::constant(g, a / 2.0), None)
        };
        let trace = NormTrace::completed(vec![mk(0.0, 1.0), mk(1.0, 3.0), mk(2.0, 2.0)]);
        assert_eq!(trace.max_sup_u(), 3.0);
        assert_eq!(trace.max_sup_v(), 1.5);
        assert_eq!(trace.termination.label(), "completed");
    }
}
