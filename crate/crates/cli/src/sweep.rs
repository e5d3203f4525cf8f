//! (χ, ξ) parameter sweeps: one run per grid point, isolated output
//! subdirectories, and a deterministic summary CSV.

use crate::config::RunSpec;
use crate::runner;
use pursuit_core::analysis::BoundVerdict;
use pursuit_core::Termination;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: RunSpec,
    pub chi_values: Vec<f64>,
    pub xi_values: Vec<f64>,
}

#[derive(Debug, Clone)]
struct SweepRow {
    chi: f64,
    xi: f64,
    outcome: String,
    sup_u: Option<f64>,
    sup_v: Option<f64>,
    max_c2proxy: Option<f64>,
    picard_iters_max: Option<u32>,
}

impl SweepRow {
    fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.chi,
            self.xi,
            self.outcome,
            opt(self.sup_u),
            opt(self.sup_v),
            opt(self.max_c2proxy),
            self.picard_iters_max
                .map(|n| n.to_string())
                .unwrap_or_default(),
        )
    }
}

fn run_point(spec: &RunSpec, chi: f64, xi: f64, out_dir: &Path) -> SweepRow {
    let mut point_spec = spec.clone();
    point_spec.model.chi = chi;
    point_spec.model.xi = xi;

    let mut row = SweepRow {
        chi,
        xi,
        outcome: String::new(),
        sup_u: None,
        sup_v: None,
        max_c2proxy: None,
        picard_iters_max: None,
    };

    let problem = match runner::build_problem(&point_spec) {
        Ok(p) => p,
        Err(message) => {
            row.outcome = format!("error({message})");
            return row;
        }
    };
    let execution = match runner::execute(&point_spec, &problem) {
        Ok(exec) => exec,
        Err(message) => {
            row.outcome = format!("error({message})");
            return row;
        }
    };
    if let Err(message) = runner::write_outputs(&point_spec, &problem, &execution, out_dir) {
        row.outcome = format!("error({message})");
        return row;
    }

    row.outcome = match (&execution.result.trace.termination, &execution.bounds) {
        (Termination::Blowup { .. }, _) => "blowup".into(),
        (Termination::SolverFailure { .. }, _) => "solver_failure".into(),
        (Termination::Completed, Some(b)) if b.verdict == BoundVerdict::Violated => {
            "violated".into()
        }
        (Termination::Completed, _) => "completed".into(),
    };
    if let Some(last) = execution.result.trace.records.last() {
        row.sup_u = Some(last.sup_u);
        row.sup_v = Some(last.sup_v);
    }
    row.max_c2proxy = Some(
        execution
            .result
            .trace
            .records
            .iter()
            .fold(0.0_f64, |m, r| m.max(r.c2proxy_u + r.c2proxy_v)),
    );
    row.picard_iters_max = execution
        .result
        .trace
        .records
        .iter()
        .filter_map(|r| r.picard_iters)
        .max();
    row
}

/// Runs every (χ, ξ) pair, writing each point's files under
/// `out/point_{i}_{j}/` and the summary under `out/sweep.csv`. Rows appear
/// in ascending (χ, ξ) order regardless of input order; points run
/// concurrently up to `jobs` threads; failures are recorded in-row and the
/// sweep continues. Returns 0 unless the sweep itself cannot run.
pub fn run_sweep(spec: &SweepSpec, out_dir: &Path, jobs: usize) -> i32 {
    if spec.chi_values.is_empty() || spec.xi_values.is_empty() {
        eprintln!("error: sweep needs non-empty chi and xi lists");
        return 1;
    }
    if let Err(e) = std::fs::create_dir_all(out_dir) {
        eprintln!("error: cannot create output directory {}: {e}", out_dir.display());
        return 1;
    }
    let mut chi_values = spec.chi_values.clone();
    let mut xi_values = spec.xi_values.clone();
    chi_values.sort_by(|a, b| a.partial_cmp(b).expect("finite chi values"));
    xi_values.sort_by(|a, b| a.partial_cmp(b).expect("finite xi values"));

    let points: Vec<(usize, usize)> = (0..chi_values.len())
        .flat_map(|i| (0..xi_values.len()).map(move |j| (i, j)))
        .collect();
    let rows: Mutex<Vec<Option<SweepRow>>> = Mutex::new(vec![None; points.len()]);
    let next = AtomicUsize::new(0);
    let workers = jobs.max(1).min(points.len());

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= points.len() {
                    break;
                }
                let (i, j) = points[k];
                let point_dir = out_dir.join(format!("point_{i}_{j}"));
                let row = run_point(&spec.base, chi_values[i], xi_values[j], &point_dir);
                rows.lock().expect("sweep rows")[k] = Some(row);
            });
        }
    });

    let rows = rows.into_inner().expect("sweep rows");
    let mut csv = String::from("chi,xi,outcome,sup_u,sup_v,max_c2proxy,picard_iters_max\n");
    for row in rows {
        let row = row.expect("all points executed");
        let _ = writeln!(csv, "{}", row.to_csv());
    }
    let path = out_dir.join("sweep.csv");
    if let Err(e) = std::fs::write(&path, csv) {
        eprintln!("error: cannot write {}: {e}", path.display());
        return 1;
    }
    0
}
