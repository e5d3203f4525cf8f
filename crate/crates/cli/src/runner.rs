//! Builds a run from a [`RunSpec`], executes it, and writes the output
//! files: `norms.csv`, per-time snapshots, `metadata.json`, and
//! `bounds_report.txt`.
//!
//! Exit status contract: 0 completed (bounds pass), 1 usage or solver
//! error, 2 bound violation, 3 blow-up.

use crate::config::{serialize_config, InitProfile, RunSpec, SolverChoice};
use pursuit_core::analysis::{bound_monitor_with_slack, BoundReport, BoundVerdict};
use pursuit_core::imex::{run_imex, Observers};
use pursuit_core::norms::c2alpha_norm_proxy;
use pursuit_core::picard::run_picard;
use pursuit_core::{
    check_taxis_admissible, derive_constants, AdmissibilityReport, DerivedConstants, Field,
    Grid, InitialDataNorms, NormTrace, PicardControl, RunResult, State,
    StepControl, Termination,
};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug)]
pub struct Problem {
    pub grid: Grid,
    pub initial: State,
    pub norms: InitialDataNorms,
    pub constants: DerivedConstants,
    pub admissibility: AdmissibilityReport,
    pub blowup_threshold: f64,
}

pub struct Execution {
    pub result: RunResult,
    pub bounds: Option<BoundReport>,
    pub exit_code: i32,
}

fn build_grid(spec: &RunSpec) -> Result<Grid, String> {
    let d = &spec.domain;
    let grid = if d.dim() == 1 {
        Grid::new_1d(d.extent_x, d.cells_x)
    } else {
        Grid::new_2d(
            d.extent_x,
            d.extent_y.expect("validated"),
            d.cells_x,
            d.cells_y.expect("validated"),
        )
    };
    grid.map_err(|e| e.to_string())
}

fn cosine_profile(grid: Grid, base: f64, amp: f64, mode_x: usize, mode_y: usize) -> Field {
    Field::from_fn(grid, |x, y| {
        let px = (mode_x as f64 * std::f64::consts::PI * x / grid.extent_x()).cos();
        let shape = if grid.dim() == 1 {
            px
        } else {
            px * (mode_y as f64 * std::f64::consts::PI * y / grid.extent_y()).cos()
        };
        base + amp * shape
    })
}

fn read_snapshot_fields(path: &str, grid: Grid) -> Result<(Field, Field), String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read init.file `{path}`: {e}"))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| format!("`{path}` is empty"))?;
    let expected = if grid.dim() == 1 { "x,u,v" } else { "x,y,u,v" };
    if header.trim() != expected {
        return Err(format!(
            "`{path}`: expected header `{expected}`, got `{header}`"
        ));
    }
    let coord_cols = grid.dim();
    let mut u = Vec::with_capacity(grid.cell_count());
    let mut v = Vec::with_capacity(grid.cell_count());
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != coord_cols + 2 {
            return Err(format!("`{path}` row {}: expected {} columns", i + 2, coord_cols + 2));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("`{path}` row {}: bad number `{s}`", i + 2))
        };
        u.push(parse(cols[coord_cols])?);
        v.push(parse(cols[coord_cols + 1])?);
    }
    let fu = Field::from_values(grid, u).map_err(|e| format!("`{path}`: {e}"))?;
    let fv = Field::from_values(grid, v).map_err(|e| format!("`{path}`: {e}"))?;
    Ok((fu, fv))
}

fn build_initial(spec: &RunSpec, grid: Grid) -> Result<(Field, Field), String> {
    let init = &spec.init;
    let (u, v) = match init.profile {
        InitProfile::Constant => (
            Field::constant(grid, init.u0),
            Field::constant(grid, init.v0),
        ),
        InitProfile::CosineBump => (
            cosine_profile(grid, init.u0, init.amp_u, init.mode_x, init.mode_y),
            cosine_profile(grid, init.v0, init.amp_v, init.mode_x, init.mode_y),
        ),
        InitProfile::Equilibrium => {
            let (us, vs) = pursuit_core::model::coexistence_equilibrium(&spec.model)
                .ok_or("init.profile = equilibrium, but the model has no coexistence equilibrium")?;
            (Field::constant(grid, us), Field::constant(grid, vs))
        }
        InitProfile::File => {
            let path = init.file.as_deref().expect("validated");
            read_snapshot_fields(path, grid)?
        }
    };
    let min = pursuit_core::norms::min_value(&u).min(pursuit_core::norms::min_value(&v));
    if min < 0.0 {
        return Err(format!(
            "initial data must be non-negative, found minimum {min}"
        ));
    }
    Ok((u, v))
}

pub fn build_problem(spec: &RunSpec) -> Result<Problem, String> {
    let grid = build_grid(spec)?;
    let (u0, v0) = build_initial(spec, grid)?;
    let norms = InitialDataNorms {
        norm_u0_c2alpha: spec
            .norms
            .u0_c2alpha
            .unwrap_or_else(|| c2alpha_norm_proxy(&u0, spec.norms.alpha)),
        norm_v0_c2alpha: spec
            .norms
            .v0_c2alpha
            .unwrap_or_else(|| c2alpha_norm_proxy(&v0, spec.norms.alpha)),
        alpha: spec.norms.alpha,
    };
    let mut constants = derive_constants(&spec.model, &norms).map_err(|e| e.to_string())?;
    constants.schauder_p = spec.norms.schauder_p;
    let admissibility = check_taxis_admissible(&spec.model, &constants);
    let blowup_threshold = spec.solver.blowup_threshold.unwrap_or_else(|| {
        1e6 * (constants.sigma * constants.sigma).max(constants.sigma)
    });
    let initial = State::new(u0, v0, 0.0).map_err(|e| e.to_string())?;
    Ok(Problem {
        grid,
        initial,
        norms,
        constants,
        admissibility,
        blowup_threshold,
    })
}

pub fn step_control(spec: &RunSpec, problem: &Problem) -> StepControl {
    StepControl {
        dt: spec.solver.dt,
        cfl_safety: spec.solver.cfl_safety,
        max_time: spec.solver.max_time,
        blowup_threshold: problem.blowup_threshold,
    }
}

pub fn picard_control(spec: &RunSpec, problem: &Problem) -> PicardControl {
    PicardControl {
        step: step_control(spec, problem),
        slab_steps: spec.solver.slab_steps,
        fp_tol: spec.solver.fp_tol,
        fp_max_iter: spec.solver.fp_max_iter,
    }
}

/// Runs the configured solver and grades the outcome.
pub fn execute(spec: &RunSpec, problem: &Problem) -> Result<Execution, String> {
    let obs = Observers {
        record_stride: spec.observers.stride,
        snapshot_times: spec.output.snapshot_times.clone(),
    };
    let result = match spec.solver.kind {
        SolverChoice::Imex => run_imex(
            &problem.initial,
            &spec.model,
            &step_control(spec, problem),
            &obs,
        ),
        SolverChoice::Picard => run_picard(
            &problem.initial,
            &spec.model,
            &problem.constants,
            &picard_control(spec, problem),
            &obs,
        ),
    }
    .map_err(|e| e.to_string())?;

    let bounds = if spec.observers.check_bounds {
        Some(bound_monitor_with_slack(
            &result.trace,
            &problem.constants,
            spec.observers.bound_slack,
        ))
    } else {
        None
    };

    let exit_code = match (&result.trace.termination, &bounds) {
        (Termination::SolverFailure { .. }, _) => 1,
        (Termination::Blowup { .. }, _) => 3,
        (Termination::Completed, Some(report)) => match report.verdict {
            BoundVerdict::Pass => 0,
            BoundVerdict::Violated => 2,
            BoundVerdict::Blowup => 3,
        },
        (Termination::Completed, None) => 0,
    };
    Ok(Execution {
        result,
        bounds,
        exit_code,
    })
}

pub fn format_norms_csv(trace: &NormTrace) -> String {
    let mut out = String::from(
        "t,sup_u,min_u,sup_v,min_v,l2_u,l2_v,c2proxy_u,c2proxy_v,picard_iters\n",
    );
    for r in &trace.records {
        let iters = match r.picard_iters {
            Some(n) => n.to_string(),
            None => String::new(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.t, r.sup_u, r.min_u, r.sup_v, r.min_v, r.l2_u, r.l2_v, r.c2proxy_u, r.c2proxy_v,
            iters
        );
    }
    out
}

pub fn format_snapshot_csv(grid: Grid, u: &Field, v: &Field) -> String {
    let mut out = String::new();
    if grid.dim() == 1 {
        out.push_str("x,u,v\n");
        for ix in 0..grid.nx() {
            let i = grid.idx(ix, 0);
            let _ = writeln!(out, "{},{},{}", grid.x_center(ix), u.values()[i], v.values()[i]);
        }
    } else {
        out.push_str("x,y,u,v\n");
        for ix in 0..grid.nx() {
            for iy in 0..grid.ny() {
                let i = grid.idx(ix, iy);
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    grid.x_center(ix),
                    grid.y_center(iy),
                    u.values()[i],
                    v.values()[i]
                );
            }
        }
    }
    out
}

pub fn format_bounds_report(report: &BoundReport) -> String {
    let mut out = String::new();
    for check in &report.bounds_checked {
        let violation = match check.first_violation {
            Some(t) => format!("first violation at t = {t}"),
            None => "no violation".into(),
        };
        let _ = writeln!(
            out,
            "{}: bound = {}, observed = {}, {}",
            check.name, check.bound, check.observed, violation
        );
    }
    let _ = writeln!(out, "max c2proxy sum: {}", report.max_c2proxy_sum);
    let _ = writeln!(out, "verdict: {}", report.verdict.label());
    out
}

fn json_number(value: f64) -> serde_json::Value {
    serde_json::Number::from_f64(value)
        .map(serde_json::Value::Number)
        .unwrap_or_else(|| serde_json::Value::String(value.to_string()))
}

/// Flat metadata object: resolved config keys, derived constants,
/// admissibility flags, and the termination record. `generated_at` holds a
/// unix timestamp and is the only non-deterministic entry.
pub fn format_metadata_json(
    spec: &RunSpec,
    problem: &Problem,
    termination: &Termination,
    final_t: f64,
    exit_code: i32,
    snapshot_times: &[f64],
) -> String {
    let mut map = serde_json::Map::new();
    for line in serialize_config(spec).lines() {
        let (key, value) = line.split_once(" = ").expect("canonical form");
        map.insert(
            format!("config.{key}"),
            serde_json::Value::String(value.to_string()),
        );
    }
    let dc = &problem.constants;
    for (key, value) in [
        ("derived.rho", dc.rho),
        ("derived.sigma", dc.sigma),
        ("derived.h1", dc.h1),
        ("derived.h2", dc.h2),
        ("derived.h3", dc.h3),
        ("derived.h4", dc.h4),
        ("derived.r_upper", dc.r_upper),
        ("derived.chi_max", dc.chi_max),
        ("derived.xi_max", dc.xi_max),
        ("norms.u0_c2alpha_resolved", problem.norms.norm_u0_c2alpha),
        ("norms.v0_c2alpha_resolved", problem.norms.norm_v0_c2alpha),
        ("solver.blowup_threshold_resolved", problem.blowup_threshold),
        ("admissibility.chi_margin", problem.admissibility.chi_margin),
        ("admissibility.xi_margin", problem.admissibility.xi_margin),
    ] {
        map.insert(key.to_string(), json_number(value));
    }
    if let Some(sp) = dc.schauder_p {
        map.insert("derived.schauder_p".into(), json_number(sp));
    }
    map.insert(
        "admissibility.note".into(),
        serde_json::Value::String(
            "upper-bound admissibility: thresholds use the computable branch of R".into(),
        ),
    );
    map.insert(
        "admissibility.chi_ok".into(),
        serde_json::Value::Bool(problem.admissibility.chi_ok),
    );
    map.insert(
        "admissibility.xi_ok".into(),
        serde_json::Value::Bool(problem.admissibility.xi_ok),
    );
    map.insert(
        "termination.reason".into(),
        serde_json::Value::String(termination.label().to_string()),
    );
    let time = match termination {
        Termination::Completed => final_t,
        Termination::Blowup { time } => *time,
        Termination::SolverFailure { time, .. } => *time,
    };
    map.insert("termination.time".into(), json_number(time));
    if let Termination::SolverFailure { reason, .. } = termination {
        map.insert(
            "termination.detail".into(),
            serde_json::Value::String(reason.clone()),
        );
    }
    for (i, t) in snapshot_times.iter().enumerate() {
        map.insert(format!("snapshot.{i}.time"), json_number(*t));
    }
    map.insert("exit_code".into(), (exit_code as i64).into());
    let generated_at = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    map.insert("generated_at".into(), (generated_at as i64).into());
    serde_json::to_string_pretty(&serde_json::Value::Object(map)).expect("valid json") + "\n"
}

/// Writes `norms.csv`, `metadata.json`, `bounds_report.txt` (when bound
/// monitoring is on) and the snapshot CSVs into `out_dir`.
pub fn write_outputs(
    spec: &RunSpec,
    problem: &Problem,
    execution: &Execution,
    out_dir: &Path,
) -> Result<(), String> {
    std::fs::create_dir_all(out_dir).map_err(|e| {
        format!("cannot create output directory {}: {e}", out_dir.display())
    })?;
    let snapshot_times: Vec<f64> = execution.result.snapshots.iter().map(|(t, _, _)| *t).collect();
    let mut files = vec![
        (
            "norms.csv".to_string(),
            format_norms_csv(&execution.result.trace),
        ),
        (
            "metadata.json".to_string(),
            format_metadata_json(
                spec,
                problem,
                &execution.result.trace.termination,
                execution.result.final_t,
                execution.exit_code,
                &snapshot_times,
            ),
        ),
    ];
    if let Some(bounds) = &execution.bounds {
        files.push(("bounds_report.txt".into(), format_bounds_report(bounds)));
    }
    for (i, (_, u, v)) in execution.result.snapshots.iter().enumerate() {
        files.push((format!("snapshot_{i}.csv"), format_snapshot_csv(problem.grid, u, v)));
    }
    for (name, content) in files {
        let path = out_dir.join(&name);
        std::fs::write(&path, content)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    Ok(())
}

/// Executes a run spec and writes all outputs into `out_dir`. Returns the
/// exit status (0 completed, 1 usage/solver error, 2 bound violation,
/// 3 blow-up).
pub fn run_main(spec: &RunSpec, out_dir: &Path) -> i32 {
    let problem = match build_problem(spec) {
        Ok(p) => p,
        Err(message) => {
            eprintln!("error: {message}");
            return 1;
        }
    };
    let execution = match execute(spec, &problem) {
        Ok(exec) => exec,
        Err(message) => {
            eprintln!("error: {message}");
            return 1;
        }
    };
    if let Err(message) = write_outputs(spec, &problem, &execution, out_dir) {
        eprintln!("error: {message}");
        return 1;
    }
    if let Termination::SolverFailure { time, reason } = &execution.result.trace.termination {
        eprintln!("solver failure at t = {time}: {reason}");
    }
    execution.exit_code
}
