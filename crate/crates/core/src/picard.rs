//! Decoupled fixed-point integrator in scaled variables.
//!
//! Per time slab the solver alternates the two frozen-coefficient linear
//! parabolic problems
//!
//! ```text
//! ṽ_t = d2 Δṽ + (σξ/R̂) ∇u·∇ṽ + ((σξ/R̂) Δu + a2 − (σ/R̂) u − (σb2/R̂) v̄) ṽ
//! ũ_t = d1 Δũ − (σχ/R̂) ∇v·∇ũ + (−(σχ/R̂) Δv − a1 + (σc1/R̂) v − (σb1/R̂) ū) ũ
//! ```
//!
//! until successive trajectory iterates agree in sup norm. The quadratic
//! self-terms are linearized by lagging one factor (v̄, ū) to the previous
//! iterate, so each inner solve is genuinely linear. Both half-solves
//! freeze the previous iterate's pair, realizing the map
//! `F(u, v) = (N(v), M(u))` whose fixed point solves the scaled system; the
//! original variables are recovered through `u = (σ/R̂)û`.

use crate::grid::Field;
use crate::imex::{solve_diffusion_implicit, State, StepControl};
use crate::model::{DerivedConstants, ModelParams};
use crate::norms::sup_norm;
use crate::ops::{gradient_neumann, laplacian_neumann};
use crate::trace::{NormTrace, RunResult, Termination, TraceRecord};
use crate::{Result, SimError};

/// Fixed-point controls on top of the shared stepping controls.
#[derive(Debug, Clone)]
pub struct PicardControl {
    pub step: StepControl,
    /// Steps per fixed-point slab (≥ 1). One step per slab converges fast;
    /// longer slabs emulate a slab-global fixed-point map.
    pub slab_steps: usize,
    /// Sup-norm tolerance on successive trajectory iterates.
    pub fp_tol: f64,
    /// Iteration cap; exceeding it is an error, never silently accepted.
    pub fp_max_iter: usize,
}

impl PicardControl {
    pub fn new(step: StepControl) -> Self {
        PicardControl {
            step,
            slab_steps: 1,
            fp_tol: 1e-10,
            fp_max_iter: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.step.validate()?;
        if self.slab_steps < 1 {
            return Err(SimError::InvalidInput("slab_steps must be >= 1".into()));
        }
        if !(self.fp_tol > 0.0) {
            return Err(SimError::InvalidInput(format!(
                "fp_tol must be positive, got {}",
                self.fp_tol
            )));
        }
        if self.fp_max_iter < 1 {
            return Err(SimError::InvalidInput("fp_max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// State in the scaled variables û = (R̂/σ)u, v̂ = (R̂/σ)v.
#[derive(Debug, Clone)]
pub struct ScaledState {
    pub u_hat: Field,
    pub v_hat: Field,
    pub t: f64,
}

/// Convergence statistics of one fixed-point slab.
#[derive(Debug, Clone)]
pub struct SlabStats {
    pub iterations: u32,
    /// Sup-norm distance between successive trajectory iterates.
    pub residuals: Vec<f64>,
}

/// û = (R̂/σ)·u, v̂ = (R̂/σ)·v.
pub fn scale_to_hat(s: &State, dc: &DerivedConstants) -> ScaledState {
    let factor = dc.r_upper / dc.sigma;
    ScaledState {
        u_hat: s.u.scaled(factor),
        v_hat: s.v.scaled(factor),
        t: s.t,
    }
}

/// u = (σ/R̂)·û, v = (σ/R̂)·v̂.
pub fn scale_from_hat(s: &ScaledState, dc: &DerivedConstants) -> State {
    let factor = dc.sigma / dc.r_upper;
    State {
        u: s.u_hat.scaled(factor),
        v: s.v_hat.scaled(factor),
        t: s.t,
    }
}

/// Marches the linear frozen-coefficient prey problem over a slab.
///
/// `u_frozen[k]` and `v_coeff[k]` supply the coefficients of the step
/// k → k+1; trajectories must carry at least `steps` entries. Implicit
/// diffusion, explicit frozen advection and source; linear in the solved
/// variable. Returns the trajectory including the initial level
/// (length `steps + 1`).
pub fn solve_linear_v(
    u_frozen: &[Field],
    v_coeff: &[Field],
    v_init: &Field,
    p: &ModelParams,
    dc: &DerivedConstants,
    ctl: &PicardControl,
) -> Result<Vec<Field>> {
    let steps = u_frozen.len().min(v_coeff.len());
    march_linear(
        u_frozen,
        v_coeff,
        v_init,
        ctl,
        p.d2,
        LinearCoeffs {
            adv_coeff: dc.sigma * p.xi / dc.r_upper,
            lap_coeff: dc.sigma * p.xi / dc.r_upper,
            constant: p.a2,
            frozen_coeff: -dc.sigma / dc.r_upper,
            lagged_coeff: -dc.sigma * p.b2 / dc.r_upper,
        },
        steps,
    )
}

/// Mirror image of [`solve_linear_v`] for the predator problem.
pub fn solve_linear_u(
    v_frozen: &[Field],
    u_coeff: &[Field],
    u_init: &Field,
    p: &ModelParams,
    dc: &DerivedConstants,
    ctl: &PicardControl,
) -> Result<Vec<Field>> {
    let steps = v_frozen.len().min(u_coeff.len());
    march_linear(
        v_frozen,
        u_coeff,
        u_init,
        ctl,
        p.d1,
        LinearCoeffs {
            adv_coeff: -dc.sigma * p.chi / dc.r_upper,
            lap_coeff: -dc.sigma * p.chi / dc.r_upper,
            constant: -p.a1,
            frozen_coeff: dc.sigma * p.c1 / dc.r_upper,
            lagged_coeff: -dc.sigma * p.b1 / dc.r_upper,
        },
        steps,
    )
}

/// Coefficients of one frozen linear problem:
/// w_t = d Δw + adv_coeff ∇f·∇w + (lap_coeff Δf + constant
///       + frozen_coeff·f + lagged_coeff·g) w
/// with `f` the frozen trajectory and `g` the lagged one.
struct LinearCoeffs {
    adv_coeff: f64,
    lap_coeff: f64,
    constant: f64,
    frozen_coeff: f64,
    lagged_coeff: f64,
}

fn march_linear(
    frozen: &[Field],
    lagged: &[Field],
    init: &Field,
    ctl: &PicardControl,
    diffusivity: f64,
    co: LinearCoeffs,
    steps: usize,
) -> Result<Vec<Field>> {
    let grid = init.grid();
    let dt = ctl.step.dt;
    let mut traj = Vec::with_capacity(steps + 1);
    traj.push(init.clone());
    for k in 0..steps {
        let fk = &frozen[k];
        let gk = &lagged[k];
        let grad_f = gradient_neumann(fk);
        let lap_f = laplacian_neumann(fk);

        // advective CFL on the frozen velocity field
        let speed = co.adv_coeff.abs() * grad_f.max_component_abs();
        let dt_cfl = ctl.step.cfl_safety * grid.min_spacing() / speed.max(f64::EPSILON);
        if dt > dt_cfl {
            return Err(SimError::CflViolation {
                time: k as f64 * dt,
                dt,
                admissible_dt: dt_cfl,
            });
        }

        let cur = traj.last().expect("trajectory non-empty");
        let grad_cur = gradient_neumann(cur);
        let adv = grad_f.dot(&grad_cur);
        let mut star = cur.clone();
        for i in 0..grid.cell_count() {
            let source = co.lap_coeff * lap_f.values()[i]
                + co.constant
                + co.frozen_coeff * fk.values()[i]
                + co.lagged_coeff * gk.values()[i];
            star.values_mut()[i] +=
                dt * (co.adv_coeff * adv.values()[i] + source * cur.values()[i]);
        }
        traj.push(solve_diffusion_implicit(&star, diffusivity, dt)?);
    }
    Ok(traj)
}

/// Runs one fixed-point slab of `ctl.slab_steps` steps from `s`.
///
/// The initial guess holds the slab-start state constant over the slab;
/// each iteration applies both frozen solves to the previous iterate's
/// trajectory pair and measures the sup-norm change.
pub fn picard_slab(
    s: &ScaledState,
    p: &ModelParams,
    dc: &DerivedConstants,
    ctl: &PicardControl,
) -> Result<(ScaledState, SlabStats)> {
    picard_slab_n(s, p, dc, ctl, ctl.slab_steps)
}

pub(crate) fn picard_slab_n(
    s: &ScaledState,
    p: &ModelParams,
    dc: &DerivedConstants,
    ctl: &PicardControl,
    steps: usize,
) -> Result<(ScaledState, SlabStats)> {
    ctl.validate()?;
    let mut u_traj: Vec<Field> = vec![s.u_hat.clone(); steps + 1];
    let mut v_traj: Vec<Field> = vec![s.v_hat.clone(); steps + 1];
    let mut residuals = Vec::new();
    for iter in 1..=ctl.fp_max_iter {
        let v_new = solve_linear_v(&u_traj[..steps], &v_traj[..steps], &s.v_hat, p, dc, ctl)?;
        let u_new = solve_linear_u(&v_traj[..steps], &u_traj[..steps], &s.u_hat, p, dc, ctl)?;
        let mut residual = 0.0_f64;
        for k in 0..=steps {
            let mut du = u_new[k].clone();
            du.add_scaled(&u_traj[k], -1.0);
            let mut dv = v_new[k].clone();
            dv.add_scaled(&v_traj[k], -1.0);
            residual = residual.max(sup_norm(&du)).max(sup_norm(&dv));
        }
        residuals.push(residual);
        u_traj = u_new;
        v_traj = v_new;
        if residual < ctl.fp_tol {
            let end = ScaledState {
                u_hat: u_traj[steps].clone(),
                v_hat: v_traj[steps].clone(),
                t: s.t + steps as f64 * ctl.step.dt,
            };
            return Ok((
                end,
                SlabStats {
                    iterations: iter as u32,
                    residuals,
                },
            ));
        }
    }
    Err(SimError::FixedPointDiverged {
        residual: *residuals.last().expect("at least one iteration"),
        iterations: ctl.fp_max_iter,
        time: s.t,
    })
}

/// Core slab loop; `on_slab(step_index, t, u_hat, v_hat, stats, force)` fires
/// after every slab with the step index of the slab end.
pub(crate) fn run_picard_core(
    s0: &State,
    p: &ModelParams,
    dc: &DerivedConstants,
    ctl: &PicardControl,
    mut on_slab: impl FnMut(usize, f64, &Field, &Field, &SlabStats, bool),
) -> Result<(Termination, State)> {
    p.validate()?;
    ctl.validate()?;
    let sup0 = sup_norm(&s0.u).max(sup_norm(&s0.v));
    if ctl.step.blowup_threshold <= sup0 {
        return Err(SimError::InvalidInput(format!(
            "blowup_threshold {} must exceed the initial sup norm {}",
            ctl.step.blowup_threshold, sup0
        )));
    }
    let n_steps = (ctl.step.max_time / ctl.step.dt + 1e-9).floor() as usize;
    let mut hat = scale_to_hat(s0, dc);
    let unscale = dc.sigma / dc.r_upper;
    let mut done = 0usize;
    while done < n_steps {
        let steps = ctl.slab_steps.min(n_steps - done);
        let (next, stats) = match picard_slab_n(&hat, p, dc, ctl, steps) {
            Ok(pair) => pair,
            Err(err) => {
                let state = scale_from_hat(&hat, dc);
                return Ok((
                    Termination::SolverFailure {
                        time: hat.t,
                        reason: err.to_string(),
                    },
                    state,
                ));
            }
        };
        hat = next;
        done += steps;
        hat.t = s0.t + done as f64 * ctl.step.dt;
        let u = hat.u_hat.scaled(unscale);
        let v = hat.v_hat.scaled(unscale);
        let sup = sup_norm(&u).max(sup_norm(&v));
        let finite = u.is_finite() && v.is_finite();
        if !finite || sup > ctl.step.blowup_threshold {
            on_slab(done, hat.t, &u, &v, &stats, true);
            return Ok((
                Termination::Blowup { time: hat.t },
                State { u, v, t: hat.t },
            ));
        }
        on_slab(done, hat.t, &u, &v, &stats, done == n_steps);
    }
    Ok((Termination::Completed, scale_from_hat(&hat, dc)))
}

/// Steps by fixed-point slabs until `max_time` or blow-up; records norms of
/// the unscaled fields and the per-slab iteration counts.
pub fn run_picard(
    s0: &State,
    p: &ModelParams,
    dc: &DerivedConstants,
    ctl: &PicardControl,
    obs: &crate::imex::Observers,
) -> Result<RunResult> {
    let stride = obs.record_stride.max(1);
    let mut snap_times: Vec<f64> = obs.snapshot_times.clone();
    snap_times.sort_by(|a, b| a.partial_cmp(b).expect("finite snapshot times"));
    let mut snap_idx = 0;
    let mut records = Vec::new();
    let mut snapshots = Vec::new();
    while snap_idx < snap_times.len() && snap_times[snap_idx] <= s0.t + 1e-12 {
        snapshots.push((s0.t, s0.u.clone(), s0.v.clone()));
        snap_idx += 1;
    }
    let mut monotone_failure: Option<f64> = None;
    let (termination, last) = run_picard_core(s0, p, dc, ctl, |k, t, u, v, stats, force| {
        // converged slabs must show non-increasing residuals from the
        // second iteration on
        for w in stats.residuals.windows(2).skip(1) {
            if w[1] > w[0] * (1.0 + 1e-12) && monotone_failure.is_none() {
                monotone_failure = Some(t);
            }
        }
        if k % stride == 0 || force {
            records.push(TraceRecord::measure(t, u, v, Some(stats.iterations)));
        }
        while snap_idx < snap_times.len() && snap_times[snap_idx] <= t + 1e-12 {
            snapshots.push((t, u.clone(), v.clone()));
            snap_idx += 1;
        }
    })?;
    let termination = match monotone_failure {
        Some(time) if termination == Termination::Completed => Termination::SolverFailure {
            time,
            reason: "fixed-point residual increased after iteration 2".into(),
        },
        _ => termination,
    };
    Ok(RunResult {
        trace: NormTrace {
            records,
            termination,
        },
        final_u: last.u,
        final_v: last.v,
        final_t: last.t,
        snapshots,
    })
}
