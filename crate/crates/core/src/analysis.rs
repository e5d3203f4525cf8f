//! Checkable inequalities: super-solution residuals of the frozen linear
//! problems, a priori bound monitoring, the discrete energy distance with
//! the Gronwall-style twin test, and grid-convergence estimation.

use crate::grid::{Field, Grid};
use crate::imex::{run_imex_core, State};
use crate::model::{DerivedConstants, ModelParams};
use crate::norms::{c2_norm_proxy, min_value, sup_norm};
use crate::ops::laplacian_neumann;
use crate::picard::{run_picard_core, PicardControl};
use crate::trace::{NormTrace, Termination};
use crate::{Result, SimError};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Default discretization allowance on the sup-norm bounds.
pub const DEFAULT_BOUND_SLACK: f64 = 0.05;

/// Pointwise residual of the constant upper solution v̄ ≡ R̂ in the frozen-u
/// prey problem:
///
/// ```text
/// r(x) = ((σξ/R̂)·Δ_h u + a2 − (σ/R̂)·u − σ·b2) · R̂
/// ```
///
/// Under ξ ≤ R̂/3, 0 ≤ u ≤ σR̂ and c2 proxy of u ≤ ρ, every value is ≤ 0 up
/// to round-off; the caller asserts the sign.
pub fn supersolution_residual_v(u: &Field, p: &ModelParams, dc: &DerivedConstants) -> Field {
    let lap = laplacian_neumann(u);
    let r = dc.r_upper;
    let s_over_r = dc.sigma / r;
    let values = u
        .values()
        .iter()
        .zip(lap.values())
        .map(|(ui, li)| (s_over_r * p.xi * li + p.a2 - s_over_r * ui - dc.sigma * p.b2) * r)
        .collect();
    Field::from_values(u.grid(), values).expect("sized from grid")
}

/// Pointwise residual of the constant upper solution ū ≡ σR̂ in the
/// frozen-v predator problem:
///
/// ```text
/// r(x) = (−(σχ/R̂)·Δ_h v − a1 + (σc1/R̂)·v − σ²·b1) · σR̂
/// ```
pub fn supersolution_residual_u(v: &Field, p: &ModelParams, dc: &DerivedConstants) -> Field {
    let lap = laplacian_neumann(v);
    let r = dc.r_upper;
    let s_over_r = dc.sigma / r;
    let values = v
        .values()
        .iter()
        .zip(lap.values())
        .map(|(vi, li)| {
            (-s_over_r * p.chi * li - p.a1 + s_over_r * p.c1 * vi
                - dc.sigma * dc.sigma * p.b1)
                * dc.sigma
                * r
        })
        .collect();
    Field::from_values(v.grid(), values).expect("sized from grid")
}

/// One monitored bound: the worst observed value against the bound, and the
/// time of the first violation if any.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCheck {
    pub name: String,
    pub bound: f64,
    pub observed: f64,
    pub first_violation: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundVerdict {
    Pass,
    Violated,
    Blowup,
}

impl BoundVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            BoundVerdict::Pass => "pass",
            BoundVerdict::Violated => "violated",
            BoundVerdict::Blowup => "blowup",
        }
    }
}

/// Verdicts of a trace against the a priori bounds 0 ≤ u ≤ σ², 0 ≤ v ≤ σ.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub bounds_checked: Vec<BoundCheck>,
    pub verdict: BoundVerdict,
    /// Largest c2proxy_u + c2proxy_v over the trace. Reported only: the
    /// horizon constant of the boundedness statement is not computable.
    pub max_c2proxy_sum: f64,
}

/// Checks a trace against non-negativity and the sup-norm bounds with the
/// default 5% discretization slack.
pub fn bound_monitor(trace: &NormTrace, dc: &DerivedConstants) -> BoundReport {
    bound_monitor_with_slack(trace, dc, DEFAULT_BOUND_SLACK)
}

pub fn bound_monitor_with_slack(
    trace: &NormTrace,
    dc: &DerivedConstants,
    slack: f64,
) -> BoundReport {
    let neg_tol = -1e-12;
    let sup_u_bound = dc.sigma * dc.sigma * (1.0 + slack);
    let sup_v_bound = dc.sigma * (1.0 + slack);

    let mut checks = vec![
        BoundCheck {
            name: "min_u >= -1e-12".into(),
            bound: neg_tol,
            observed: f64::INFINITY,
            first_violation: None,
        },
        BoundCheck {
            name: "min_v >= -1e-12".into(),
            bound: neg_tol,
            observed: f64::INFINITY,
            first_violation: None,
        },
        BoundCheck {
            name: format!("sup_u <= {:.3}*sigma^2", 1.0 + slack),
            bound: sup_u_bound,
            observed: f64::NEG_INFINITY,
            first_violation: None,
        },
        BoundCheck {
            name: format!("sup_v <= {:.3}*sigma", 1.0 + slack),
            bound: sup_v_bound,
            observed: f64::NEG_INFINITY,
            first_violation: None,
        },
    ];
    let mut max_c2proxy_sum = 0.0_f64;
    for r in &trace.records {
        max_c2proxy_sum = max_c2proxy_sum.max(r.c2proxy_u + r.c2proxy_v);
        let lower = [(0usize, r.min_u), (1, r.min_v)];
        for (idx, value) in lower {
            checks[idx].observed = checks[idx].observed.min(value);
            if value < checks[idx].bound && checks[idx].first_violation.is_none() {
                checks[idx].first_violation = Some(r.t);
            }
        }
        let upper = [(2usize, r.sup_u), (3, r.sup_v)];
        for (idx, value) in upper {
            checks[idx].observed = checks[idx].observed.max(value);
            if value > checks[idx].bound && checks[idx].first_violation.is_none() {
                checks[idx].first_violation = Some(r.t);
            }
        }
    }
    let verdict = if matches!(trace.termination, Termination::Blowup { .. }) {
        BoundVerdict::Blowup
    } else if checks.iter().any(|c| c.first_violation.is_some()) {
        BoundVerdict::Violated
    } else {
        BoundVerdict::Pass
    };
    BoundReport {
        bounds_checked: checks,
        verdict,
        max_c2proxy_sum,
    }
}

/// Volume-weighted ∫((u1−u2)² + (v1−v2)²) between two states.
pub fn energy_distance(s1: &State, s2: &State) -> Result<f64> {
    s1.u.same_grid(&s2.u)?;
    s1.v.same_grid(&s2.v)?;
    let vol = s1.u.grid().cell_volume();
    let mut sum = 0.0;
    for (a, b) in s1.u.values().iter().zip(s2.u.values()) {
        sum += (a - b) * (a - b);
    }
    for (a, b) in s1.v.values().iter().zip(s2.v.values()) {
        sum += (a - b) * (a - b);
    }
    Ok(sum * vol)
}

/// Least-squares slope λ of log E against t. `None` when fewer than two
/// positive energies are available.
pub fn fit_growth_rate(times: &[f64], energies: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(energies)
        .filter(|(_, e)| **e > 0.0)
        .map(|(t, e)| (*t, e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|(t, _)| t).sum::<f64>() / n;
    let mean_y = pts.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, y) in &pts {
        num += (t - mean_t) * (y - mean_y);
        den += (t - mean_t) * (t - mean_t);
    }
    if den == 0.0 {
        None
    } else {
        Some(num / den)
    }
}

/// Which integrator the twin test drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Imex,
    Picard,
}

/// Outcome of a twin perturbation run.
#[derive(Debug, Clone)]
pub struct GrowthReport {
    /// (t, E(t)) at each record, starting at t0.
    pub energies: Vec<(f64, f64)>,
    /// Fitted exponential rate of E; `None` when E vanishes identically.
    pub lambda_hat: Option<f64>,
    /// E(t) ≤ 1.1·E(0)·exp(λ̂·t) at every record.
    pub envelope_ok: bool,
    /// max over records of (Δ² log E)/h, h the record interval; growth-rate
    /// drift per unit time.
    pub max_log_secdiff_per_time: f64,
    /// max_log_secdiff_per_time within the configured tolerance.
    pub superexp_free: bool,
    /// δ = 0 twin reproduced E ≡ 0 exactly.
    pub deterministic_zero: bool,
    /// Both twins completed (no blow-up, no solver failure).
    pub conclusive: bool,
}

fn collect_states(
    solver: SolverKind,
    s0: &State,
    p: &ModelParams,
    dc: &DerivedConstants,
    ctl: &PicardControl,
    stride: usize,
) -> Result<(Vec<State>, Termination)> {
    let stride = stride.max(1);
    let mut states = vec![s0.clone()];
    let termination = match solver {
        SolverKind::Imex => {
            let (term, _) = run_imex_core(s0, p, &ctl.step, |k, t, u, v, force| {
                if k % stride == 0 || force {
                    states.push(State {
                        u: u.clone(),
                        v: v.clone(),
                        t,
                    });
                }
            })?;
            term
        }
        SolverKind::Picard => {
            let (term, _) = run_picard_core(s0, p, dc, ctl, |k, t, u, v, _, force| {
                if k % stride == 0 || force {
                    states.push(State {
                        u: u.clone(),
                        v: v.clone(),
                        t,
                    });
                }
            })?;
            term
        }
    };
    Ok((states, termination))
}

/// Smooth Neumann-compatible perturbation profile of unit amplitude.
fn perturbation_profile(grid: Grid) -> Field {
    Field::from_fn(grid, |x, y| {
        let px = (std::f64::consts::PI * x / grid.extent_x()).cos();
        if grid.dim() == 1 {
            1.0 + 0.1 * px
        } else {
            1.0 + 0.1 * px * (std::f64::consts::PI * y / grid.extent_y()).cos()
        }
    })
}

/// Runs the chosen solver from `s0` and from `s0 + δ·profile`, measures the
/// energy distance at every `record_stride` steps, fits the exponential
/// separation rate, and checks that no superexponential growth occurs
/// (log-energy second differences per unit time stay below `secdiff_tol`).
///
/// A δ = 0 twin must reproduce E ≡ 0 exactly (bitwise determinism).
pub fn gronwall_twin_test(
    s0: &State,
    delta: f64,
    p: &ModelParams,
    dc: &DerivedConstants,
    solver: SolverKind,
    ctl: &PicardControl,
    record_stride: usize,
    secdiff_tol: f64,
) -> Result<GrowthReport> {
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(SimError::InvalidInput(format!(
            "perturbation amplitude must be >= 0, got {delta}"
        )));
    }
    let profile = perturbation_profile(s0.u.grid());
    let mut u_pert = s0.u.clone();
    u_pert.add_scaled(&profile, delta);
    let mut v_pert = s0.v.clone();
    v_pert.add_scaled(&profile, delta);
    let s0_pert = State {
        u: u_pert,
        v: v_pert,
        t: s0.t,
    };

    let (base, term_base) = collect_states(solver, s0, p, dc, ctl, record_stride)?;
    let (pert, term_pert) = collect_states(solver, &s0_pert, p, dc, ctl, record_stride)?;
    let conclusive =
        term_base == Termination::Completed && term_pert == Termination::Completed;

    let n = base.len().min(pert.len());
    let mut energies = Vec::with_capacity(n);
    for i in 0..n {
        energies.push((base[i].t, energy_distance(&base[i], &pert[i])?));
    }

    let deterministic_zero = energies.iter().all(|(_, e)| *e == 0.0);
    let times: Vec<f64> = energies.iter().map(|(t, _)| *t).collect();
    let values: Vec<f64> = energies.iter().map(|(_, e)| *e).collect();
    let lambda_hat = if deterministic_zero {
        None
    } else {
        fit_growth_rate(&times, &values)
    };

    let envelope_ok = match lambda_hat {
        Some(lambda) => {
            let e0 = values.first().copied().unwrap_or(0.0);
            e0 > 0.0
                && energies
                    .iter()
                    .all(|(t, e)| *e <= 1.1 * e0 * (lambda * (t - times[0])).exp())
        }
        None => deterministic_zero,
    };

    let mut max_secdiff = f64::NEG_INFINITY;
    if values.len() >= 3 && !deterministic_zero {
        for k in 1..values.len() - 1 {
            let h = times[k + 1] - times[k];
            if values[k - 1] > 0.0 && values[k] > 0.0 && values[k + 1] > 0.0 && h > 0.0 {
                let d2 = (values[k + 1].ln() - 2.0 * values[k].ln() + values[k - 1].ln()) / h;
                max_secdiff = max_secdiff.max(d2);
            }
        }
    }
    if max_secdiff == f64::NEG_INFINITY {
        max_secdiff = 0.0;
    }

    Ok(GrowthReport {
        energies,
        lambda_hat,
        envelope_ok,
        max_log_secdiff_per_time: max_secdiff,
        superexp_free: max_secdiff <= secdiff_tol,
        deterministic_zero,
        conclusive,
    })
}

/// Least-squares slope of log error against log h over a refinement
/// sequence (h strictly decreasing, errors positive, ≥ 3 entries).
pub fn convergence_order(errors: &[(f64, f64)]) -> Result<f64> {
    if errors.len() < 3 {
        return Err(SimError::InvalidInput(format!(
            "need at least 3 refinement entries, got {}",
            errors.len()
        )));
    }
    for w in errors.windows(2) {
        if !(w[1].0 < w[0].0) {
            return Err(SimError::InvalidInput(
                "h values must be strictly decreasing".into(),
            ));
        }
    }
    for (h, e) in errors {
        if !(*e > 0.0) || !(*h > 0.0) {
            return Err(SimError::InvalidInput(format!(
                "entries must be positive, got ({h}, {e})"
            )));
        }
    }
    let lh: Vec<f64> = errors.iter().map(|(h, _)| h.ln()).collect();
    let le: Vec<f64> = errors.iter().map(|(_, e)| e.ln()).collect();
    let n = lh.len() as f64;
    let mh = lh.iter().sum::<f64>() / n;
    let me = le.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..lh.len() {
        num += (lh[i] - mh) * (le[i] - me);
        den += (lh[i] - mh) * (lh[i] - mh);
    }
    Ok(num / den)
}

/// Draws a smooth non-negative field satisfying `sup ≤ sup_cap` and
/// `c2 proxy ≤ c2_cap`: a truncated cosine series (Neumann-compatible by
/// construction), shifted non-negative and rescaled under the caps with a
/// small safety margin, then scaled by a random factor in [0.3, 1].
pub fn random_admissible_field(grid: Grid, seed: u64, sup_cap: f64, c2_cap: f64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let modes = 4;
    let mut coeffs_x = Vec::with_capacity(modes);
    let mut coeffs_y = Vec::with_capacity(modes);
    for _ in 0..modes {
        coeffs_x.push(rng.gen_range(-1.0..1.0));
        coeffs_y.push(rng.gen_range(-1.0..1.0));
    }
    let raw = Field::from_fn(grid, |x, y| {
        let mut s = 0.0;
        for (k, c) in coeffs_x.iter().enumerate() {
            s += c * ((k + 1) as f64 * std::f64::consts::PI * x / grid.extent_x()).cos();
        }
        if grid.dim() == 2 {
            for (k, c) in coeffs_y.iter().enumerate() {
                s += c * ((k + 1) as f64 * std::f64::consts::PI * y / grid.extent_y()).cos();
            }
        }
        s
    });
    let shift = -min_value(&raw);
    let mut shifted = raw;
    for v in shifted.values_mut() {
        *v += shift;
    }
    let sup = sup_norm(&shifted);
    let c2 = c2_norm_proxy(&shifted);
    if sup == 0.0 {
        return shifted;
    }
    let margin = 0.95;
    let scale = (margin * sup_cap / sup).min(margin * c2_cap / c2) * rng.gen_range(0.3..1.0);
    shifted.scale(scale);
    shifted
}
