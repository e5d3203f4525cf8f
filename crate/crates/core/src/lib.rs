//! Finite-difference simulator and verification harness for a diffusive
//! predator-prey system with prey-taxis and predator-taxis.
//!
//! The system couples a predator density `u` and a prey density `v` on a
//! box domain with homogeneous Neumann boundaries:
//!
//! ```text
//! u_t = d1 Δu − χ ∇·(u ∇v) + u(−a1 − b1 u + c1 v)
//! v_t = d2 Δv + ξ ∇·(v ∇u) + v( a2 − b2 v − u)
//! ```
//!
//! Two integrators are provided: a monolithic IMEX scheme ([`imex`]) and a
//! decoupled Picard fixed-point scheme ([`picard`]) that alternates the two
//! frozen-coefficient linear parabolic solves in scaled variables. The
//! [`analysis`] module checks the a priori bounds, super-solution
//! inequalities, and the Gronwall-style energy separation on twin runs.

pub mod analysis;
pub mod grid;
pub mod imex;
pub mod model;
pub mod norms;
pub mod ops;
pub mod picard;
pub mod trace;

pub use analysis::{BoundReport, BoundVerdict, GrowthReport};
pub use grid::{Field, Grid, VectorField};
pub use imex::{State, StepControl};
pub use model::{
    check_taxis_admissible, coexistence_equilibrium, derive_constants, AdmissibilityReport,
    DerivedConstants, InitialDataNorms, ModelParams,
};
pub use picard::{PicardControl, ScaledState};
pub use trace::{NormTrace, RunResult, Termination, TraceRecord};

/// Errors produced by simulator and analysis operations.
#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParam { name: String, reason: String },
    #[error("derived constant {name} is not finite")]
    NonFiniteConstant { name: String },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("CFL violation at t={time}: dt={dt} exceeds admissible dt={admissible_dt}")]
    CflViolation {
        time: f64,
        dt: f64,
        admissible_dt: f64,
    },
    #[error("linear solver failed to converge: relative residual {residual} after {iterations} iterations")]
    SolverDiverged { residual: f64, iterations: usize },
    #[error("fixed-point iteration failed to converge: residual {residual} after {iterations} iterations at t={time}")]
    FixedPointDiverged {
        residual: f64,
        iterations: usize,
        time: f64,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, SimError>;
