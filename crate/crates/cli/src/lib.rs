//! Command-line driver: single runs, (χ, ξ) sweeps, derived-constant
//! inspection, and the twin perturbation test.

pub mod config;
pub mod runner;
pub mod sweep;

use clap::{Parser, Subcommand};
use config::{parse_config, RunSpec, SolverChoice, KEY_REFERENCE};
use pursuit_core::analysis::{gronwall_twin_test, SolverKind};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "pursuit",
    about = "Finite-difference simulator for a predator-prey system with prey-taxis and predator-taxis",
    after_help = KEY_REFERENCE
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write norms, snapshots, metadata and the
    /// bounds report.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override solver.kind from the config.
        #[arg(long, value_parser = ["imex", "picard"])]
        solver: Option<String>,
        /// Accepted for interface parity with sweep; single runs are serial.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run one simulation per (chi, xi) pair and write sweep.csv.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated prey-taxis values.
        #[arg(long, value_delimiter = ',', required = true)]
        chi: Vec<f64>,
        /// Comma-separated predator-taxis values.
        #[arg(long, value_delimiter = ',', required = true)]
        xi: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Print the derived constants and the taxis admissibility report.
    CheckConstants {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run base and perturbed twins and report the energy separation.
    TwinTest {
        #[arg(long)]
        config: PathBuf,
        /// Perturbation amplitude (0 checks bitwise determinism).
        #[arg(long)]
        delta: f64,
    },
}

fn load_spec(path: &PathBuf) -> Result<RunSpec, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn cmd_check_constants(config: &PathBuf) -> i32 {
    let spec = match load_spec(config) {
        Ok(s) => s,
        Err(message) => {
            eprintln!("error: {message}");
            return 1;
        }
    };
    let problem = match runner::build_problem(&spec) {
        Ok(p) => p,
        Err(message) => {
            eprintln!("error: {message}");
            return 1;
        }
    };
    let dc = &problem.constants;
    println!("rho = {}", dc.rho);
    println!("sigma = {}", dc.sigma);
    println!("h1 = {}", dc.h1);
    println!("h2 = {}", dc.h2);
    println!("h3 = {}", dc.h3);
    println!("h4 = {}", dc.h4);
    println!("r_upper = {}", dc.r_upper);
    match dc.schauder_p {
        Some(sp) => println!("schauder_p = {sp} (user-supplied stand-in, report only)"),
        None => println!("schauder_p = unset (Schauder constant not computable)"),
    }
    println!("chi_max = {}", dc.chi_max);
    println!("xi_max = {}", dc.xi_max);
    println!("norm_u0_c2alpha = {}", problem.norms.norm_u0_c2alpha);
    println!("norm_v0_c2alpha = {}", problem.norms.norm_v0_c2alpha);
    let adm = &problem.admissibility;
    println!("admissibility check: upper-bound only (computable branch of R)");
    println!("chi = {} -> ok = {}, margin = {}", spec.model.chi, adm.chi_ok, adm.chi_margin);
    println!("xi = {} -> ok = {}, margin = {}", spec.model.xi, adm.xi_ok, adm.xi_margin);
    0
}

fn cmd_twin_test(config: &PathBuf, delta: f64) -> i32 {
    let spec = match load_spec(config) {
        Ok(s) => s,
        Err(message) => {
            eprintln!("error: {message}");
            return 1;
        }
    };
    let problem = match runner::build_problem(&spec) {
        Ok(p) => p,
        Err(message) => {
            eprintln!("error: {message}");
            return 1;
        }
    };
    let solver = match spec.solver.kind {
        SolverChoice::Imex => SolverKind::Imex,
        SolverChoice::Picard => SolverKind::Picard,
    };
    let ctl = runner::picard_control(&spec, &problem);
    let report = match gronwall_twin_test(
        &problem.initial,
        delta,
        &spec.model,
        &problem.constants,
        solver,
        &ctl,
        spec.observers.stride,
        1e-3,
    ) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    println!("delta = {delta}");
    println!("records = {}", report.energies.len());
    match report.lambda_hat {
        Some(lambda) => println!("lambda_hat = {lambda}"),
        None => println!("lambda_hat = undefined (zero energy separation)"),
    }
    println!("max_log_secdiff_per_time = {}", report.max_log_secdiff_per_time);
    println!("superexp_free = {}", report.superexp_free);
    println!("envelope_ok = {}", report.envelope_ok);
    println!("deterministic_zero = {}", report.deterministic_zero);
    println!("conclusive = {}", report.conclusive);
    let ok = report.conclusive
        && report.superexp_free
        && (delta > 0.0 || report.deterministic_zero);
    if ok {
        0
    } else {
        1
    }
}

/// Parses the CLI and runs the selected command; returns the exit status.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            config,
            out,
            solver,
            jobs: _,
        } => {
            let mut spec = match load_spec(&config) {
                Ok(s) => s,
                Err(message) => {
                    eprintln!("error: {message}");
                    return 1;
                }
            };
            match solver.as_deref() {
                Some("imex") => spec.solver.kind = SolverChoice::Imex,
                Some("picard") => spec.solver.kind = SolverChoice::Picard,
                _ => {}
            }
            runner::run_main(&spec, &out)
        }
        Command::Sweep {
            config,
            chi,
            xi,
            out,
            jobs,
        } => {
            let base = match load_spec(&config) {
                Ok(s) => s,
                Err(message) => {
                    eprintln!("error: {message}");
                    return 1;
                }
            };
            sweep::run_sweep(
                &sweep::SweepSpec {
                    base,
                    chi_values: chi,
                    xi_values: xi,
                },
                &out,
                jobs,
            )
        }
        Command::CheckConstants { config } => cmd_check_constants(&config),
        Command::TwinTest { config, delta } => cmd_twin_test(&config, delta),
    }
}
