//! Line-oriented `key = value` run configuration.
//!
//! Dotted keys group the model coefficients, domain, initial data, norms,
//! solver controls, observers and outputs. `#` starts a comment. Unknown
//! keys are rejected with their line number; missing required keys are
//! reported together in one error.

use pursuit_core::ModelParams;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug)]
pub enum ConfigError {
    Parse { line: usize, message: String },
    UnknownKey { line: usize, key: String },
    MissingKeys(Vec<String>),
    Invalid { key: String, message: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, message } => {
                write!(f, "parse error at line {line}: {message}")
            }
            ConfigError::UnknownKey { line, key } => {
                write!(f, "unknown key `{key}` at line {line}")
            }
            ConfigError::MissingKeys(keys) => {
                write!(f, "missing required keys: {}", keys.join(", "))
            }
            ConfigError::Invalid { key, message } => {
                write!(f, "invalid value for `{key}`: {message}")
            }
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverChoice {
    Imex,
    Picard,
}

impl SolverChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverChoice::Imex => "imex",
            SolverChoice::Picard => "picard",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitProfile {
    Constant,
    CosineBump,
    Equilibrium,
    File,
}

impl InitProfile {
    pub fn as_str(&self) -> &'static str {
        match self {
            InitProfile::Constant => "constant",
            InitProfile::CosineBump => "cosine-bump",
            InitProfile::Equilibrium => "equilibrium",
            InitProfile::File => "file",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub extent_x: f64,
    pub cells_x: usize,
    /// Both present for a 2D run, both absent for 1D.
    pub extent_y: Option<f64>,
    pub cells_y: Option<usize>,
}

impl DomainSpec {
    pub fn dim(&self) -> usize {
        if self.cells_y.is_some() {
            2
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitSpec {
    pub profile: InitProfile,
    pub u0: f64,
    pub v0: f64,
    pub amp_u: f64,
    pub amp_v: f64,
    pub mode_x: usize,
    pub mode_y: usize,
    /// Snapshot-format CSV for the `file` profile.
    pub file: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormSpec {
    pub alpha: f64,
    /// Explicit C^{2+α} bounds; proxy-computed from the sampled initial
    /// data when absent.
    pub u0_c2alpha: Option<f64>,
    pub v0_c2alpha: Option<f64>,
    /// Optional stand-in for the non-computable Schauder constant;
    /// reported only, never used to gate a run.
    pub schauder_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSpec {
    pub kind: SolverChoice,
    pub dt: f64,
    pub max_time: f64,
    pub cfl_safety: f64,
    /// Defaults to 1e6·max(σ², σ) once the constants are derived.
    pub blowup_threshold: Option<f64>,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    pub slab_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverSpec {
    pub stride: usize,
    pub check_bounds: bool,
    pub bound_slack: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub snapshot_times: Vec<f64>,
}

/// Fully resolved run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub model: ModelParams,
    pub domain: DomainSpec,
    pub init: InitSpec,
    pub norms: NormSpec,
    pub solver: SolverSpec,
    pub observers: ObserverSpec,
    pub output: OutputSpec,
}

const REQUIRED_KEYS: &[&str] = &[
    "model.d1",
    "model.d2",
    "model.chi",
    "model.xi",
    "model.a1",
    "model.b1",
    "model.a2",
    "model.b2",
    "model.c1",
    "domain.cells_x",
    "solver.dt",
    "solver.max_time",
];

/// All keys with their defaults, for `--help`.
pub const KEY_REFERENCE: &str = "\
Config file format: one `key = value` per line, `#` starts a comment.

Required keys:
  model.d1 model.d2 model.chi model.xi model.a1 model.b1 model.a2 model.b2 model.c1
  domain.cells_x
  solver.dt solver.max_time

Optional keys and defaults:
  domain.extent_x = 1          domain extent along x
  domain.extent_y, domain.cells_y   (give both for a 2D run)
  init.profile = constant      constant | cosine-bump | equilibrium | file
  init.u0 = 1, init.v0 = 1     base densities (constant, cosine-bump)
  init.amp_u = 0, init.amp_v = 0    bump amplitudes (cosine-bump)
  init.mode_x = 1, init.mode_y = 1  bump cosine modes (cosine-bump)
  init.file                    snapshot CSV path (file profile)
  norms.alpha = 0.5            Holder exponent in (0,1)
  norms.u0_c2alpha, norms.v0_c2alpha   explicit norm bounds, else proxies
  norms.schauder_p             optional Schauder-constant stand-in (report only)
  solver.kind = imex           imex | picard
  solver.cfl_safety = 0.4
  solver.blowup_threshold      default 1e6*max(sigma^2, sigma)
  solver.fp_tol = 1e-10        fixed-point tolerance (picard)
  solver.fp_max_iter = 50      fixed-point iteration cap (picard)
  solver.slab_steps = 1        steps per fixed-point slab (picard)
  observers.stride = 1         record norms every N steps
  observers.check_bounds = true
  observers.bound_slack = 0.05 slack on the sup-norm bounds
  output.snapshot_times =      comma-separated times in [0, max_time]
";

struct RawConfig {
    entries: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|(_, v)| v)
    }

    fn take_f64(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, raw)) => raw.parse::<f64>().map(Some).map_err(|_| ConfigError::Parse {
                line,
                message: format!("`{key}` expects a number, got `{raw}`"),
            }),
        }
    }

    fn take_usize(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, raw)) => raw
                .parse::<usize>()
                .map(Some)
                .map_err(|_| ConfigError::Parse {
                    line,
                    message: format!("`{key}` expects a non-negative integer, got `{raw}`"),
                }),
        }
    }

    fn take_bool(&mut self, key: &str) -> Result<Option<bool>, ConfigError> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, raw)) => match raw.as_str() {
                "true" => Ok(Some(true)),
                "false" => Ok(Some(false)),
                _ => Err(ConfigError::Parse {
                    line,
                    message: format!("`{key}` expects true or false, got `{raw}`"),
                }),
            },
        }
    }

    fn take_f64_list(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some((line, raw)) => {
                if raw.is_empty() {
                    return Ok(Some(Vec::new()));
                }
                raw.split(',')
                    .map(|part| {
                        part.trim().parse::<f64>().map_err(|_| ConfigError::Parse {
                            line,
                            message: format!("`{key}` expects comma-separated numbers, got `{part}`"),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()
                    .map(Some)
            }
        }
    }
}

fn tokenize(text: &str) -> Result<RawConfig, ConfigError> {
    let mut entries = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(ConfigError::Parse {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        let key = line[..eq].trim().to_string();
        let value = line[eq + 1..].trim().to_string();
        if key.is_empty() {
            return Err(ConfigError::Parse {
                line: line_no,
                message: "empty key".into(),
            });
        }
        if entries.contains_key(&key) {
            return Err(ConfigError::Parse {
                line: line_no,
                message: format!("duplicate key `{key}`"),
            });
        }
        entries.insert(key, (line_no, value));
    }
    Ok(RawConfig { entries })
}

/// Parses a config text into a fully defaulted [`RunSpec`].
pub fn parse_config(text: &str) -> Result<RunSpec, ConfigError> {
    let mut raw = tokenize(text)?;

    let missing: Vec<String> = REQUIRED_KEYS
        .iter()
        .filter(|k| !raw.entries.contains_key(**k))
        .map(|k| k.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(ConfigError::MissingKeys(missing));
    }

    let model = ModelParams {
        d1: raw.take_f64("model.d1")?.expect("required"),
        d2: raw.take_f64("model.d2")?.expect("required"),
        chi: raw.take_f64("model.chi")?.expect("required"),
        xi: raw.take_f64("model.xi")?.expect("required"),
        a1: raw.take_f64("model.a1")?.expect("required"),
        b1: raw.take_f64("model.b1")?.expect("required"),
        a2: raw.take_f64("model.a2")?.expect("required"),
        b2: raw.take_f64("model.b2")?.expect("required"),
        c1: raw.take_f64("model.c1")?.expect("required"),
    };

    let domain = DomainSpec {
        extent_x: raw.take_f64("domain.extent_x")?.unwrap_or(1.0),
        cells_x: raw.take_usize("domain.cells_x")?.expect("required"),
        extent_y: raw.take_f64("domain.extent_y")?,
        cells_y: raw.take_usize("domain.cells_y")?,
    };

    let profile = match raw.take("init.profile") {
        None => InitProfile::Constant,
        Some(name) => match name.as_str() {
            "constant" => InitProfile::Constant,
            "cosine-bump" => InitProfile::CosineBump,
            "equilibrium" => InitProfile::Equilibrium,
            "file" => InitProfile::File,
            other => {
                return Err(ConfigError::Invalid {
                    key: "init.profile".into(),
                    message: format!(
                        "unknown profile `{other}` (constant | cosine-bump | equilibrium | file)"
                    ),
                })
            }
        },
    };
    let init = InitSpec {
        profile,
        u0: raw.take_f64("init.u0")?.unwrap_or(1.0),
        v0: raw.take_f64("init.v0")?.unwrap_or(1.0),
        amp_u: raw.take_f64("init.amp_u")?.unwrap_or(0.0),
        amp_v: raw.take_f64("init.amp_v")?.unwrap_or(0.0),
        mode_x: raw.take_usize("init.mode_x")?.unwrap_or(1),
        mode_y: raw.take_usize("init.mode_y")?.unwrap_or(1),
        file: raw.take("init.file"),
    };

    let norms = NormSpec {
        alpha: raw.take_f64("norms.alpha")?.unwrap_or(0.5),
        u0_c2alpha: raw.take_f64("norms.u0_c2alpha")?,
        v0_c2alpha: raw.take_f64("norms.v0_c2alpha")?,
        schauder_p: raw.take_f64("norms.schauder_p")?,
    };

    let kind = match raw.take("solver.kind") {
        None => SolverChoice::Imex,
        Some(name) => match name.as_str() {
            "imex" => SolverChoice::Imex,
            "picard" => SolverChoice::Picard,
            other => {
                return Err(ConfigError::Invalid {
                    key: "solver.kind".into(),
                    message: format!("unknown solver `{other}` (imex | picard)"),
                })
            }
        },
    };
    let solver = SolverSpec {
        kind,
        dt: raw.take_f64("solver.dt")?.expect("required"),
        max_time: raw.take_f64("solver.max_time")?.expect("required"),
        cfl_safety: raw.take_f64("solver.cfl_safety")?.unwrap_or(0.4),
        blowup_threshold: raw.take_f64("solver.blowup_threshold")?,
        fp_tol: raw.take_f64("solver.fp_tol")?.unwrap_or(1e-10),
        fp_max_iter: raw.take_usize("solver.fp_max_iter")?.unwrap_or(50),
        slab_steps: raw.take_usize("solver.slab_steps")?.unwrap_or(1),
    };

    let observers = ObserverSpec {
        stride: raw.take_usize("observers.stride")?.unwrap_or(1),
        check_bounds: raw.take_bool("observers.check_bounds")?.unwrap_or(true),
        bound_slack: raw.take_f64("observers.bound_slack")?.unwrap_or(0.05),
    };

    let output = OutputSpec {
        snapshot_times: raw.take_f64_list("output.snapshot_times")?.unwrap_or_default(),
    };

    if let Some((key, (line, _))) = raw.entries.iter().next() {
        return Err(ConfigError::UnknownKey {
            line: *line,
            key: key.clone(),
        });
    }

    let spec = RunSpec {
        model,
        domain,
        init,
        norms,
        solver,
        observers,
        output,
    };
    validate(&spec)?;
    Ok(spec)
}

fn validate(spec: &RunSpec) -> Result<(), ConfigError> {
    spec.model.validate().map_err(|e| match e {
        pursuit_core::SimError::InvalidParam { name, reason } => ConfigError::Invalid {
            key: format!("model.{name}"),
            message: reason,
        },
        other => ConfigError::Invalid {
            key: "model".into(),
            message: other.to_string(),
        },
    })?;

    if spec.domain.cells_x < 3 {
        return Err(ConfigError::Invalid {
            key: "domain.cells_x".into(),
            message: "at least 3 cells per axis required".into(),
        });
    }
    if !(spec.domain.extent_x > 0.0) {
        return Err(ConfigError::Invalid {
            key: "domain.extent_x".into(),
            message: "extent must be positive".into(),
        });
    }
    match (spec.domain.extent_y, spec.domain.cells_y) {
        (None, None) => {}
        (Some(ly), Some(ny)) => {
            if !(ly > 0.0) {
                return Err(ConfigError::Invalid {
                    key: "domain.extent_y".into(),
                    message: "extent must be positive".into(),
                });
            }
            if ny < 3 {
                return Err(ConfigError::Invalid {
                    key: "domain.cells_y".into(),
                    message: "at least 3 cells per axis required".into(),
                });
            }
        }
        _ => {
            return Err(ConfigError::Invalid {
                key: "domain.cells_y".into(),
                message: "2D runs need both domain.extent_y and domain.cells_y".into(),
            });
        }
    }

    if !(spec.norms.alpha > 0.0 && spec.norms.alpha < 1.0) {
        return Err(ConfigError::Invalid {
            key: "norms.alpha".into(),
            message: format!("must lie in (0,1), got {}", spec.norms.alpha),
        });
    }
    if let Some(sp) = spec.norms.schauder_p {
        if !(sp > 0.0) {
            return Err(ConfigError::Invalid {
                key: "norms.schauder_p".into(),
                message: "must be positive when given".into(),
            });
        }
    }
    if !(spec.solver.dt > 0.0) {
        return Err(ConfigError::Invalid {
            key: "solver.dt".into(),
            message: "must be positive".into(),
        });
    }
    if !(spec.solver.max_time >= 0.0) {
        return Err(ConfigError::Invalid {
            key: "solver.max_time".into(),
            message: "must be non-negative".into(),
        });
    }
    if !(spec.solver.cfl_safety > 0.0 && spec.solver.cfl_safety <= 1.0) {
        return Err(ConfigError::Invalid {
            key: "solver.cfl_safety".into(),
            message: "must lie in (0,1]".into(),
        });
    }
    if !(spec.solver.fp_tol > 0.0) {
        return Err(ConfigError::Invalid {
            key: "solver.fp_tol".into(),
            message: "must be positive".into(),
        });
    }
    if spec.solver.fp_max_iter < 1 {
        return Err(ConfigError::Invalid {
            key: "solver.fp_max_iter".into(),
            message: "must be at least 1".into(),
        });
    }
    if spec.solver.slab_steps < 1 {
        return Err(ConfigError::Invalid {
            key: "solver.slab_steps".into(),
            message: "must be at least 1".into(),
        });
    }
    if spec.init.profile == InitProfile::File && spec.init.file.is_none() {
        return Err(ConfigError::Invalid {
            key: "init.file".into(),
            message: "the file profile needs init.file".into(),
        });
    }
    for t in &spec.output.snapshot_times {
        if !(*t >= 0.0 && *t <= spec.solver.max_time) {
            return Err(ConfigError::Invalid {
                key: "output.snapshot_times".into(),
                message: format!("time {t} outside [0, {}]", spec.solver.max_time),
            });
        }
    }
    Ok(())
}

/// Canonical `key = value` rendering; reparsing yields a structurally equal
/// spec. Floats print in shortest round-trip form.
pub fn serialize_config(spec: &RunSpec) -> String {
    let mut lines: Vec<String> = Vec::new();
    let m = &spec.model;
    for (key, value) in [
        ("model.d1", m.d1),
        ("model.d2", m.d2),
        ("model.chi", m.chi),
        ("model.xi", m.xi),
        ("model.a1", m.a1),
        ("model.b1", m.b1),
        ("model.a2", m.a2),
        ("model.b2", m.b2),
        ("model.c1", m.c1),
    ] {
        lines.push(format!("{key} = {value}"));
    }
    lines.push(format!("domain.extent_x = {}", spec.domain.extent_x));
    lines.push(format!("domain.cells_x = {}", spec.domain.cells_x));
    if let (Some(ly), Some(ny)) = (spec.domain.extent_y, spec.domain.cells_y) {
        lines.push(format!("domain.extent_y = {ly}"));
        lines.push(format!("domain.cells_y = {ny}"));
    }
    lines.push(format!("init.profile = {}", spec.init.profile.as_str()));
    lines.push(format!("init.u0 = {}", spec.init.u0));
    lines.push(format!("init.v0 = {}", spec.init.v0));
    lines.push(format!("init.amp_u = {}", spec.init.amp_u));
    lines.push(format!("init.amp_v = {}", spec.init.amp_v));
    lines.push(format!("init.mode_x = {}", spec.init.mode_x));
    lines.push(format!("init.mode_y = {}", spec.init.mode_y));
    if let Some(file) = &spec.init.file {
        lines.push(format!("init.file = {file}"));
    }
    lines.push(format!("norms.alpha = {}", spec.norms.alpha));
    if let Some(n) = spec.norms.u0_c2alpha {
        lines.push(format!("norms.u0_c2alpha = {n}"));
    }
    if let Some(n) = spec.norms.v0_c2alpha {
        lines.push(format!("norms.v0_c2alpha = {n}"));
    }
    if let Some(n) = spec.norms.schauder_p {
        lines.push(format!("norms.schauder_p = {n}"));
    }
    lines.push(format!("solver.kind = {}", spec.solver.kind.as_str()));
    lines.push(format!("solver.dt = {}", spec.solver.dt));
    lines.push(format!("solver.max_time = {}", spec.solver.max_time));
    lines.push(format!("solver.cfl_safety = {}", spec.solver.cfl_safety));
    if let Some(b) = spec.solver.blowup_threshold {
        lines.push(format!("solver.blowup_threshold = {b}"));
    }
    lines.push(format!("solver.fp_tol = {}", spec.solver.fp_tol));
    lines.push(format!("solver.fp_max_iter = {}", spec.solver.fp_max_iter));
    lines.push(format!("solver.slab_steps = {}", spec.solver.slab_steps));
    lines.push(format!("observers.stride = {}", spec.observers.stride));
    lines.push(format!(
        "observers.check_bounds = {}",
        spec.observers.check_bounds
    ));
    lines.push(format!(
        "observers.bound_slack = {}",
        spec.observers.bound_slack
    ));
    let times: Vec<String> = spec
        .output
        .snapshot_times
        .iter()
        .map(|t| t.to_string())
        .collect();
    lines.push(format!("output.snapshot_times = {}", times.join(",")));
    lines.join("\n") + "\n"
}
