//! Run configuration: a flat `key=value` format covering every experiment.
//!
//! One pair per line, `#` starts a comment line, keys are fixed and typos are
//! rejected with their line number. `serialize_config` emits a document that
//! parses back to the identical configuration, so echoed configs double as
//! reproducible run records. Time stepping accepts either `n_steps` or `dt`
//! (canonicalized to steps); accuracy sweeps take `dt_list`/`n_elems_list`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use thiserror::Error;

use crate::adjoint::{CoupledConfig, Domains};
use crate::fem::{build_mesh, Mesh1D, NodalField, Subdomain};
use crate::forward::{SpaceTimeField, TimeGrid};
use crate::robust::RobustOptions;
use crate::stackelberg::RscConfig;
use crate::SolveError;

/// Configuration or input-resolution failure, with enough context to fix the
/// offending line.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: key `{key}`: {message}")]
    Parse { line: usize, key: String, message: String },
    #[error("command `{command}` requires key `{key}`")]
    MissingKey { command: &'static str, key: &'static str },
    #[error("key `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("reading `{path}`: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Uncontrolled forward solve.
    Solve,
    /// Saddle-point iteration for the follower/disturbance pair.
    Robust,
    /// Outer leader loop with the robust pair substituted.
    Rsc,
    /// Manufactured-solution accuracy table.
    Mms,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Robust => "robust",
            Command::Rsc => "rsc",
            Command::Mms => "mms",
        }
    }
}

/// Initial-state specification: named presets or a tabulated nodal file
/// (one value per line, matching the mesh node count).
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    /// sin^2(pi x / L)
    Sin2,
    /// 1e-3 exp(-x^2)
    Gauss3,
    Zero,
    File(PathBuf),
}

/// Target/tracked trajectory presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajSpec {
    Zero,
    /// sin^2(pi x / L) + 0.1 t (cos(pi x / L) + 1)
    Sin2Drift,
    /// exp(-x^2) + sin^2(pi x / L)
    GaussSin2,
    /// (-t^3 + t^2) + sin^2(pi x / L)
    TcubicSin2,
}

/// Fully parsed run configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub half_length: f64,
    pub t_final: f64,
    pub n_elems: Option<usize>,
    pub n_steps: Option<usize>,
    pub theta: f64,
    pub u0: Option<FieldSpec>,
    pub u_d: Option<TrajSpec>,
    pub ubar: TrajSpec,
    pub omega: Option<(f64, f64)>,
    pub region_control: Option<(f64, f64)>,
    pub region_observe: Option<(f64, f64)>,
    pub ell: f64,
    pub gamma: f64,
    pub beta: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub picard_tol: f64,
    pub picard_max: usize,
    pub relaxation: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub beta_continuation: bool,
    pub output: Option<PathBuf>,
    pub stride: usize,
    pub dt_list: Vec<f64>,
    pub n_elems_list: Vec<usize>,
}

impl RunConfig {
    fn defaults(command: Command) -> Self {
        RunConfig {
            command,
            half_length: 30.0,
            t_final: 1.0,
            n_elems: None,
            n_steps: None,
            theta: 0.75,
            u0: None,
            u_d: None,
            ubar: TrajSpec::Zero,
            omega: None,
            region_control: None,
            region_observe: None,
            ell: 40.0,
            gamma: 40.0,
            beta: 1e-7,
            tol: 1e-6,
            max_iter: 100,
            picard_tol: 1e-8,
            picard_max: 200,
            relaxation: 1.0,
            alpha0: 0.5,
            beta0: 0.5,
            beta_continuation: false,
            output: None,
            stride: 1,
            dt_list: Vec::new(),
            n_elems_list: Vec::new(),
        }
    }

    pub fn mesh(&self) -> Result<Mesh1D, SolveError> {
        Ok(build_mesh(self.half_length, self.n_elems.expect("validated n_elems"))?)
    }

    pub fn grid(&self) -> Result<TimeGrid, SolveError> {
        TimeGrid::new(self.t_final, self.n_steps.expect("validated n_steps"))
    }

    /// Materialize the initial state on the mesh.
    pub fn initial_state(&self, mesh: &Mesh1D) -> Result<NodalField, ConfigError> {
        let spec = self.u0.as_ref().expect("validated u0");
        initial_field(spec, mesh)
    }

    /// Game regions for the configured command (`omega` only for rsc).
    pub fn domains(&self, mesh: &Mesh1D) -> Result<Domains, SolveError> {
        let omega = match self.omega {
            Some((a, b)) => Some(Subdomain::new(mesh, a, b)?),
            None => None,
        };
        let control = match self.region_control {
            Some((a, b)) => Subdomain::new(mesh, a, b)?,
            None => Subdomain::full(mesh),
        };
        let track = match self.region_observe {
            Some((a, b)) => Subdomain::new(mesh, a, b)?,
            None => Subdomain::full(mesh),
        };
        Ok(Domains { omega, control, track })
    }

    pub fn coupled(&self) -> CoupledConfig {
        CoupledConfig {
            ell: self.ell,
            gamma: self.gamma,
            picard_tol: self.picard_tol,
            picard_max: self.picard_max,
            relaxation: self.relaxation,
        }
    }

    pub fn robust_options(&self) -> RobustOptions {
        RobustOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            alpha0: self.alpha0,
            beta0: self.beta0,
        }
    }

    pub fn rsc(&self) -> RscConfig {
        RscConfig {
            beta: self.beta,
            tol: self.tol,
            max_outer: self.max_iter,
            beta_continuation: self.beta_continuation,
        }
    }
}

/// Materialize an initial-state preset (or tabulated file) on a mesh.
pub fn initial_field(spec: &FieldSpec, mesh: &Mesh1D) -> Result<NodalField, ConfigError> {
    let pi = std::f64::consts::PI;
    let half = mesh.half_length();
    Ok(match spec {
        FieldSpec::Sin2 => NodalField::from_fn(mesh, |x| (pi * x / half).sin().powi(2)),
        FieldSpec::Gauss3 => NodalField::from_fn(mesh, |x| 1e-3 * (-x * x).exp()),
        FieldSpec::Zero => NodalField::zeros(mesh),
        FieldSpec::File(path) => {
            let text = fs::read_to_string(path)
                .map_err(|source| ConfigError::Io { path: path.clone(), source })?;
            let mut values = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let v: f64 = line.parse().map_err(|_| ConfigError::Parse {
                    line: i + 1,
                    key: "u0".into(),
                    message: format!("bad nodal value `{line}`"),
                })?;
                values.push(v);
            }
            if values.len() != mesh.n_nodes() {
                return Err(ConfigError::Invalid {
                    key: "u0".into(),
                    message: format!(
                        "file has {} values, mesh has {} nodes",
                        values.len(),
                        mesh.n_nodes()
                    ),
                });
            }
            NodalField::from_values(mesh, values)
        }
    })
}

/// Materialize a trajectory preset on the space-time grid.
pub fn trajectory_field(spec: TrajSpec, mesh: &Mesh1D, grid: &TimeGrid) -> SpaceTimeField {
    let pi = std::f64::consts::PI;
    let half = mesh.half_length();
    let sin2 = move |x: f64| (pi * x / half).sin().powi(2);
    match spec {
        TrajSpec::Zero => SpaceTimeField::zeros(mesh, grid),
        TrajSpec::Sin2Drift => SpaceTimeField::from_fn(mesh, grid, |x, t| {
            sin2(x) + 0.1 * t * ((pi * x / half).cos() + 1.0)
        }),
        TrajSpec::GaussSin2 => {
            SpaceTimeField::from_fn(mesh, grid, |x, _| (-x * x).exp() + sin2(x))
        }
        TrajSpec::TcubicSin2 => {
            SpaceTimeField::from_fn(mesh, grid, |x, t| -t.powi(3) + t.powi(2) + sin2(x))
        }
    }
}

const KEYS: &[&str] = &[
    "command",
    "L",
    "T",
    "n_elems",
    "n_steps",
    "dt",
    "theta",
    "u0",
    "u_d",
    "ubar",
    "omega",
    "O",
    "O_d",
    "ell",
    "gamma",
    "beta",
    "tol",
    "max_iter",
    "picard_tol",
    "picard_max",
    "relaxation",
    "alpha0",
    "beta0",
    "beta_continuation",
    "output",
    "stride",
    "dt_list",
    "n_elems_list",
];

struct Raw {
    entries: BTreeMap<String, (usize, String)>,
}

impl Raw {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }
}

fn parse_raw(text: &str) -> Result<Raw, ConfigError> {
    let mut entries = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Parse {
                line: lineno,
                key: line.to_string(),
                message: "expected key=value".into(),
            });
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::Parse { line: lineno, key, message: "unknown key".into() });
        }
        if entries.insert(key.clone(), (lineno, value)).is_some() {
            return Err(ConfigError::Parse { line: lineno, key, message: "duplicate key".into() });
        }
    }
    Ok(Raw { entries })
}

fn parse_value<T: std::str::FromStr>(
    key: &str,
    line: usize,
    value: &str,
    what: &str,
) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Parse {
        line,
        key: key.to_string(),
        message: format!("expected {what}, got `{value}`"),
    })
}

fn parse_interval(key: &str, line: usize, value: &str) -> Result<(f64, f64), ConfigError> {
    let bad = || ConfigError::Parse {
        line,
        key: key.to_string(),
        message: format!("expected interval `a,b`, got `{value}`"),
    };
    let (a, b) = value.split_once(',').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

fn parse_list<T: std::str::FromStr>(
    key: &str,
    line: usize,
    value: &str,
    what: &str,
) -> Result<Vec<T>, ConfigError> {
    value
        .split(',')
        .map(|item| parse_value(key, line, item.trim(), what))
        .collect()
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut raw = parse_raw(text)?;
    let (line, value) = raw.take("command").ok_or(ConfigError::MissingKey {
        command: "<any>",
        key: "command",
    })?;
    let command = match value.as_str() {
        "solve" => Command::Solve,
        "robust" => Command::Robust,
        "rsc" => Command::Rsc,
        "mms" => Command::Mms,
        other => {
            return Err(ConfigError::Parse {
                line,
                key: "command".into(),
                message: format!("expected solve|robust|rsc|mms, got `{other}`"),
            })
        }
    };
    let mut cfg = RunConfig::defaults(command);

    if let Some((line, v)) = raw.take("L") {
        cfg.half_length = parse_value("L", line, &v, "a positive number")?;
    }
    if let Some((line, v)) = raw.take("T") {
        cfg.t_final = parse_value("T", line, &v, "a positive number")?;
    }
    if let Some((line, v)) = raw.take("n_elems") {
        cfg.n_elems = Some(parse_value("n_elems", line, &v, "an integer")?);
    }
    if let Some((line, v)) = raw.take("n_steps") {
        cfg.n_steps = Some(parse_value("n_steps", line, &v, "an integer")?);
    }
    let dt_entry = raw.take("dt");
    if let Some((line, v)) = raw.take("theta") {
        cfg.theta = parse_value("theta", line, &v, "a number")?;
    }
    if let Some((line, v)) = raw.take("u0") {
        cfg.u0 = Some(parse_field_spec("u0", line, &v)?);
    }
    if let Some((line, v)) = raw.take("u_d") {
        cfg.u_d = Some(parse_traj_spec("u_d", line, &v)?);
    }
    if let Some((line, v)) = raw.take("ubar") {
        cfg.ubar = parse_traj_spec("ubar", line, &v)?;
    }
    if let Some((line, v)) = raw.take("omega") {
        cfg.omega = Some(parse_interval("omega", line, &v)?);
    }
    if let Some((line, v)) = raw.take("O") {
        cfg.region_control = Some(parse_interval("O", line, &v)?);
    }
    if let Some((line, v)) = raw.take("O_d") {
        if v != "full" {
            cfg.region_observe = Some(parse_interval("O_d", line, &v)?);
        }
    }
    if let Some((line, v)) = raw.take("ell") {
        cfg.ell = parse_value("ell", line, &v, "a number")?;
    }
    if let Some((line, v)) = raw.take("gamma") {
        cfg.gamma = parse_value("gamma", line, &v, "a number")?;
    }
    if let Some((line, v)) = raw.take("beta") {
        cfg.beta = parse_value("beta", line, &v, "a number")?;
    }
    if let Some((line, v)) = raw.take("tol") {
        cfg.tol = parse_value("tol", line, &v, "a number")?;
    }
    if let Some((line, v)) = raw.take("max_iter") {
        cfg.max_iter = parse_value("max_iter", line, &v, "an integer")?;
    }
    if let Some((line, v)) = raw.take("picard_tol") {
        cfg.picard_tol = parse_value("picard_tol", line, &v, "a number")?;
    }
    if let Some((line, v)) = raw.take("picard_max") {
        cfg.picard_max = parse_value("picard_max", line, &v, "an integer")?;
    }
    if let Some((line, v)) = raw.take("relaxation") {
        cfg.relaxation = parse_value("relaxation", line, &v, "a number")?;
    }
    if let Some((line, v)) = raw.take("alpha0") {
        cfg.alpha0 = parse_value("alpha0", line, &v, "a number")?;
    }
    if let Some((line, v)) = raw.take("beta0") {
        cfg.beta0 = parse_value("beta0", line, &v, "a number")?;
    }
    if let Some((line, v)) = raw.take("beta_continuation") {
        cfg.beta_continuation = parse_value("beta_continuation", line, &v, "true or false")?;
    }
    if let Some((_, v)) = raw.take("output") {
        cfg.output = Some(PathBuf::from(v));
    }
    if let Some((line, v)) = raw.take("stride") {
        cfg.stride = parse_value("stride", line, &v, "an integer")?;
    }
    if let Some((line, v)) = raw.take("dt_list") {
        cfg.dt_list = parse_list("dt_list", line, &v, "a number")?;
    }
    if let Some((line, v)) = raw.take("n_elems_list") {
        cfg.n_elems_list = parse_list("n_elems_list", line, &v, "an integer")?;
    }
    debug_assert!(raw.entries.is_empty());

    // dt is an alternative spelling of the time resolution.
    if let Some((line, v)) = dt_entry {
        let dt: f64 = parse_value("dt", line, &v, "a positive number")?;
        if dt <= 0.0 {
            return Err(ConfigError::Parse {
                line,
                key: "dt".into(),
                message: "dt must be positive".into(),
            });
        }
        if command == Command::Mms && cfg.dt_list.is_empty() {
            cfg.dt_list = vec![dt];
        } else if cfg.n_steps.is_some() {
            return Err(ConfigError::Parse {
                line,
                key: "dt".into(),
                message: "give either dt or n_steps, not both".into(),
            });
        } else {
            let steps = (cfg.t_final / dt).round();
            if !(steps >= 1.0 && steps.is_finite()) {
                return Err(ConfigError::Parse {
                    line,
                    key: "dt".into(),
                    message: format!("dt={dt} yields no full step within T={}", cfg.t_final),
                });
            }
            cfg.n_steps = Some(steps as usize);
        }
    }
    if command == Command::Mms {
        if cfg.dt_list.is_empty() {
            return Err(ConfigError::MissingKey { command: "mms", key: "dt_list" });
        }
        if cfg.n_elems_list.is_empty() {
            if let Some(n) = cfg.n_elems {
                cfg.n_elems_list = vec![n];
                cfg.n_elems = None;
            } else {
                return Err(ConfigError::MissingKey { command: "mms", key: "n_elems_list" });
            }
        }
    }

    validate(&cfg)?;
    Ok(cfg)
}

fn parse_field_spec(key: &str, line: usize, value: &str) -> Result<FieldSpec, ConfigError> {
    Ok(match value {
        "sin2" => FieldSpec::Sin2,
        "gauss3" => FieldSpec::Gauss3,
        "zero" => FieldSpec::Zero,
        other => match other.strip_prefix("file:") {
            Some(path) if !path.is_empty() => FieldSpec::File(PathBuf::from(path)),
            _ => {
                return Err(ConfigError::Parse {
                    line,
                    key: key.to_string(),
                    message: format!(
                        "expected sin2|gauss3|zero|file:<path>, got `{other}`"
                    ),
                })
            }
        },
    })
}

fn parse_traj_spec(key: &str, line: usize, value: &str) -> Result<TrajSpec, ConfigError> {
    Ok(match value {
        "zero" => TrajSpec::Zero,
        "sin2-drift" => TrajSpec::Sin2Drift,
        "gauss-sin2" => TrajSpec::GaussSin2,
        "tcubic-sin2" => TrajSpec::TcubicSin2,
        other => {
            return Err(ConfigError::Parse {
                line,
                key: key.to_string(),
                message: format!(
                    "expected zero|sin2-drift|gauss-sin2|tcubic-sin2, got `{other}`"
                ),
            })
        }
    })
}

fn check_interval(key: &'static str, iv: (f64, f64), half: f64) -> Result<(), ConfigError> {
    let (a, b) = iv;
    if !(a < b) {
        return Err(ConfigError::Invalid {
            key: key.into(),
            message: format!("interval ({a}, {b}) is empty"),
        });
    }
    if a < -half || b > half {
        return Err(ConfigError::Invalid {
            key: key.into(),
            message: format!("interval ({a}, {b}) escapes the domain (-{half}, {half})"),
        });
    }
    Ok(())
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    let invalid = |key: &str, message: String| ConfigError::Invalid { key: key.into(), message };
    if !(cfg.half_length > 0.0) {
        return Err(invalid("L", format!("must be positive, got {}", cfg.half_length)));
    }
    if !(cfg.t_final > 0.0) {
        return Err(invalid("T", format!("must be positive, got {}", cfg.t_final)));
    }
    if !(cfg.theta > 0.0 && cfg.theta <= 1.0) {
        return Err(invalid("theta", format!("must lie in (0, 1], got {}", cfg.theta)));
    }
    if cfg.stride == 0 {
        return Err(invalid("stride", "must be at least 1".into()));
    }
    for (key, v) in
        [("ell", cfg.ell), ("gamma", cfg.gamma), ("beta", cfg.beta), ("tol", cfg.tol)]
    {
        if !(v > 0.0) {
            return Err(invalid(key, format!("must be positive, got {v}")));
        }
    }
    if !(cfg.relaxation > 0.0 && cfg.relaxation <= 1.0) {
        return Err(invalid(
            "relaxation",
            format!("must lie in (0, 1], got {}", cfg.relaxation),
        ));
    }
    if let Some(iv) = cfg.omega {
        check_interval("omega", iv, cfg.half_length)?;
    }
    if let Some(iv) = cfg.region_control {
        check_interval("O", iv, cfg.half_length)?;
    }
    if let Some(iv) = cfg.region_observe {
        check_interval("O_d", iv, cfg.half_length)?;
    }

    let name = cfg.command.name();
    let missing = |key: &'static str| ConfigError::MissingKey { command: name, key };
    match cfg.command {
        Command::Mms => {
            // Lists already guaranteed non-empty by parse_config.
        }
        Command::Solve | Command::Robust | Command::Rsc => {
            if cfg.n_elems.is_none() {
                return Err(missing("n_elems"));
            }
            if cfg.n_steps.is_none() {
                return Err(missing("n_steps"));
            }
            if cfg.u0.is_none() {
                return Err(missing("u0"));
            }
            if cfg.command == Command::Robust && cfg.u_d.is_none() {
                return Err(missing("u_d"));
            }
            if cfg.command == Command::Robust && cfg.region_control.is_none() {
                return Err(missing("O"));
            }
            if cfg.command == Command::Rsc {
                if cfg.omega.is_none() {
                    return Err(missing("omega"));
                }
                if cfg.region_control.is_none() {
                    return Err(missing("O"));
                }
            }
        }
    }
    if let Some(n) = cfg.n_elems {
        if n < 2 {
            return Err(invalid("n_elems", format!("need at least 2 elements, got {n}")));
        }
    }
    if let Some(n) = cfg.n_steps {
        if n < 1 {
            return Err(invalid("n_steps", format!("need at least 1 step, got {n}")));
        }
    }
    Ok(())
}

fn write_field_spec(out: &mut String, key: &str, spec: &FieldSpec) {
    let value = match spec {
        FieldSpec::Sin2 => "sin2".to_string(),
        FieldSpec::Gauss3 => "gauss3".to_string(),
        FieldSpec::Zero => "zero".to_string(),
        FieldSpec::File(path) => format!("file:{}", path.display()),
    };
    let _ = writeln!(out, "{key} = {value}");
}

fn traj_name(spec: TrajSpec) -> &'static str {
    match spec {
        TrajSpec::Zero => "zero",
        TrajSpec::Sin2Drift => "sin2-drift",
        TrajSpec::GaussSin2 => "gauss-sin2",
        TrajSpec::TcubicSin2 => "tcubic-sin2",
    }
}

/// Emit a document that [`parse_config`] maps back to the same configuration.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "command = {}", cfg.command.name());
    let _ = writeln!(out, "L = {}", cfg.half_length);
    let _ = writeln!(out, "T = {}", cfg.t_final);
    if let Some(n) = cfg.n_elems {
        let _ = writeln!(out, "n_elems = {n}");
    }
    if let Some(n) = cfg.n_steps {
        let _ = writeln!(out, "n_steps = {n}");
    }
    let _ = writeln!(out, "theta = {}", cfg.theta);
    if let Some(spec) = &cfg.u0 {
        write_field_spec(&mut out, "u0", spec);
    }
    if let Some(spec) = cfg.u_d {
        let _ = writeln!(out, "u_d = {}", traj_name(spec));
    }
    let _ = writeln!(out, "ubar = {}", traj_name(cfg.ubar));
    if let Some((a, b)) = cfg.omega {
        let _ = writeln!(out, "omega = {a},{b}");
    }
    if let Some((a, b)) = cfg.region_control {
        let _ = writeln!(out, "O = {a},{b}");
    }
    match cfg.region_observe {
        Some((a, b)) => {
            let _ = writeln!(out, "O_d = {a},{b}");
        }
        None => {
            let _ = writeln!(out, "O_d = full");
        }
    }
    let _ = writeln!(out, "ell = {}", cfg.ell);
    let _ = writeln!(out, "gamma = {}", cfg.gamma);
    let _ = writeln!(out, "beta = {}", cfg.beta);
    let _ = writeln!(out, "tol = {}", cfg.tol);
    let _ = writeln!(out, "max_iter = {}", cfg.max_iter);
    let _ = writeln!(out, "picard_tol = {}", cfg.picard_tol);
    let _ = writeln!(out, "picard_max = {}", cfg.picard_max);
    let _ = writeln!(out, "relaxation = {}", cfg.relaxation);
    let _ = writeln!(out, "alpha0 = {}", cfg.alpha0);
    let _ = writeln!(out, "beta0 = {}", cfg.beta0);
    let _ = writeln!(out, "beta_continuation = {}", cfg.beta_continuation);
    if let Some(path) = &cfg.output {
        let _ = writeln!(out, "output = {}", path.display());
    }
    let _ = writeln!(out, "stride = {}", cfg.stride);
    if !cfg.dt_list.is_empty() {
        let list: Vec<String> = cfg.dt_list.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "dt_list = {}", list.join(","));
    }
    if !cfg.n_elems_list.is_empty() {
        let list: Vec<String> = cfg.n_elems_list.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "n_elems_list = {}", list.join(","));
    }
    out
}
