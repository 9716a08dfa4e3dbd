//! Command-line driver: parse a run configuration, execute the requested
//! experiment, and serialize the results into the output directory.
//!
//! Exit codes: 0 when the run converged (or needs no convergence), 2 when an
//! iteration budget ran out, 1 on any error.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use ks_control::config::{
    parse_config, serialize_config, trajectory_field, Command, ConfigError, RunConfig,
};
use ks_control::forward::{solve_forward, Discretization, ForwardProblem};
use ks_control::mms::{convergence_table, ManufacturedCase};
use ks_control::report::{
    write_field_csv_strided, write_mms_csv, write_report_csv, RunReport,
};
use ks_control::robust::{grad_psi, grad_v, run_robust};
use ks_control::stackelberg::run_rsc;

#[derive(Parser)]
#[command(
    name = "ks-control",
    version,
    about = "Finite-element solver and control loops for a fourth-order evolution equation"
)]
struct Cli {
    /// Experiment to run; must agree with the config's `command` key if that
    /// key is present.
    #[arg(value_enum)]
    command: CliCommand,
    /// Path to the key=value run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's `output`; defaults to `.`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CliCommand {
    Solve,
    Robust,
    Rsc,
    Mms,
}

impl From<CliCommand> for Command {
    fn from(c: CliCommand) -> Command {
        match c {
            CliCommand::Solve => Command::Solve,
            CliCommand::Robust => Command::Robust,
            CliCommand::Rsc => Command::Rsc,
            CliCommand::Mms => Command::Mms,
        }
    }
}

impl fmt::Display for CliCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            CliCommand::Solve => "solve",
            CliCommand::Robust => "robust",
            CliCommand::Rsc => "rsc",
            CliCommand::Mms => "mms",
        };
        f.write_str(name)
    }
}

type AnyError = Box<dyn std::error::Error>;

/// Outcome the driver maps to an exit code.
enum Outcome {
    Converged,
    MaxIterReached,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Converged) => ExitCode::SUCCESS,
        Ok(Outcome::MaxIterReached) => {
            eprintln!("stopped: iteration budget exhausted before the tolerance was met");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, AnyError> {
    let text = fs::read_to_string(&cli.config)
        .map_err(|e| format!("reading `{}`: {e}", cli.config.display()))?;
    let cfg = parse_with_cli_command(&text, cli.command)?;
    if cfg.command != cli.command.into() {
        return Err(format!(
            "config says `command = {}` but the command line asked for `{}`",
            serialize_command(cfg.command),
            cli.command
        )
        .into());
    }
    let out_dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir)
        .map_err(|e| format!("creating `{}`: {e}", out_dir.display()))?;
    // Echo the resolved configuration (defaults included) for reproducibility.
    fs::write(out_dir.join("config.txt"), serialize_config(&cfg))?;
    match cfg.command {
        Command::Solve => run_solve(&cfg, &out_dir),
        Command::Robust => run_robust_cmd(&cfg, &out_dir),
        Command::Rsc => run_rsc_cmd(&cfg, &out_dir),
        Command::Mms => run_mms(&cfg, &out_dir),
    }
}

/// Parse the config, letting the command-line verb stand in for a missing
/// `command` key. The fallback is appended (not prepended) so error messages
/// keep the original line numbers.
fn parse_with_cli_command(text: &str, cli: CliCommand) -> Result<RunConfig, ConfigError> {
    match parse_config(text) {
        Err(ConfigError::MissingKey { key: "command", .. }) => {
            parse_config(&format!("{text}\ncommand = {cli}"))
        }
        other => other,
    }
}

fn serialize_command(command: Command) -> &'static str {
    match command {
        Command::Solve => "solve",
        Command::Robust => "robust",
        Command::Rsc => "rsc",
        Command::Mms => "mms",
    }
}

fn run_solve(cfg: &RunConfig, out: &Path) -> Result<Outcome, AnyError> {
    let mesh = cfg.mesh()?;
    let grid = cfg.grid()?;
    let u0 = cfg.initial_state(&mesh)?;
    let prob = ForwardProblem::new(&mesh, grid, cfg.theta, u0);
    let n_nodes = mesh.n_nodes();
    let (u, _w) = solve_forward(&prob, |_| vec![0.0; n_nodes])?;
    write_field_csv_strided(&u, &mesh, &grid, cfg.stride, &out.join("u.csv"))?;
    write_report_csv(&RunReport::default(), &out.join("report.csv"))?;
    println!(
        "solve: {} steps on {} elements, final |u|_max = {:.6e}",
        grid.n_steps(),
        mesh.n_elems(),
        u.terminal().iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    );
    Ok(Outcome::Converged)
}

fn run_robust_cmd(cfg: &RunConfig, out: &Path) -> Result<Outcome, AnyError> {
    let mesh = cfg.mesh()?;
    let grid = cfg.grid()?;
    let disc = Discretization::new(&mesh, grid, cfg.theta)?;
    let u0 = cfg.initial_state(&mesh)?;
    let u_d = trajectory_field(cfg.u_d.expect("validated u_d"), &mesh, &grid);
    let domains = cfg.domains(&mesh)?;
    let run = run_robust(
        &disc,
        &u0,
        None,
        &u_d,
        &domains,
        &cfg.coupled(),
        &cfg.robust_options(),
    )?;
    let report = RunReport::from_robust(&run);
    write_report_csv(&report, &out.join("report.csv"))?;
    for (name, field) in [
        ("u", &run.state.u),
        ("z", &run.state.z),
        ("v", &run.state.v),
        ("psi", &run.state.psi),
    ] {
        let path = out.join(format!("{name}.csv"));
        write_field_csv_strided(field, &mesh, &grid, cfg.stride, &path)?;
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    // The converged evaluation is not an iteration row; recompute its norms.
    let gv = grad_v(&mesh, &run.state.z, &run.state.v, cfg.ell, &domains.control);
    let gpsi = grad_psi(&run.state.z, &run.state.psi, cfg.gamma);
    println!(
        "robust: converged={} after {} iterations, |grad_v|+|grad_psi| = {:.3e}",
        run.converged,
        run.iterations.len(),
        disc.l2q(&gv) + disc.l2q(&gpsi)
    );
    Ok(if run.converged { Outcome::Converged } else { Outcome::MaxIterReached })
}

fn run_rsc_cmd(cfg: &RunConfig, out: &Path) -> Result<Outcome, AnyError> {
    let mesh = cfg.mesh()?;
    let grid = cfg.grid()?;
    let disc = Discretization::new(&mesh, grid, cfg.theta)?;
    let u0 = cfg.initial_state(&mesh)?;
    let ubar = trajectory_field(cfg.ubar, &mesh, &grid);
    let u_d = cfg.u_d.map(|spec| trajectory_field(spec, &mesh, &grid));
    if u_d.is_none() {
        println!("note: u_d defaults to the target trajectory ubar");
    }
    let domains = cfg.domains(&mesh)?;
    let run = run_rsc(
        &disc,
        &u0,
        &ubar,
        u_d.as_ref(),
        &domains,
        &cfg.coupled(),
        &cfg.rsc(),
    )?;
    let report = RunReport::from_rsc(&run);
    write_report_csv(&report, &out.join("report.csv"))?;
    for (name, field) in [
        ("h", &run.state.h),
        ("u", &run.state.u),
        ("z", &run.state.z),
        ("phi1", &run.state.phi1),
        ("phi2", &run.state.phi2),
    ] {
        let path = out.join(format!("{name}.csv"));
        write_field_csv_strided(field, &mesh, &grid, cfg.stride, &path)?;
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    println!(
        "rsc: converged={} after {} evaluations, terminal error = {:.6e}",
        run.converged,
        run.iterations.len(),
        run.state.terminal_error
    );
    Ok(if run.converged { Outcome::Converged } else { Outcome::MaxIterReached })
}

fn run_mms(cfg: &RunConfig, out: &Path) -> Result<Outcome, AnyError> {
    let case = ManufacturedCase::growing_sine_squared(cfg.half_length, cfg.t_final);
    let entries = convergence_table(&case, &cfg.dt_list, &cfg.n_elems_list, cfg.theta);
    let mut rows = Vec::new();
    let mut failures = 0usize;
    for entry in entries {
        match entry.outcome {
            Ok(row) => {
                println!(
                    "mms: dt={} n_elems={} linf={:.6e} l2={:.6e}",
                    row.dt, row.n_elems, row.linf_error, row.l2_error
                );
                rows.push(row);
            }
            Err(err) => {
                println!("mms: dt={} n_elems={} failed: {err}", entry.dt, entry.n_elems);
                failures += 1;
            }
        }
    }
    write_mms_csv(&rows, &out.join("mms.csv"))?;
    if failures > 0 {
        return Err(format!("{failures} accuracy case(s) failed; table written without them").into());
    }
    Ok(Outcome::Converged)
}
