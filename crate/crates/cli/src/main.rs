//! `qtraj`: validate measurement models, simulate quantum trajectories and
//! estimate the information they extract.
//!
//! Exit codes: 0 on success, 1 on domain errors (invalid models, failed
//! runs), 2 on usage and parse errors.

mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use qtraj_core::algebra::Flooring;
use qtraj_core::dynamics::{solve_master, MasterSolution, Mode, TimeGrid};
use qtraj_core::ensemble::{run_ensemble, Execution, RunConfig};
use qtraj_core::information::run_info;
use qtraj_core::model::{validate, Diagnostic, MeasurementModel};
use qtraj_core::report::{snapshot_header, snapshot_row, write_bound_csv, write_info_csv, Summary, Units};

use output::Output;

const DEFAULT_DT: f64 = 1e-3;
const DEFAULT_STRIDE: usize = 10;
/// Absolute slack for roundoff when comparing the rate with its bound.
const BOUND_SLACK: f64 = 1e-12;

#[derive(Parser, Debug)]
#[command(name = "qtraj", version, about = "Quantum trajectories and continual-measurement information")]
struct Cli {
    /// Worker threads: 0 uses all cores, 1 runs sequentially.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a model file and report diagnostics on standard error.
    Validate {
        model: PathBuf,
        /// Emit diagnostics as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Simulate trajectories and write per-snapshot states as CSV.
    Simulate {
        model: PathBuf,
        #[arg(long)]
        mode: Mode,
        /// Master seed; a random one is generated and printed when omitted.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 100)]
        n_traj: usize,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the classical and quantum information series.
    Info {
        model: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Report entropies in bits.
        #[arg(long)]
        bits: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Path of the summary JSON.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Estimate the information rate against its upper bound.
    Bound {
        model: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct GridArgs {
    /// Time step.
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    /// Final time; defaults to the model horizon.
    #[arg(long)]
    t_max: Option<f64>,
    /// Grid steps between snapshots; defaults to 10 when it divides the grid, else 1.
    #[arg(long)]
    snapshot_stride: Option<usize>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    n_traj: usize,
    #[command(flatten)]
    grid: GridArgs,
    /// Fail on rank-deficient states instead of flooring their spectrum.
    #[arg(long)]
    no_floor: bool,
}

/// A failed command with its exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Invalid(Vec<Diagnostic>),
    Domain(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Invalid(_) | Failure::Domain(_) => 1,
        }
    }
}

impl From<qtraj_core::Error> for Failure {
    fn from(e: qtraj_core::Error) -> Self {
        match e {
            qtraj_core::Error::InvalidModel(diags) => Failure::Invalid(diags),
            qtraj_core::Error::InvalidGrid(_) | qtraj_core::Error::InvalidConfig(_) => Failure::Usage(e.to_string()),
            other => Failure::Domain(other.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let exec = Execution::from_threads(cli.threads);
    let result = match cli.command {
        Command::Validate { model, json } => cmd_validate(&model, json),
        Command::Simulate { model, mode, seed, n_traj, grid, out } => cmd_simulate(&model, mode, seed, n_traj, &grid, out.as_deref(), exec),
        Command::Info { model, run, bits, out, summary } => {
            let units = if bits { Units::Bits } else { Units::Nats };
            cmd_info(&model, &run, units, out.as_deref(), summary.as_deref(), exec)
        }
        Command::Bound { model, run, out } => cmd_bound(&model, &run, out.as_deref(), exec),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Usage(msg) | Failure::Domain(msg) => eprintln!("error: {msg}"),
                Failure::Invalid(diags) => report_diagnostics(diags, false),
            }
            ExitCode::from(failure.code())
        }
    }
}

fn report_diagnostics(diags: &[Diagnostic], json: bool) {
    if json {
        eprintln!("{}", serde_json::to_string_pretty(diags).expect("diagnostics serialize"));
    } else {
        for d in diags {
            eprintln!("{d}");
        }
    }
}

/// Parses a model file; unreadable or malformed files are usage errors.
fn load_model(path: &Path) -> Result<MeasurementModel, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    MeasurementModel::from_json_str(&text).map_err(|e| match e {
        qtraj_core::Error::Json(e) => Failure::Usage(format!("{}: parse error at line {} column {}: {e}", path.display(), e.line(), e.column())),
        other => Failure::from(other),
    })
}

/// Loads a model and rejects it unless it has no diagnostics.
fn load_valid_model(path: &Path) -> Result<MeasurementModel, Failure> {
    let model = load_model(path)?;
    let diags = validate(&model);
    if diags.is_empty() {
        Ok(model)
    } else {
        Err(Failure::Invalid(diags))
    }
}

fn cmd_validate(path: &Path, json: bool) -> CmdResult {
    let diags = match load_model(path) {
        Ok(model) => validate(&model),
        Err(Failure::Invalid(diags)) => diags,
        Err(other) => return Err(other),
    };
    if diags.is_empty() {
        if json {
            report_diagnostics(&diags, true);
        }
        info!("{}: valid", path.display());
        Ok(())
    } else {
        report_diagnostics(&diags, json);
        Err(Failure::Invalid(Vec::new()))
    }
}

/// Grid and master-equation solution for a run, with step-size warnings logged.
fn prepare(model: &MeasurementModel, grid: &GridArgs) -> Result<(MasterSolution, usize), Failure> {
    let t_max = grid.t_max.unwrap_or_else(|| model.horizon());
    let time_grid = TimeGrid::new(t_max, grid.dt)?;
    let stride = grid.snapshot_stride.unwrap_or(if time_grid.n_steps() % DEFAULT_STRIDE == 0 { DEFAULT_STRIDE } else { 1 });
    let master = solve_master(model, time_grid)?;
    for w in time_grid.guard_warnings(model, &master) {
        warn!("{w}");
    }
    Ok((master, stride))
}

fn cmd_simulate(path: &Path, mode: Mode, seed: Option<u64>, n_traj: usize, grid: &GridArgs, out: Option<&Path>, exec: Execution) -> CmdResult {
    let model = load_valid_model(path)?;
    let (master, snapshot_stride) = prepare(&model, grid)?;
    let master_seed = seed.unwrap_or_else(|| {
        let s = rand::random();
        eprintln!("seed: {s}");
        s
    });
    let config = RunConfig { n_traj, master_seed, grid: master.grid, mode, snapshot_stride };
    config.validate()?;
    let mut csv = Output::create(out)?;
    writeln!(csv, "{}", snapshot_header(model.dim(), model.n_diffusive(), model.n_jump())).map_err(io_failure)?;
    run_ensemble(&model, &master, &config, exec, |snap| {
        for (i, state) in snap.samples.iter().enumerate() {
            writeln!(csv, "{}", snapshot_row(i as u64, state))?;
        }
        Ok(())
    })?;
    csv.commit().map_err(io_failure)
}

fn run_series(model: &MeasurementModel, run: &RunArgs, exec: Execution) -> Result<(qtraj_core::information::InfoSeries, RunConfig), Failure> {
    let (master, snapshot_stride) = prepare(model, &run.grid)?;
    let config = RunConfig { n_traj: run.n_traj, master_seed: run.seed, grid: master.grid, mode: Mode::Nonlinear, snapshot_stride };
    config.validate()?;
    let flooring = if run.no_floor { Flooring::Disabled } else { Flooring::Enabled };
    let series = run_info(model, &master, &config, exec, flooring)?;
    Ok((series, config))
}

fn cmd_info(path: &Path, run: &RunArgs, units: Units, out: Option<&Path>, summary: Option<&Path>, exec: Execution) -> CmdResult {
    let model = load_valid_model(path)?;
    let (series, config) = run_series(&model, run, exec)?;
    let mut csv = Output::create(out)?;
    write_info_csv(&mut csv, &series.records, units)?;
    let summary_file = match summary {
        Some(p) => {
            let mut f = Output::create(Some(p))?;
            writeln!(f, "{}", Summary::new(&series, &config, units).to_json()).map_err(io_failure)?;
            Some(f)
        }
        None => None,
    };
    csv.commit().map_err(io_failure)?;
    if let Some(f) = summary_file {
        f.commit().map_err(io_failure)?;
    }
    Ok(())
}

fn cmd_bound(path: &Path, run: &RunArgs, out: Option<&Path>, exec: Execution) -> CmdResult {
    let model = load_valid_model(path)?;
    let (series, _) = run_series(&model, run, exec)?;
    let mut csv = Output::create(out)?;
    write_bound_csv(&mut csv, &series.records, Units::Nats)?;
    let violations =
        series.records.iter().filter(|r| r.s_c_rate > r.bound_rhs + 3.0 * r.s_c_rate_stderr.hypot(r.bound_rhs_stderr) + BOUND_SLACK).count();
    if violations > 0 {
        warn!("rate exceeds the bound by more than 3 stderr at {violations} of {} times", series.records.len());
    }
    csv.commit().map_err(io_failure)
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::Domain(format!("write failed: {e}"))
}
