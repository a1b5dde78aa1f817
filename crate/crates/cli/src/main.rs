//! `sweepplan`: critical velocities, sweep plans, grid runs and parameter
//! studies from the command line.
//!
//! Exit codes: 0 ok, 1 verify failure, 2 invalid input, 3 infeasible plan.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sweep_core::oracle::{simulate, GridConfig};
use sweep_core::planner::build_plan;
use sweep_core::report::{
    attach_sampled, critical_rows, write_critical_csv, write_cycles_csv, write_plan_summary_csv,
    write_simulation_csv, write_simulation_cycles_csv, write_study_csv, CriticalRow,
};
use sweep_core::study::{study_alpha, study_delta_v, Range, StudyRow};
use sweep_core::velocity::{critical_velocities, CriticalVelocitySet, DEFAULT_BISECTION_EPS};
use sweep_core::verify::{self, VerifyOptions};
use sweep_core::{Execution, SearchParams, SweepError};
use thiserror::Error;

use crate::config::{ConfigError, FileConfig};

/// Relative output paths resolve against this directory when it is set.
const OUTPUT_DIR_ENV: &str = "SWEEPPLAN_OUTPUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "sweepplan", version, about = "Line-sensor sweep planning for evaders in a disk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Every critical velocity with the gap minimum at each.
    Critical {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Bisection tolerance.
        #[arg(long)]
        eps: Option<f64>,
        /// Add sampled confinement margins and brute-force minimisers.
        #[arg(long)]
        n_samples: Option<usize>,
    },
    /// Shrinking-circle plan with its end game.
    Plan {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Also write one CSV row per cycle here.
        #[arg(long)]
        cycles: Option<PathBuf>,
    },
    /// Runs the plan against the occupancy-grid oracle.
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        out: OutputArgs,
        /// Cell size; defaults to r / 40.
        #[arg(long)]
        h: Option<f64>,
        /// Time step; defaults to h / (2 vs).
        #[arg(long)]
        dt: Option<f64>,
        /// Planned against simulated radius per cycle, as CSV.
        #[arg(long)]
        cycles: Option<PathBuf>,
        /// Per-step snapshot CSV.
        #[arg(long)]
        snapshots: Option<PathBuf>,
        /// Steps between snapshots.
        #[arg(long, default_value_t = 100)]
        snapshot_every: usize,
    },
    /// Plans over a grid of R0 / r ratios.
    StudyAlpha {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Plans over a grid of velocity increments.
    StudyDeltav {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        out: OutputArgs,
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Acceptance checks at the reference instance.
    Verify {
        #[command(flatten)]
        out: OutputArgs,
        /// Skip the grid simulation.
        #[arg(long)]
        quick: bool,
        /// Seed for the random parameter draws.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args, Debug)]
struct ParamArgs {
    /// Initial region radius.
    #[arg(long = "R0", allow_negative_numbers = true)]
    r0: Option<f64>,
    /// Sensor half-length.
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    /// Evader speed.
    #[arg(long = "VT", allow_negative_numbers = true)]
    vt: Option<f64>,
    /// Sweeper speed above the critical velocity.
    #[arg(long = "dV", allow_negative_numbers = true)]
    dv: Option<f64>,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// key = value file; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Evaluate batches on the calling thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args, Debug)]
struct RangeArgs {
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    step: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("verification failed: criteria {0}")]
    VerifyFailed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Sweep(SweepError::Infeasible { .. }) => 3,
            _ => 2,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Flags, the config file and defaults merged for one command.
struct Run {
    file: FileConfig,
    format: Format,
    output: Option<PathBuf>,
    exec: Execution,
}

impl Run {
    fn new(out: &OutputArgs, default_format: Format) -> CliResult<Self> {
        let file = match &out.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let format = match (out.format, file.text("format")) {
            (Some(f), _) => f,
            (None, Some(text)) => Format::from_str(text, true)
                .map_err(|_| CliError::Usage(format!("config key format: unknown value {text:?}")))?,
            (None, None) => default_format,
        };
        let exec = if out.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        };
        Ok(Run {
            file,
            format,
            output: out.output.clone(),
            exec,
        })
    }

    fn pick<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> CliResult<Option<T>> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => Ok(self.file.number(key)?),
        }
    }

    /// Reference instance `(100, 10, 1, 1)` for anything left unset.
    fn params(&self, a: &ParamArgs) -> CliResult<SearchParams> {
        Ok(SearchParams::new(
            self.pick(a.r0, "R0")?.unwrap_or(100.0),
            self.pick(a.r, "r")?.unwrap_or(10.0),
            self.pick(a.vt, "VT")?.unwrap_or(1.0),
            self.pick(a.dv, "dV")?.unwrap_or(1.0),
        )?)
    }

    fn range(&self, a: &RangeArgs) -> CliResult<Range> {
        let get = |flag, key| -> CliResult<f64> {
            self.pick(flag, key)?
                .ok_or_else(|| CliError::Usage(format!("study commands need --{key}")))
        };
        Ok(Range::new(get(a.from, "from")?, get(a.to, "to")?, get(a.step, "step")?)?)
    }

    fn reject_range(&self, command: &str) -> CliResult<()> {
        for key in ["from", "to", "step"] {
            if self.file.has(key) {
                return Err(CliError::Usage(format!(
                    "{command} takes no range, but the config sets {key}"
                )));
            }
        }
        Ok(())
    }

    fn emit(&self, body: &[u8]) -> CliResult<()> {
        match &self.output {
            Some(path) => write_file(path, body),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(body)
                    .and_then(|_| stdout.flush())
                    .map_err(|source| CliError::Io {
                        path: "stdout".to_string(),
                        source,
                    })
            }
        }
    }
}

fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_DIR_ENV) {
        Some(dir) if path.is_relative() && !dir.is_empty() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn write_file(path: &Path, body: &[u8]) -> CliResult<()> {
    let path = resolve(path);
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    std::fs::write(&path, body).map_err(io)
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("output serializes");
    text.push('\n');
    text.into_bytes()
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> sweep_core::Result<()>) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

#[derive(Serialize)]
struct CriticalDoc<'a> {
    params: SearchParams,
    epsilon: f64,
    velocities: &'a CriticalVelocitySet,
    rows: &'a [CriticalRow],
}

#[derive(Serialize)]
struct StudyDoc<'a> {
    parameter: &'a str,
    base: SearchParams,
    range: Range,
    rows: &'a [StudyRow],
}

fn cmd_critical(params: &ParamArgs, out: &OutputArgs, eps: Option<f64>, n_samples: Option<usize>) -> CliResult<()> {
    let run = Run::new(out, Format::Csv)?;
    run.reject_range("critical")?;
    let p = run.params(params)?;
    let eps = run.pick(eps, "eps")?.unwrap_or(DEFAULT_BISECTION_EPS);
    let set = critical_velocities(&p, eps)?;
    let mut rows = critical_rows(&set, &p)?;
    if let Some(n) = run.pick(n_samples, "n_samples")? {
        if n < 2 {
            return Err(CliError::Usage(format!("--n-samples must be at least 2, got {n}")));
        }
        attach_sampled(&mut rows, &p, n, run.exec);
    }
    let body = match run.format {
        Format::Json => json(&CriticalDoc {
            params: p,
            epsilon: eps,
            velocities: &set,
            rows: &rows,
        }),
        Format::Csv => csv_bytes(|b| write_critical_csv(&rows, eps, b))?,
    };
    run.emit(&body)
}

fn cmd_plan(params: &ParamArgs, out: &OutputArgs, cycles: Option<&Path>) -> CliResult<()> {
    let run = Run::new(out, Format::Csv)?;
    run.reject_range("plan")?;
    let plan = build_plan(&run.params(params)?)?;
    if let Some(path) = cycles {
        write_file(path, &csv_bytes(|b| write_cycles_csv(&plan, b))?)?;
    }
    let body = match run.format {
        Format::Json => {
            let mut text = plan.to_json();
            text.push('\n');
            text.into_bytes()
        }
        Format::Csv => csv_bytes(|b| write_plan_summary_csv(&plan, b))?,
    };
    run.emit(&body)
}

struct SimulateArgs<'a> {
    h: Option<f64>,
    dt: Option<f64>,
    cycles: Option<&'a Path>,
    snapshots: Option<&'a Path>,
    snapshot_every: usize,
}

fn cmd_simulate(params: &ParamArgs, out: &OutputArgs, a: SimulateArgs) -> CliResult<()> {
    let run = Run::new(out, Format::Json)?;
    run.reject_range("simulate")?;
    let plan = build_plan(&run.params(params)?)?;
    let mut cfg = match run.pick(a.h, "h")? {
        Some(h) => GridConfig::with_h(&plan, h),
        None => GridConfig::for_plan(&plan),
    };
    if let Some(dt) = run.pick(a.dt, "dt")? {
        cfg.dt = dt;
    }
    if a.snapshots.is_some() {
        cfg.snapshot_every = a.snapshot_every.max(1);
    }
    let res = simulate(&plan, &cfg)?;
    if let Some(path) = a.cycles {
        write_file(path, &csv_bytes(|b| write_simulation_cycles_csv(&plan, &res, b))?)?;
    }
    if let Some(path) = a.snapshots {
        write_file(path, &csv_bytes(|b| res.write_snapshots_csv(b))?)?;
    }
    let body = match run.format {
        Format::Json => {
            let mut text = res.summary_json();
            text.push('\n');
            text.into_bytes()
        }
        Format::Csv => csv_bytes(|b| write_simulation_csv(&res, b))?,
    };
    run.emit(&body)
}

fn cmd_study(params: &ParamArgs, out: &OutputArgs, range: &RangeArgs, alpha: bool) -> CliResult<()> {
    let run = Run::new(out, Format::Csv)?;
    let base = run.params(params)?;
    let grid = run.range(range)?;
    let (label, rows) = if alpha {
        ("alpha", study_alpha(&base, &grid, run.exec)?)
    } else {
        ("delta_v", study_delta_v(&base, &grid, run.exec)?)
    };
    let body = match run.format {
        Format::Json => json(&StudyDoc {
            parameter: label,
            base,
            range: grid,
            rows: &rows,
        }),
        Format::Csv => csv_bytes(|b| write_study_csv(label, &rows, b))?,
    };
    run.emit(&body)
}

fn cmd_verify(out: &OutputArgs, quick: bool, seed: Option<u64>) -> CliResult<()> {
    let run = Run::new(out, Format::Json)?;
    let opts = VerifyOptions {
        quick,
        seed: run.pick(seed, "seed")?.unwrap_or(VerifyOptions::default().seed),
        exec: run.exec,
    };
    let report = verify::run(&opts);
    for c in &report.checks {
        eprintln!("criterion {}: {} {}", c.id, c.status(), c.name);
    }
    let body = match run.format {
        Format::Json => json(&report),
        Format::Csv => {
            let mut text = String::from("id,name,status\n");
            for c in &report.checks {
                text.push_str(&format!("{},{},{}\n", c.id, c.name, c.status()));
            }
            text.into_bytes()
        }
    };
    run.emit(&body)?;
    if report.all_passed {
        Ok(())
    } else {
        let failed: Vec<_> = report
            .checks
            .iter()
            .filter(|c| c.passed == Some(false))
            .map(|c| c.id.to_string())
            .collect();
        Err(CliError::VerifyFailed(failed.join(", ")))
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Critical {
            params,
            out,
            eps,
            n_samples,
        } => cmd_critical(params, out, *eps, *n_samples),
        Command::Plan { params, out, cycles } => cmd_plan(params, out, cycles.as_deref()),
        Command::Simulate {
            params,
            out,
            h,
            dt,
            cycles,
            snapshots,
            snapshot_every,
        } => cmd_simulate(
            params,
            out,
            SimulateArgs {
                h: *h,
                dt: *dt,
                cycles: cycles.as_deref(),
                snapshots: snapshots.as_deref(),
                snapshot_every: *snapshot_every,
            },
        ),
        Command::StudyAlpha { params, out, range } => cmd_study(params, out, range, true),
        Command::StudyDeltav { params, out, range } => cmd_study(params, out, range, false),
        Command::Verify { out, quick, seed } => cmd_verify(out, *quick, *seed),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
