mod device;
mod report;
mod schedule;
mod synthesize;
mod verify;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use globalspin::device::{load_geometry, load_preset, DeviceGeometry};

use report::{Format, RunReport};

pub const EXIT_PASS: u8 = 0;
pub const EXIT_CHECK_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;
pub const EXIT_UNREALIZABLE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "globalspin",
    version,
    about = "Global-field + exchange pulse sequences: verify, synthesize, model the device, schedule"
)]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "human")]
    format: Format,
    /// Seed for every random draw; reports echo it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Also write the main table as CSV to this path.
    #[arg(long, global = true, value_name = "PATH")]
    csv: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the randomized identity suite.
    Verify(verify::Args),
    /// Search pulse-template sequences for a target gate.
    Synthesize(synthesize::Args),
    /// Fields, device constants, timings and tolerances of a wire geometry.
    Device(device::Args),
    /// Compile a circuit to a timed schedule, or replay a schedule.
    Schedule(schedule::Args),
}

/// Failure that ends a run before a report exists.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<globalspin::Error> for Failure {
    fn from(e: globalspin::Error) -> Self {
        use globalspin::Error as E;
        let code = match e {
            E::UnrealizableAngles { .. } | E::DurationCapExceeded { .. } => EXIT_UNREALIZABLE,
            E::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

pub fn read_input(path: &Path, report: &mut RunReport) -> Result<String, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    report.input(path, &bytes);
    String::from_utf8(bytes).map_err(|_| Failure::input(format!("{}: not UTF-8", path.display())))
}

/// Geometry from a file when given, else the named preset.
pub fn geometry(preset: &str, file: Option<&Path>, report: &mut RunReport) -> Result<DeviceGeometry, Failure> {
    match file {
        Some(path) => {
            let src = read_input(path, report)?;
            let g = globalspin::device::parse_geometry(&src)?;
            Ok(g)
        }
        None => Ok(load_preset(preset)?),
    }
}

pub fn load_named_geometry(name: &str, file: Option<&Path>) -> globalspin::Result<DeviceGeometry> {
    match file {
        Some(path) => load_geometry(path),
        None => load_preset(name),
    }
}

pub struct Context {
    pub seed: u64,
    pub seed_given: bool,
    pub csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = std::env::args().collect::<Vec<_>>().join(" ");
    let ctx = Context {
        seed: cli.seed.unwrap_or(0),
        seed_given: cli.seed.is_some(),
        csv: cli.csv.clone(),
    };
    let outcome = match &cli.command {
        Command::Verify(a) => verify::run(a, &ctx, command),
        Command::Synthesize(a) => synthesize::run(a, &ctx, command),
        Command::Device(a) => device::run(a, &ctx, command),
        Command::Schedule(a) => schedule::run(a, &ctx, command),
    };
    match outcome {
        Ok((report, code)) => {
            let mut out = std::io::stdout().lock();
            if let Err(e) = report.emit(cli.format, &mut out).and_then(|_| out.flush()) {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_INPUT);
            }
            if let (Some(path), true) = (&ctx.csv, code.csv_checks) {
                if let Err(e) = report.write_checks_csv(path) {
                    eprintln!("error: {}: {e}", path.display());
                    return ExitCode::from(EXIT_INPUT);
                }
            }
            let code = code
                .override_code
                .unwrap_or(if report.pass() { EXIT_PASS } else { EXIT_CHECK_FAILED });
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// How a finished run maps to an exit status.
pub struct Outcome {
    /// Exit code that takes precedence over the check results.
    pub override_code: Option<u8>,
    /// Whether `--csv` receives the check table.
    pub csv_checks: bool,
}

impl Outcome {
    pub fn checks() -> Self {
        Self {
            override_code: None,
            csv_checks: true,
        }
    }
}
