//! `sphereflow` command-line tool.
//!
//! Exit codes: 0 ok, 1 config or usage error, 2 stationary solver failure,
//! 3 dynamics abort, 4 verification failure.

mod commands;
mod output;
mod verify;

use clap::{Parser, Subcommand};
use sphereflow::{Config, ConfigError};
use std::path::PathBuf;
use std::process::ExitCode;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "sphereflow", version, about = "Free-boundary viscous gas ball: stationary states, dynamics, checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the `seed` key.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Suppress progress and tables on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the hydrostatic problem and write the profile.
    Stationary,
    /// Run the time-dependent problem and write snapshots and diagnostics.
    Simulate,
    /// Run the checks selected by `verify.checks`.
    Verify,
    /// Self-convergence study over a ladder of doubling grids.
    Convergence {
        /// Comma-separated grid sizes, each twice the previous.
        #[arg(long, default_value = "100,200,400")]
        grids: String,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("usage: {0}")]
    Usage(String),
    #[error("stationary solver failed: {0}")]
    Stationary(String),
    #[error("simulation {0}")]
    Aborted(String),
    #[error("{0} check(s) failed")]
    Verification(usize),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Stationary(_) => 2,
            CliError::Aborted(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Settings shared by every subcommand.
pub struct Context {
    pub config: Config,
    pub out: PathBuf,
    pub quiet: bool,
}

impl Context {
    pub fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }
}

fn set_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("SPHEREFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("SPHEREFLOW_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    set_threads()?;
    let path = cli.config.ok_or_else(|| CliError::Usage("--config PATH is required".into()))?;
    let mut config = Config::load(&path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let ctx = Context { config, out: cli.out, quiet: cli.quiet };
    match cli.command {
        Command::Stationary => commands::stationary(&ctx),
        Command::Simulate => commands::simulate(&ctx),
        Command::Verify => verify::run(&ctx),
        Command::Convergence { grids } => commands::convergence(&ctx, &grids),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
