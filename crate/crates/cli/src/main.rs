//! `prune-planner`: fit accuracy predictors, plan pruning under a FLOPs
//! budget, collect samples from a trainer and check separability.

mod commands;
mod manifest;
mod serve;

use std::fmt;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use prune_planner::regress::Unit;
use prune_planner::Error;

#[derive(Debug, Parser)]
#[command(name = "prune-planner", version, about = "Depth/width/resolution pruning planner")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Seed for splits, fit initialization and simulation.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory receiving every artifact.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Scale of accuracy values in input files.
    #[arg(long, global = true, value_enum, default_value_t = UnitArg::Auto)]
    pub unit: UnitArg,
    /// Treat a fit that hits the sweep limit as a failure.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Print nothing on success.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum UnitArg {
    Auto,
    Percent,
    Fraction,
}

impl From<UnitArg> for Unit {
    fn from(u: UnitArg) -> Unit {
        match u {
            UnitArg::Auto => Unit::Auto,
            UnitArg::Percent => Unit::Percent,
            UnitArg::Fraction => Unit::Fraction,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a predictor to `d,w,r,accuracy` samples.
    Fit(commands::FitArgs),
    /// Find the best ratios for a FLOPs budget under a fitted predictor.
    Plan(commands::PlanArgs),
    /// Gather samples by pruning one dimension at a time.
    Collect(commands::CollectArgs),
    /// Fit and plan for several degrees and ranks on a train/eval split.
    Sweep(commands::SweepArgs),
    /// Check that accuracy ratios are independent across dimensions.
    Validate(commands::ValidateArgs),
    /// Fit, plan and validate in one go, with a Markdown summary.
    Report(commands::ReportArgs),
    /// Simulated trainer speaking the line protocol on stdin/stdout.
    #[command(hide = true)]
    Serve(serve::ServeArgs),
}

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Read { path: PathBuf, source: io::Error },
    Write { path: PathBuf, source: io::Error },
    Usage(String),
    NotConverged(String),
    ValidationFailed(String),
}

impl CliError {
    pub fn read(path: &Path, source: io::Error) -> Self {
        CliError::Read { path: path.to_path_buf(), source }
    }

    pub fn write(path: &Path, source: io::Error) -> Self {
        CliError::Write { path: path.to_path_buf(), source }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::Protocol(_) | Error::TranscriptMismatch(_) => 4,
                Error::InsufficientGrid(_) => 5,
                Error::Io(_) | Error::NonFinite(_) => 1,
                _ => 2,
            },
            CliError::Read { .. } | CliError::Usage(_) => 2,
            CliError::NotConverged(_) => 3,
            CliError::Write { .. } | CliError::ValidationFailed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Read { path, source } => write!(f, "cannot read {}: {source}", path.display()),
            CliError::Write { path, source } => write!(f, "cannot write {}: {source}", path.display()),
            CliError::Usage(m) | CliError::NotConverged(m) | CliError::ValidationFailed(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => commands::fit(&cli.global, &a),
        Command::Plan(a) => commands::plan(&cli.global, &a),
        Command::Collect(a) => commands::collect(&cli.global, &a),
        Command::Sweep(a) => commands::sweep(&cli.global, &a),
        Command::Validate(a) => commands::validate(&cli.global, &a),
        Command::Report(a) => commands::report(&cli.global, &a),
        Command::Serve(a) => serve::run(&cli.global, &a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("prune-planner: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
