//! Command-line driver for the quality-ladder / branching-random-walk
//! toolkit.
//!
//! Five subcommands cover the pipeline end to end:
//!
//! * `stationary` — stationary density and mixing rate of the ladder with an
//!   exogenous imitation distribution;
//! * `density` — stationary relative densities with imitation of the best
//!   practice, swept over the frontier success probability `q_m`;
//! * `bellman` — leapfrog value iteration, optionally coupled to the density
//!   map to find the self-consistent support;
//! * `brw` — finite-population branching-random-walk simulation with
//!   selection (seeded, replicated);
//! * `analyze` — velocity and front-shape estimates for `brw` output,
//!   compared against the deterministic predictions.
//!
//! All experiment parameters live in one JSON config file (`--config`); the
//! seed, replica count, output directory, and snapshot cadence can be
//! overridden on the command line. Outputs are CSV files plus JSON summaries
//! under the output directory. Runs are deterministic: the same config and
//! seed produce byte-identical output files.
//!
//! Exit status: `0` success, `2` validation error (bad or missing
//! parameters), `3` I/O or manifest error, `4` numeric failure or
//! non-convergence.

mod cmd_analyze;
mod cmd_bellman;
mod cmd_brw;
mod cmd_density;
mod cmd_stationary;
mod config;
mod output;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

/// An error carrying the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

/// Map library errors onto the exit-code contract. Parameter and domain
/// problems are validation failures (2); everything discovered only while
/// computing — divergence, missing thresholds or fixed points, unstable
/// numerics — is a numeric failure (4).
impl From<qladder::Error> for CliError {
    fn from(e: qladder::Error) -> Self {
        use qladder::Error::*;
        let code = match &e {
            InvalidParameter(_)
            | DimensionMismatch { .. }
            | NoStationarySolution
            | GridTooSmall { .. }
            | DomainError(_)
            | WindowError(_) => EXIT_VALIDATION,
            PowerIterationDiverged { .. }
            | IllDefinedModel
            | ModelViolation(_)
            | NoLeapfrog { .. }
            | OuterNoFixedPoint { .. }
            | NoMinimum(_)
            | NumericError(_)
            | NoSteadyRate { .. }
            | Extinct { .. } => EXIT_NUMERIC,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// Flags shared by every subcommand. Command-line values take precedence
/// over the corresponding config fields.
#[derive(Debug, Args)]
pub struct Common {
    /// Path to the JSON experiment config
    #[arg(long, value_name = "PATH")]
    config: PathBuf,

    /// Base RNG seed (overrides `base_seed` in the config)
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,

    /// Number of independent replicas (overrides `replicas` in the config)
    #[arg(long, value_name = "INT")]
    replicas: Option<u32>,

    /// Output directory (overrides `output_dir` in the config)
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Steps between profile snapshots, 0 disables (overrides
    /// `brw.snapshot_every` in the config)
    #[arg(long = "snapshot-every", value_name = "INT")]
    snapshot_every: Option<u64>,
}

#[derive(Debug, Parser)]
#[command(name = "qladder", version, about = "Quality ladders, imitation, and branching random walks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stationary density of the ladder with exogenous imitation
    Stationary(Common),
    /// Stationary relative densities with endogenous support (q_m sweep)
    Density(Common),
    /// Leapfrog Bellman equation, coupled to the density map when q_m is set
    Bellman(Common),
    /// Simulate the finite-population branching random walk with selection
    Brw(Common),
    /// Compare brw runs against velocity and front-shape predictions
    Analyze(Common),
}

type CommandFn = fn(&config::Resolved) -> Result<(), CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (common, run): (&Common, CommandFn) = match &cli.command {
        Command::Stationary(c) => (c, cmd_stationary::run),
        Command::Density(c) => (c, cmd_density::run),
        Command::Bellman(c) => (c, cmd_bellman::run),
        Command::Brw(c) => (c, cmd_brw::run),
        Command::Analyze(c) => (c, cmd_analyze::run),
    };
    let result = config::Resolved::load(common).and_then(|resolved| run(&resolved));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
