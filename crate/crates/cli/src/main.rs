//! `sfif`: build, evaluate, bound-check and convergence-test cubic spline
//! super fractal interpolation functions from a TOML configuration.
//!
//! Exit codes: 0 success, 1 output not writable, 2 configuration error,
//! 3 regime violation, 4 solver or model-file failure, 5 depth failure,
//! 6 bound violated.

mod commands;
mod config;
mod exit;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Invocation;
use crate::config::RunConfig;

#[derive(Parser)]
#[command(
    name = "sfif",
    version,
    about = "Cubic spline super fractal interpolation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the spline pool and write model.json.
    Build(CommonArgs),
    /// Evaluate g_sigma and its derivatives on a grid.
    Eval(CommonArgs),
    /// Compare distances between SFIFs with their theoretical bounds.
    Bounds(CommonArgs),
    /// Estimate convergence orders over a sequence of data sizes.
    Converge(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides [output] dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for random code words; overrides [sigma] seed and digits.
    #[arg(long)]
    seed: Option<u64>,
}

type Action = fn(&Invocation) -> Result<(), exit::Failure>;

fn run(cli: Cli) -> Result<(), exit::Failure> {
    let (args, action): (&CommonArgs, Action) = match &cli.command {
        Command::Build(a) => (a, commands::build),
        Command::Eval(a) => (a, commands::eval),
        Command::Bounds(a) => (a, commands::bounds),
        Command::Converge(a) => (a, commands::converge),
    };
    let (config, base) = RunConfig::load(&args.config)?;
    let out = config.out_dir(&base, args.out.as_deref());
    action(&Invocation {
        config,
        base,
        out,
        seed: args.seed,
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
