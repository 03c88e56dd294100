//! `deblur`: simulate blurred scenes, reconstruct them and export diagnostics.

mod commands;
mod failure;
mod manifest;
mod options;
mod scene;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{AnalyzeArgs, DeblurArgs, MultilevelArgs, ReproArgs, SimulateArgs};
use failure::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "deblur",
    version,
    about = "Image deblurring with regularized inverse solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Blur a test scene and add noise; writes x_true.pgm, b_true.pgm, b.pgm and manifest.txt.
    Simulate(SimulateArgs),
    /// Reconstruct a simulated scene; writes x_reg.pgm, report.csv and run_manifest.txt.
    Deblur(DeblurArgs),
    /// Export sigma.csv, picard.csv, lcurve.csv and coefficients.csv.
    Analyze(AnalyzeArgs),
    /// Solve on Haar-coarsened levels; writes x_level{n}.pgm and b_level{n}.pgm.
    Multilevel(MultilevelArgs),
    /// Regenerate the data behind every diagnostic figure.
    ReproFigures(ReproArgs),
}

/// The solvers are single-threaded, so the cap only needs to be well formed.
fn check_thread_cap() -> CliResult<()> {
    match std::env::var("DEBLUR_THREADS") {
        Ok(v) if v.parse::<usize>().map_or(true, |n| n == 0) => Err(CliError::flags(format!(
            "DEBLUR_THREADS must be a positive integer, got {v:?}"
        ))),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    check_thread_cap()?;
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Deblur(a) => commands::deblur(&a).map(|_| ()),
        Command::Analyze(a) => commands::analyze(&a),
        Command::Multilevel(a) => commands::multilevel(&a),
        Command::ReproFigures(a) => commands::repro_figures(&a),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on its own for malformed flags
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
