//! `heisenberg`: trace geodesics of the Heisenberg group, run the verification
//! suite, search for Riemannian counterexamples and dump metric data.
//!
//! Exit codes: 0 success, 1 usage or invalid configuration, 2 I/O error,
//! 3 verification failure, 4 search found nothing.

mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::config::Options;

#[derive(Debug, Parser)]
#[command(
    name = "heisenberg",
    version,
    about = "Geodesics and totally geodesic distributions on H_{2p+1}"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample one geodesic to CSV or JSON.
    Trace(Options),
    /// Run the full property suite and write a JSON report.
    Verify(Options),
    /// Search for a geodesic that leaves the distribution (Riemannian metric).
    Search(Options),
    /// Dump metric components, Christoffel symbols and signature at a point.
    Metric(Options),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let run = |opts: Options, cmd: fn(&Options) -> Result<commands::Outcome, error::CliError>| {
        opts.resolve().and_then(|opts| cmd(&opts))
    };
    let result = match cli.command {
        Command::Trace(o) => run(o, commands::trace),
        Command::Verify(o) => run(o, commands::verify),
        Command::Search(o) => run(o, commands::search),
        Command::Metric(o) => run(o, commands::metric),
    };
    match result {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
