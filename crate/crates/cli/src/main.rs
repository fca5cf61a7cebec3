//! `suprec`: thresholds, decoding, sweeps, tail-bound checks and outage runs.

mod bounds;
mod decode;
mod error;
mod list;
mod outage;
mod sweep;
mod threshold;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "suprec", version, about = "Sparse support recovery from noisy Gaussian measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rate threshold c(w) and measurement counts.
    Threshold(threshold::Args),
    /// Decode one instance file and print the result as JSON.
    Decode(decode::Args),
    /// Run a phase-transition sweep and write results.csv plus manifest.json.
    Sweep(sweep::Args),
    /// Compare the Chernoff tail bound against Monte Carlo on a grid.
    ValidateBounds(bounds::Args),
    /// Decoding failure under random signal values against the outage fraction.
    Outage(outage::Args),
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Threshold(a) => threshold::run(a),
        Command::Decode(a) => decode::run(a),
        Command::Sweep(a) => sweep::run(a),
        Command::ValidateBounds(a) => bounds::run(a),
        Command::Outage(a) => outage::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
