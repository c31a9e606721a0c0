//! Command-line front end for the needles toolkit.
//!
//! Seven subcommands cover the pair-response tabulation, particle-level
//! simulation, the mean-field orientation dynamics (transient, stationary,
//! and linear stability), the full position–orientation solver, and the
//! crowding-diffusion limit. Every run reads an optional TOML configuration
//! file (flags override file values), writes deterministic CSV files, and
//! records the fully resolved configuration in a JSON manifest.
//!
//! Exit codes: 0 on success, 1 for validation problems (bad flags, bad
//! config, out-of-range parameters, I/O), 2 for numerical failures
//! (non-convergence, instability, sampling saturation).

mod config;
mod emit;
mod tasks;

use clap::error::ErrorKind;
use clap::Parser;
use std::process::ExitCode;

/// Failure channel deciding the process exit code.
pub enum Failure {
    /// Bad input: flags, config file, parameter ranges, I/O. Exit code 1.
    Validation(String),
    /// The computation itself failed: divergence, saturation. Exit code 2.
    Numerical(String),
}

impl From<needles::Error> for Failure {
    fn from(e: needles::Error) -> Self {
        match e {
            needles::Error::InvalidParameter { .. } => Failure::Validation(e.to_string()),
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Validation(format!("i/o: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = match config::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match tasks::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}
