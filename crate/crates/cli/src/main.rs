//! `singtrace`: command-line driver for the singular-trace laboratory.

mod commands;
mod config;
mod defaults;
mod output;

use std::process::ExitCode;

use clap::Parser;

use config::Cli;

/// Failures of a run, each with its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid flags or flag combinations.
    Config(String),
    Core(singtrace::Error),
    /// The property suite ran and at least one property failed.
    PropsFailed(usize),
    /// A failure of the driver itself (serialization, stdout).
    Internal(String),
}

impl From<singtrace::Error> for CliError {
    fn from(e: singtrace::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use singtrace::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Domain(_) | E::Grammar(_)) => 2,
            CliError::Core(E::Cost(_)) => 4,
            CliError::Core(_) => 3,
            CliError::PropsFailed(_) => 5,
            CliError::Internal(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) => format!("configuration error: {m}"),
            CliError::Core(e) => e.to_string(),
            CliError::PropsFailed(n) => format!("{n} propert{} failed", if *n == 1 { "y" } else { "ies" }),
            CliError::Internal(m) => m.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("singtrace: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
