//! Command implementations behind the `coded-inference` binary.
//!
//! Every command returns an [`Outcome`]: machine output (CSV or a plain-text
//! report) plus summary lines meant for stderr. Writing them out and mapping
//! errors to exit codes is left to [`run`].

pub mod args;
pub mod commands;

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use coded_inference::Error;

pub use args::{Cli, Command, Scheme};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_VERIFY: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(problems) => CliError::Config(problems),
            Error::InvalidHybrid(v) => {
                CliError::Config(v.iter().map(ToString::to_string).collect())
            }
            e @ (Error::Domain(_)
            | Error::Infeasible(_)
            | Error::NoCandidates
            | Error::FieldTooSmall { .. }) => CliError::Config(vec![e.to_string()]),
            other => CliError::Internal(other.to_string()),
        }
    }
}

/// Result of one command.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    /// Written to `--out` or stdout.
    pub output: String,
    /// Human-readable lines for stderr.
    pub summary: Vec<String>,
    /// Set by `verify` when any check failed.
    pub failed: bool,
}

pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Analyze(a) => commands::analyze(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::OptimizeHybrid(a) => commands::optimize_hybrid(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Verify(a) => commands::verify(a),
    }
}

fn out_path(command: &Command) -> Option<&Path> {
    match command {
        Command::Analyze(a) => a.out.as_deref(),
        Command::Simulate(a) => a.out.as_deref(),
        Command::OptimizeHybrid(a) => a.out.as_deref(),
        Command::Sweep(a) => a.out.as_deref(),
        Command::Verify(a) => a.out.as_deref(),
    }
}

/// Runs `cli`, writes its output and returns the process exit code.
pub fn run(cli: &Cli) -> u8 {
    let outcome = match execute(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let written = match out_path(&cli.command) {
        Some(path) => fs::write(path, &outcome.output)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => io::stdout()
            .lock()
            .write_all(outcome.output.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    };
    for line in &outcome.summary {
        eprintln!("{line}");
    }
    if let Err(e) = written {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    if outcome.failed {
        EXIT_VERIFY
    } else {
        EXIT_OK
    }
}
