use std::process::ExitCode;

use clap::Parser;
use coded_inference_cli::{run, Cli};

fn main() -> ExitCode {
    ExitCode::from(run(&Cli::parse()))
}
