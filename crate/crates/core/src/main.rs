use std::process::ExitCode;

use clap::Parser;
use ltv_core::cli::{configure_threads, error_code, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match run(&cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(error_code(&e))
        }
    }
}
