//! Command-line lab for the Legendre family: family files, reports and checkpointed scans.

pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod fixture;
pub mod report;

pub use config::{Cli, Command};
pub use error::LabError;

/// Runs a parsed command line. Exit codes: 0 success, 1 error, 2 findings to review.
pub fn run_cli(cli: &Cli) -> i32 {
    match commands::run(&cli.command) {
        Ok(s) => s.exit_code(),
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            commands::write_error(&cli.command, &e);
            1
        }
    }
}
