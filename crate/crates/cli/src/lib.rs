//! Front end of the `cv-purify` binary.

pub mod args;
pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod oracle_check;
pub mod plot;
pub mod point;

use std::ffi::OsString;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use error::CliError;

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Effective(a) => commands::cmd_effective(a).map(drop),
        Command::Fig3(a) => commands::cmd_fig3(a).map(drop),
        Command::OracleCheck(a) => oracle_check::cmd_oracle_check(a).map(drop),
        Command::Sweep(a) => commands::cmd_sweep(a).map(drop),
    }
}

/// Parses `argv` and runs; clap usage errors exit with 1.
pub fn run<I, T>(argv: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
