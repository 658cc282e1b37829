//! `qdrift` command-line front end.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;
use crate::commands::CliError;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use qdrift_core::Error as E;
        match self {
            CliError::Io { .. } => 1,
            CliError::Core(E::Parse { .. } | E::EmptyHamiltonian) => 2,
            CliError::Core(_) | CliError::Argument(_) => 3,
            CliError::Violation(_) => 4,
        }
    }
}
