//! `adp`: exact DP, ADP schemes and bound verification from the command line.
//!
//! Exit status is 0 on success, 1 when a check is violated and 2 on usage or
//! input errors.

mod args;
mod commands;
mod functions;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;

/// What a successful command found.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    Violation,
}

impl Outcome {
    pub fn from_holds(holds: bool) -> Self {
        if holds {
            Outcome::Clean
        } else {
            Outcome::Violation
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Violation) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
