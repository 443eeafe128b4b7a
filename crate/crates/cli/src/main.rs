//! `rrt` command-line driver. Exit status: 0 on pass, 2 on a failed check
//! or run, 1 on a usage error.

mod args;
mod exp;
mod generate;
mod oracle;
mod output;

use std::process::ExitCode;

use clap::Parser;
use rrt_core::Error;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Failure(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        fn usage(e: &Error) -> bool {
            match e {
                Error::InvalidArgument(_) | Error::ResourceLimit(_) => true,
                Error::Replicate { source, .. } => usage(source),
                _ => false,
            }
        }
        if usage(&e) {
            CliError::Usage(e.to_string())
        } else {
            CliError::Failure(e.to_string())
        }
    }
}

/// Whether every check in a command passed.
pub type Outcome = Result<bool, CliError>;

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::GenRrt(a) => generate::gen_rrt(&a),
        Command::GenCoalescent(a) => generate::gen_coalescent(&a),
        Command::Oracle(a) => oracle::run(&a),
        Command::Exp(a) => exp::run(&a),
        Command::Selfcheck(a) => generate::selfcheck(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(CliError::Failure(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
