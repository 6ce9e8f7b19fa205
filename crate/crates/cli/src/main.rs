//! `kfwer`: knockoff k-FWER selection, simulation sweeps and knockoff
//! construction from the command line.

mod args;
mod construct;
mod output;
mod select;
mod simulate;

use std::process::ExitCode;

use clap::Parser;
use kfwer_core::ErrorKind;

use args::{Cli, Command};

const EXIT_INPUT: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_CONFIG: u8 = 4;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Construct(a) => construct::run(a),
        Command::Select(a) => select::run_select(a),
        Command::Analyze(a) => select::run_analyze(a),
        Command::Simulate(a) => simulate::run(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<kfwer_core::Error>() {
        Some(core) => match core.kind() {
            ErrorKind::Input => EXIT_INPUT,
            ErrorKind::Numerical => EXIT_NUMERICAL,
            ErrorKind::Config => EXIT_CONFIG,
        },
        None if e.downcast_ref::<std::io::Error>().is_some() => EXIT_INPUT,
        None => EXIT_CONFIG,
    }
}
