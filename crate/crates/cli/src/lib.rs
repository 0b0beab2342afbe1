//! Batch front end for the shadow decomposition pipeline:
//! synth, register, decompose, metrics, cdf, detect, track, evaluate.
//!
//! Each subcommand prints one JSON summary line on stdout; logs go to
//! stderr. Exit status: 0 success, 1 usage error, 2 input or format error,
//! 3 non-convergence under `--strict`.

mod args;
mod commands;

use std::ffi::OsString;
use std::fmt;

use clap::Parser;

pub use args::Cli;
pub use commands::{decompose_windows, WindowOutcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(shadowdecomp::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Input(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<shadowdecomp::Error> for CliError {
    fn from(e: shadowdecomp::Error) -> Self {
        CliError::Input(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
        }
    }
}

fn init_logging() {
    let env = env_logger::Env::default().default_filter_or("info");
    // a second initialisation (several runs in one process) is harmless
    let _ = env_logger::Builder::from_env(env)
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .try_init();
}

/// Parses `argv` (including the program name) and runs one subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match commands::dispatch(cli.command) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            outcome.code
        }
        Err(e) => {
            log::error!("{e}");
            e.exit_code()
        }
    }
}
