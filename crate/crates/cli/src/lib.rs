//! Command implementations behind the `riskroute` binary.

pub mod args;
pub mod commands;
pub mod sweep;
pub mod verify;

use std::path::Path;

use thiserror::Error;

use args::{Cli, Command};

/// Exit codes: 0 ok, 2 input, 3 convergence, 4 bound or property failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    NotConverged(String),
    #[error("{0}")]
    BoundFailure(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::NotConverged(_) => 3,
            CliError::BoundFailure(_) => 4,
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve(a) => commands::solve(&a),
        Command::Analyze(a) => commands::analyze(&a),
        Command::Sweep(a) => sweep::run(&a),
        Command::Verify(a) => verify::run(&a),
        Command::Generate(a) => commands::generate(&a),
        Command::Oracle(a) => commands::oracle(&a),
    }
}

/// Worker pool capped by `RISKROUTE_THREADS` (all cores when unset or 0).
pub fn pool() -> Result<rayon::ThreadPool, CliError> {
    let threads = match std::env::var("RISKROUTE_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Input(format!("RISKROUTE_THREADS must be a non-negative integer, got `{v}`")))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Input(format!("cannot start worker pool: {e}")))
}

pub(crate) fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(bytes)
                .map_err(|e| CliError::Input(format!("cannot write to stdout: {e}")))
        }
    }
}
