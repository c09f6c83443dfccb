use std::process::ExitCode;

use clap::Parser;
use riskroute_cli::args::Cli;

fn main() -> ExitCode {
    match riskroute_cli::run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
