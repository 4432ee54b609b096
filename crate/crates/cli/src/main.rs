use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = aps_cli::args::Cli::parse();
    match aps_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => ExitCode::from(aps_cli::report(&e)),
    }
}
