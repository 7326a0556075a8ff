use std::process::ExitCode;

use blocc_cli::{execute, Cli, CliError};
use clap::error::ErrorKind;
use clap::Parser;

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            let reason = CliError::Config(first);
            eprintln!("{}", reason.reason());
            return ExitCode::from(reason.exit_code() as u8);
        }
    };
    match execute(&cli) {
        Ok(report) => {
            print!("{report}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.reason());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
