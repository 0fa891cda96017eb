use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use ndt_cli::{run_to_destination, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let result = RunConfig::from_cli(cli).and_then(|cfg| run_to_destination(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("ndt: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
