use std::process::ExitCode;

use clap::Parser;
use springrods_cli::{dispatch, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = cli
        .overrides
        .resolve()
        .and_then(|config| dispatch(cli.command, &config, &mut std::io::stdout().lock()));
    match result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            match outcome.failure {
                Some(msg) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(1)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
