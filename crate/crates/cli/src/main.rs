use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;

use cfrht_cli::commands::{self, Cli};
use cfrht_cli::{EXIT_INPUT, EXIT_NUMERIC, EXIT_OK};
use clap::error::ErrorKind;
use clap::Parser;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::from(EXIT_OK as u8),
                _ => ExitCode::from(EXIT_INPUT as u8),
            };
        }
    };
    let code = match panic::catch_unwind(AssertUnwindSafe(|| commands::run(cli))) {
        Ok(Ok(code)) => code,
        Ok(Err(failure)) => {
            eprintln!("error: {failure}");
            failure.code
        }
        Err(_) => {
            eprintln!("error: internal failure");
            EXIT_NUMERIC
        }
    };
    ExitCode::from(code as u8)
}
