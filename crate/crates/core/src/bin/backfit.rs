use std::process::ExitCode;

use additive_backfit::cli::{error_code, run, Cli};
use clap::Parser;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(&cli, &mut std::io::stdout().lock()) {
        Ok(status) => status.code(),
        Err(err) => {
            eprintln!("error: {err}");
            error_code(&err)
        }
    };
    ExitCode::from(code as u8)
}
