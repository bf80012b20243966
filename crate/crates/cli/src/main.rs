use std::process::ExitCode;

use clap::Parser;

use stlab::{run, Cli, EXIT_CHECK};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("stlab: one or more checks failed; see summary.json");
            ExitCode::from(EXIT_CHECK as u8)
        }
        Err(e) => {
            eprintln!("stlab: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
