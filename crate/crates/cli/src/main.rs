use std::process::ExitCode;

use clap::Parser;
use xdp_cli::{run, Cli};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("xdp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
