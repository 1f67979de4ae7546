use std::process::ExitCode;

use clap::Parser;
use qnet_cli::{run, Cli};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qnet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
