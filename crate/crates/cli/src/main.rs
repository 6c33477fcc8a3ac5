use std::io::{self, BufWriter};
use std::process::ExitCode;

use clap::Parser;
use hycast_cli::commands::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    match run(&cli, BufWriter::new(stdout.lock())) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hycast: {e}");
            e.exit_code()
        }
    }
}
