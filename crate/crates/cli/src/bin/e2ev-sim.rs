use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use e2ev_cli::simulate::{simulate, Mode};

/// Detection-rate simulator.
#[derive(Parser)]
#[command(name = "e2ev-sim", version)]
struct Args {
    #[arg(value_enum)]
    mode: Mode,
    /// `run`: one simulation config; `sweep`: a grid.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match simulate(args.mode, &args.config, &args.out) {
        Ok(stdout) => {
            let _ = std::io::stdout().write_all(stdout.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
