use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

/// Verify an election from its published manifest and board.
///
/// Exit status: 0 PASS, 1 FAIL, 2 when an input does not decode or cannot
/// be read.
#[derive(Parser)]
#[command(name = "e2ev-verify", version)]
struct Args {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    board: PathBuf,
    /// Also report whether this receipt's ballot was cast.
    #[arg(long)]
    receipt: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Print elapsed wall-clock time to standard error.
    #[arg(long)]
    timing: bool,
}

fn read(path: &PathBuf) -> Result<Vec<u8>, ExitCode> {
    std::fs::read(path).map_err(|e| {
        eprintln!("e2ev-verify: {}: {e}", path.display());
        ExitCode::from(2)
    })
}

fn run(args: Args) -> Result<ExitCode, ExitCode> {
    let start = Instant::now();
    let manifest = read(&args.manifest)?;
    let board = read(&args.board)?;
    let receipt = args.receipt.as_ref().map(read).transpose()?;
    let report = e2ev_verify::verify_election(&manifest, &board, receipt.as_deref());
    let bytes = e2ev_verify::report_bytes(&report);
    match &args.report {
        Some(path) => {
            std::fs::write(path, &bytes).map_err(|e| {
                eprintln!("e2ev-verify: {}: {e}", path.display());
                ExitCode::from(2)
            })?;
            let first = report
                .first_failure
                .as_ref()
                .map(|f| format!(" first failure: {} seq {} {}", f.check, f.seq, f.field))
                .unwrap_or_default();
            println!("{}{first}", report.verdict);
        }
        None => print!("{}", String::from_utf8(bytes).expect("JSON is UTF-8")),
    }
    if args.timing {
        eprintln!("verified in {:.3} s", start.elapsed().as_secs_f64());
    }
    Ok(ExitCode::from(report.exit_code() as u8))
}

fn main() -> ExitCode {
    run(Args::parse()).unwrap_or_else(|code| code)
}
