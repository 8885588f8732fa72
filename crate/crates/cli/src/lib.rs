//! The `e2ev` command line: runs a desk-scale election in a workspace
//! directory (see [`workspace`]) and wraps the toolkit's operations.
//!
//! Exit status is 0 on success, 1 when a check finds a problem (a failed
//! verification or an unclean dummy audit) and 2 on any error.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

mod commands;
pub mod config;
pub mod simulate;
pub mod workspace;

pub use commands::{execute, Output};

#[derive(Debug, Parser)]
#[command(name = "e2ev", version, about = "End-to-end verifiable election workspace tool")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Election workspace directory.
    #[arg(long, global = true, default_value = ".")]
    pub workspace: PathBuf,
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for all randomness; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create the election: manifest, board and secret keys.
    Setup {
        /// Comma-separated candidate names.
        #[arg(long, value_delimiter = ',')]
        candidates: Option<Vec<String>>,
        #[arg(long)]
        trustees: Option<u32>,
        #[arg(long, value_enum)]
        group: Option<config::GroupChoice>,
        #[arg(long)]
        election_id: Option<String>,
    },
    /// Cast a ballot for a candidate (name or index); prints the receipt.
    Vote { selection: String },
    /// Encrypt a selection and open it on the challenged list.
    Challenge { selection: String },
    /// Challenge a scripted dummy vote and record it in the sidecar.
    Dummy { selection: String },
    /// Tally the cast ballots and close the board.
    Tally,
    /// Verify the published election; prints the report.
    Verify {
        #[arg(long)]
        receipt: Option<PathBuf>,
    },
    /// Adjudicate a dispute claim against the board.
    Adjudicate {
        #[arg(long)]
        claim: PathBuf,
    },
    /// Check every dummy vote in the sidecar against the board.
    Audit,
    /// Run the detection simulator.
    Simulate {
        #[arg(value_enum)]
        mode: simulate::Mode,
        /// Simulation configuration.
        #[arg(long)]
        sim: PathBuf,
        /// CSV output; defaults to reports/results.csv in the workspace.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the board over HTTP.
    Serve {
        #[arg(long)]
        bind: Option<String>,
    },
}
