//! `run` and `sweep`, shared by `e2ev simulate` and `e2ev-sim`.
//!
//! `run` reads a [`SimConfig`] and `sweep` a [`SweepConfig`]; both write CSV
//! with the columns
//! `N,q,rho,f,d,trials,analytic_challenge,empirical_challenge,analytic_receipt,empirical_receipt`.

use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use e2ev_core::sim::{run_trials, summarize, sweep, write_csv, SimConfig, SweepConfig, SweepRow};
use e2ev_format::doc::canonical;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// One configuration.
    Run,
    /// The Cartesian grid of a sweep configuration.
    Sweep,
}

/// Runs the simulation in `config` and writes the CSV to `out`. Returns the
/// text for stdout: the detection estimate for `run`, nothing for `sweep`.
pub fn simulate(mode: Mode, config: &Path, out: &Path) -> Result<String> {
    let bytes = std::fs::read(config).with_context(|| format!("reading {}", config.display()))?;
    let parse = || format!("parsing {}", config.display());
    let (rows, stdout) = match mode {
        Mode::Run => {
            let c: SimConfig = serde_json::from_slice(&bytes).with_context(parse)?;
            let outcomes = run_trials(&c)?;
            let estimate = summarize(&c, &outcomes);
            (vec![SweepRow::new(&c, &estimate)], canonical(&estimate) + "\n")
        }
        Mode::Sweep => {
            let grid: SweepConfig = serde_json::from_slice(&bytes).with_context(parse)?;
            (sweep(&grid)?, String::new())
        }
    };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let file = std::fs::File::create(out).with_context(|| format!("creating {}", out.display()))?;
    write_csv(&rows, file)?;
    Ok(stdout)
}
