//! The optional `--config` file. Every field may also be given as a flag;
//! flags win.
//!
//! ```json
//! {
//!   "election_id": "precinct-7",
//!   "group": "production",
//!   "candidates": ["A", "B", "C"],
//!   "trustees": 3,
//!   "seed": 42,
//!   "device": {"cheat_rate": 0.0, "drop_rate": 0.0, "bad_signature_rate": 0.0},
//!   "bind": "127.0.0.1:8080"
//! }
//! ```

use std::path::Path;

use anyhow::{Context, Result};
use clap::ValueEnum;
use serde::Deserialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GroupChoice {
    /// p = 23.
    Test,
    /// 32-bit safe prime.
    Toy,
    /// 2048-bit MODP group.
    #[default]
    Production,
}

/// Misbehaviour of the simulated voting device; all zero is honest.
#[derive(Clone, Copy, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DeviceRates {
    pub cheat_rate: f64,
    pub drop_rate: f64,
    pub bad_signature_rate: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub election_id: Option<String>,
    pub group: Option<GroupChoice>,
    pub candidates: Option<Vec<String>>,
    pub trustees: Option<u32>,
    /// Makes every command deterministic.
    pub seed: Option<u64>,
    pub device: DeviceRates,
    pub bind: Option<String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_slice(&bytes).with_context(|| format!("parsing {}", path.display()))
    }
}
