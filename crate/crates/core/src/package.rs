//! Scripted elections that produce a complete evidence package: the
//! manifest file, the closed board, every receipt and the secrets.

use std::sync::Arc;

use e2ev_format::doc::{ChallengeDoc, ReceiptDoc};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::arith::GroupInt;
use crate::board::{Board, BoardError};
use crate::device::{Device, DeviceConfig, DeviceError, SessionRecord};
use crate::group::Group;
use crate::manifest::{setup_election, ElectionSecrets, Manifest, SetupError};
use crate::tally::{tally_board, TallyError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    Cast(u32),
    Challenge(u32),
}

impl Step {
    pub fn casts(selections: &[u32]) -> Vec<Step> {
        selections.iter().map(|&s| Step::Cast(s)).collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScriptError {
    #[error(transparent)]
    Setup(#[from] SetupError),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error("cast failed: {0}")]
    Cast(String),
    #[error(transparent)]
    Tally(#[from] TallyError),
    #[error(transparent)]
    Board(#[from] BoardError),
}

pub struct Package<T> {
    pub manifest: Arc<Manifest<T>>,
    /// Contents of `manifest.json`.
    pub manifest_json: String,
    /// Contents of `board.ndjson`.
    pub board: String,
    /// One receipt per cast step, in order.
    pub receipts: Vec<ReceiptDoc>,
    pub challenges: Vec<ChallengeDoc>,
    pub secrets: ElectionSecrets<T>,
    pub device_log: Vec<SessionRecord>,
}

/// Sets up an election, runs `steps` through one device, tallies and closes.
pub fn run_script<T: GroupInt>(
    group: Arc<Group<T>>,
    candidates: &[String],
    trustees: u32,
    steps: &[Step],
    config: DeviceConfig,
    seed: u64,
) -> Result<Package<T>, ScriptError> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let (m, secrets) = setup_election(group, "scripted", candidates, trustees, &mut rng)?;
    let m = Arc::new(m);
    let mut board = Board::in_memory(m.clone());
    let mut device = Device::new(config, m.clone(), secrets.device.clone(), secrets.code_key)?;
    let mut receipts = Vec::new();
    let mut challenges = Vec::new();
    for step in steps {
        match *step {
            Step::Cast(sel) => {
                let c = device.begin(sel)?;
                let (receipt, _) = device
                    .finalize_cast(c.session, &mut board)
                    .map_err(|e| ScriptError::Cast(e.to_string()))?;
                receipts.push(receipt.to_doc(m.group()));
            }
            Step::Challenge(sel) => {
                let c = device.begin(sel)?;
                challenges.push(device.finalize_challenge(c.session, &mut board)?.0);
            }
        }
    }
    tally_board(&mut board, &secrets.trustees)?;
    board.close(&secrets.authority, &secrets.code_key, &mut rng)?;
    Ok(Package {
        manifest_json: m.canonical_json().to_owned(),
        board: board.snapshot().to_ndjson(),
        manifest: m,
        receipts,
        challenges,
        secrets,
        device_log: device.log().to_vec(),
    })
}

/// Three candidates named `A`, `B`, `C`.
pub fn abc() -> Vec<String> {
    ["A", "B", "C"].iter().map(|s| s.to_string()).collect()
}
