//! The voting device.
//!
//! A session commits to an encryption (its ballot hash) in [`Device::begin`].
//! Only afterwards does the caller decide between [`Device::finalize_cast`]
//! and [`Device::finalize_challenge`], so nothing the device does at encryption
//! time can depend on that decision. Misbehaviour is configured by rates in
//! [`DeviceConfig`]; the honest device has all rates at zero.

use std::collections::HashMap;
use std::sync::Arc;

use e2ev_format::doc::{canonical, ChallengeDoc};
use e2ev_format::{EntryKind, CODE_KEY_LEN};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::arith::GroupInt;
use crate::ballot::{encrypt_ballot, BallotRandomness, EncryptedBallot, PlainBallot};
use crate::board::{Appended, BallotSink, BoardError};
use crate::group::{Group, KeyPair};
use crate::manifest::Manifest;
use crate::receipt::Receipt;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeviceConfig {
    /// Probability of encrypting a uniformly random wrong candidate.
    pub cheat_rate: f64,
    /// Probability of not posting a cast ballot.
    pub drop_rate: f64,
    /// Probability of issuing a receipt with an invalid signature.
    pub bad_signature_rate: f64,
    pub seed: u64,
}

impl DeviceConfig {
    pub fn honest(seed: u64) -> Self {
        DeviceConfig {
            cheat_rate: 0.0,
            drop_rate: 0.0,
            bad_signature_rate: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        for (name, v) in [
            ("cheat_rate", self.cheat_rate),
            ("drop_rate", self.drop_rate),
            ("bad_signature_rate", self.bad_signature_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(DeviceError::Rate(name, v));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SessionId(pub u64);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SessionState {
    Idle,
    Committed,
    Cast,
    Challenged,
}

/// What `begin` reveals: the session handle and the ballot hash the device is
/// now bound to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Commitment {
    pub session: SessionId,
    pub ballot_hash: [u8; 32],
}

#[derive(Debug, thiserror::Error)]
pub enum DeviceError {
    #[error("{0} must lie in [0, 1], got {1}")]
    Rate(&'static str, f64),
    #[error("selection {selection} out of range for {candidates} candidates")]
    BadSelection { selection: u32, candidates: usize },
    #[error("another session is still open")]
    Busy,
    #[error("unknown session {0:?}")]
    UnknownSession(SessionId),
    #[error("session {0:?} was already consumed")]
    SessionConsumed(SessionId),
    #[error("board rejected the challenge record: {0}")]
    Board(#[from] BoardError),
}

/// Board failure during a cast. The receipt was still issued.
#[derive(Debug, thiserror::Error)]
#[error("cast ballot not posted: {error}")]
pub struct CastError<T: std::fmt::Debug> {
    pub receipt: Receipt<T>,
    pub error: BoardError,
}

#[derive(Debug, thiserror::Error)]
pub enum CastFailure<T: std::fmt::Debug> {
    #[error(transparent)]
    Session(DeviceError),
    #[error(transparent)]
    Board(Box<CastError<T>>),
}

/// Ground truth for one session, kept by the device for simulation and tests.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionRecord {
    pub session: SessionId,
    pub ballot_hash: [u8; 32],
    pub intended: u32,
    pub encrypted: u32,
    pub state: SessionState,
    /// Set when a cast ballot was withheld from the board.
    pub dropped: bool,
    pub bad_signature: bool,
}

impl SessionRecord {
    pub fn cheated(&self) -> bool {
        self.intended != self.encrypted
    }
}

struct Pending<T> {
    ballot: EncryptedBallot<T>,
    randomness: BallotRandomness<T>,
}

pub struct Device<T> {
    config: DeviceConfig,
    manifest: Arc<Manifest<T>>,
    signing: KeyPair<T>,
    code_key: [u8; CODE_KEY_LEN],
    rng: ChaCha20Rng,
    open: Option<(SessionId, Pending<T>)>,
    log: Vec<SessionRecord>,
    by_id: HashMap<SessionId, usize>,
}

impl<T: GroupInt> Device<T> {
    pub fn new(
        config: DeviceConfig,
        manifest: Arc<Manifest<T>>,
        signing: KeyPair<T>,
        code_key: [u8; CODE_KEY_LEN],
    ) -> Result<Self, DeviceError> {
        config.validate()?;
        Ok(Device {
            rng: ChaCha20Rng::seed_from_u64(config.seed),
            config,
            manifest,
            signing,
            code_key,
            open: None,
            log: Vec::new(),
            by_id: HashMap::new(),
        })
    }

    /// Like [`Device::new`] but drawing all randomness from `rng`.
    pub fn with_rng(
        config: DeviceConfig,
        manifest: Arc<Manifest<T>>,
        signing: KeyPair<T>,
        code_key: [u8; CODE_KEY_LEN],
        rng: ChaCha20Rng,
    ) -> Result<Self, DeviceError> {
        let mut d = Self::new(config, manifest, signing, code_key)?;
        d.rng = rng;
        Ok(d)
    }

    pub fn manifest(&self) -> &Arc<Manifest<T>> {
        &self.manifest
    }

    fn group(&self) -> &Group<T> {
        self.manifest.group()
    }

    /// Sessions so far, in the order they began.
    pub fn log(&self) -> &[SessionRecord] {
        &self.log
    }

    pub fn state(&self, id: SessionId) -> SessionState {
        self.by_id.get(&id).map_or(SessionState::Idle, |&i| self.log[i].state)
    }

    /// Encrypts `selection` (or, when cheating, another candidate) and
    /// commits to the result.
    pub fn begin(&mut self, selection: u32) -> Result<Commitment, DeviceError> {
        let n = self.manifest.n_candidates();
        if selection as usize >= n {
            return Err(DeviceError::BadSelection {
                selection,
                candidates: n,
            });
        }
        if self.open.is_some() {
            return Err(DeviceError::Busy);
        }
        let encrypted = if self.rng.gen_bool(self.config.cheat_rate) {
            let k = self.rng.gen_range(0..n as u32 - 1);
            if k >= selection {
                k + 1
            } else {
                k
            }
        } else {
            selection
        };
        let (ballot, randomness) = encrypt_ballot(&self.manifest, PlainBallot { selection: encrypted }, &mut self.rng)
            .expect("selection checked above");
        let session = SessionId(self.log.len() as u64);
        let ballot_hash = ballot.hash;
        self.by_id.insert(session, self.log.len());
        self.log.push(SessionRecord {
            session,
            ballot_hash,
            intended: selection,
            encrypted,
            state: SessionState::Committed,
            dropped: false,
            bad_signature: false,
        });
        self.open = Some((session, Pending { ballot, randomness }));
        Ok(Commitment { session, ballot_hash })
    }

    fn take(&mut self, id: SessionId, to: SessionState) -> Result<(Pending<T>, usize), DeviceError> {
        let &idx = self.by_id.get(&id).ok_or(DeviceError::UnknownSession(id))?;
        match self.open.take() {
            Some((open_id, pending)) if open_id == id => {
                self.log[idx].state = to;
                Ok((pending, idx))
            }
            other => {
                self.open = other;
                Err(DeviceError::SessionConsumed(id))
            }
        }
    }

    /// Posts the ballot as cast (unless dropping it) and issues a receipt.
    /// The encryption randomness is discarded.
    pub fn finalize_cast<B: BallotSink + ?Sized>(
        &mut self,
        id: SessionId,
        board: &mut B,
    ) -> Result<(Receipt<T>, Option<Appended>), CastFailure<T>> {
        let (pending, idx) = self.take(id, SessionState::Cast).map_err(CastFailure::Session)?;
        let Pending { ballot, randomness } = pending;
        drop(randomness);
        let dropped = self.rng.gen_bool(self.config.drop_rate);
        let bad_signature = self.rng.gen_bool(self.config.bad_signature_rate);
        let group = self.manifest.group().clone();
        let mut receipt = Receipt::issue(&group, &self.signing, &self.code_key, ballot.hash, &mut self.rng);
        if bad_signature {
            receipt.signature.s = group.scalar_add(&receipt.signature.s, &group.scalar_from_u64(1));
        }
        self.log[idx].dropped = dropped;
        self.log[idx].bad_signature = bad_signature;
        if dropped {
            return Ok((receipt, None));
        }
        match board.post(EntryKind::CastBallot, &canonical(&ballot.to_doc(self.group()))) {
            Ok(a) => Ok((receipt, Some(a))),
            Err(error) => Err(CastFailure::Board(Box::new(CastError { receipt, error }))),
        }
    }

    /// Opens the committed ballot on the board's challenged list, claiming
    /// the voter's selection.
    pub fn finalize_challenge<B: BallotSink + ?Sized>(
        &mut self,
        id: SessionId,
        board: &mut B,
    ) -> Result<(ChallengeDoc, Appended), DeviceError> {
        let (pending, idx) = self.take(id, SessionState::Challenged)?;
        let group = self.group();
        let record = ChallengeDoc {
            ballot: pending.ballot.to_doc(group),
            randomness: pending.randomness.to_hex(group),
            claimed: self.log[idx].intended,
        };
        let appended = board.post(EntryKind::ChallengedBallot, &canonical(&record))?;
        Ok((record, appended))
    }
}
