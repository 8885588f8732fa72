//! The append-only, hash-chained bulletin board.
//!
//! A board is a sequence of [`Entry`] values, each stored as one line of
//! `board.ndjson`. Appends are validated against the manifest in entry 0 and
//! are written and synced before they are acknowledged.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::Path;
use std::sync::Arc;

use e2ev_format::doc::{
    canonical, write_entry_line, BallotDoc, ChallengeDoc, CloseDoc, EntryLine, ManifestDoc, TallyDoc,
};
use e2ev_format::hexfmt::{decode_digest, encode};
use e2ev_format::layout::{close_message, entry_hash};
use e2ev_format::{EntryKind, CODE_KEY_LEN, GENESIS_PREV_HASH};
use rand::RngCore;

use crate::arith::GroupInt;
use crate::ballot::{verify_ballot, Rejection};
use crate::group::KeyPair;
use crate::manifest::{Manifest, ManifestError};
use crate::proofs::{self, Signature};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub seq: u64,
    pub prev_hash: [u8; 32],
    pub kind: EntryKind,
    /// Canonical payload JSON, exactly the bytes the entry hash covers.
    pub payload: String,
    pub entry_hash: [u8; 32],
}

impl Entry {
    fn new(seq: u64, prev_hash: [u8; 32], kind: EntryKind, payload: String) -> Self {
        let entry_hash = entry_hash(&prev_hash, seq, kind, payload.as_bytes());
        Entry {
            seq,
            prev_hash,
            kind,
            payload,
            entry_hash,
        }
    }

    /// The board line, without the trailing newline.
    pub fn line(&self) -> String {
        write_entry_line(
            self.seq,
            &encode(&self.prev_hash),
            self.kind.name(),
            &self.payload,
            &encode(&self.entry_hash),
        )
    }
}

/// Where a snapshot first stops being a well-formed chain.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("chain broken at seq {seq}: {reason}")]
pub struct ChainBreak {
    pub seq: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainSummary {
    pub entries: u64,
    /// False when the board has no Close entry, for example after truncation.
    pub closed: bool,
}

/// Recomputes every entry hash and link of a serialized board.
pub fn verify_chain(bytes: &[u8]) -> Result<ChainSummary, ChainBreak> {
    Snapshot::from_bytes(bytes).map(|s| s.summary())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Lookup {
    Found { seq: u64, kind: EntryKind },
    Absent,
}

/// A chain-verified board with its ballot index.
#[derive(Clone, Debug, Default)]
pub struct Snapshot {
    entries: Vec<Entry>,
    ballots: HashMap<[u8; 32], (u64, EntryKind)>,
    tally: Option<u64>,
    close: Option<u64>,
    code_key: Option<[u8; CODE_KEY_LEN]>,
}

impl Snapshot {
    /// Parses and chain-checks a board file. Payload contents are not
    /// validated beyond what the index needs.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ChainBreak> {
        let mut snap = Snapshot::default();
        let mut body = bytes;
        if let Some(stripped) = body.strip_suffix(b"\n") {
            body = stripped;
        }
        if body.is_empty() {
            return Ok(snap);
        }
        for (i, raw) in body.split(|&b| b == b'\n').enumerate() {
            let seq = i as u64;
            let brk = |reason: &str| ChainBreak {
                seq,
                reason: reason.to_owned(),
            };
            let line = EntryLine::parse(raw).map_err(|_| brk("undecodable line"))?;
            if line.seq != seq {
                return Err(brk("seq out of order"));
            }
            let prev = snap.entries.last().map_or(GENESIS_PREV_HASH, |e| e.entry_hash);
            if line.prev_hash != encode(&prev) {
                return Err(brk("prev_hash does not link"));
            }
            let kind: EntryKind = line.kind.parse().map_err(|_| brk("unknown kind"))?;
            if (seq == 0) != (kind == EntryKind::Manifest) {
                return Err(brk("Manifest must be exactly entry 0"));
            }
            if snap.close.is_some() {
                return Err(brk("entry after Close"));
            }
            let entry = Entry::new(seq, prev, kind, line.payload.get().to_owned());
            if line.entry_hash != encode(&entry.entry_hash) {
                return Err(brk("entry_hash does not recompute"));
            }
            snap.index(&entry);
            snap.entries.push(entry);
        }
        Ok(snap)
    }

    fn index(&mut self, e: &Entry) {
        let hash = match e.kind {
            EntryKind::CastBallot => serde_json::from_str::<BallotDoc>(&e.payload)
                .ok()
                .map(|d| d.ballot_hash),
            EntryKind::ChallengedBallot => serde_json::from_str::<ChallengeDoc>(&e.payload)
                .ok()
                .map(|d| d.ballot.ballot_hash),
            EntryKind::TallyArtifact => {
                self.tally.get_or_insert(e.seq);
                None
            }
            EntryKind::Close => {
                self.close = Some(e.seq);
                self.code_key = serde_json::from_str::<CloseDoc>(&e.payload)
                    .ok()
                    .and_then(|d| decode_digest(&d.code_key).ok());
                None
            }
            EntryKind::Manifest => None,
        };
        if let Some(h) = hash.and_then(|h| decode_digest(&h).ok()) {
            self.ballots.entry(h).or_insert((e.seq, e.kind));
        }
    }

    pub fn summary(&self) -> ChainSummary {
        ChainSummary {
            entries: self.entries.len() as u64,
            closed: self.close.is_some(),
        }
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn head(&self) -> [u8; 32] {
        self.entries.last().map_or(GENESIS_PREV_HASH, |e| e.entry_hash)
    }

    pub fn lookup(&self, ballot_hash: &[u8; 32]) -> Lookup {
        match self.ballots.get(ballot_hash) {
            Some(&(seq, kind)) => Lookup::Found { seq, kind },
            None => Lookup::Absent,
        }
    }

    /// Indexed ballot hashes of one kind, in board order.
    pub fn ballot_hashes(&self, kind: EntryKind) -> Vec<[u8; 32]> {
        let mut v: Vec<(u64, [u8; 32])> = self
            .ballots
            .iter()
            .filter(|(_, &(_, k))| k == kind)
            .map(|(h, &(seq, _))| (seq, *h))
            .collect();
        v.sort_unstable();
        v.into_iter().map(|(_, h)| h).collect()
    }

    pub fn of_kind(&self, kind: EntryKind) -> impl Iterator<Item = &Entry> {
        self.entries.iter().filter(move |e| e.kind == kind)
    }

    pub fn tally_seq(&self) -> Option<u64> {
        self.tally
    }

    pub fn is_closed(&self) -> bool {
        self.close.is_some()
    }

    /// Published return-code key, available once the board is closed.
    pub fn code_key(&self) -> Option<&[u8; CODE_KEY_LEN]> {
        self.code_key.as_ref()
    }

    /// The whole board as `board.ndjson` bytes.
    pub fn to_ndjson(&self) -> String {
        self.entries_ndjson(0)
    }

    /// Lines from `from` onwards, each newline-terminated.
    pub fn entries_ndjson(&self, from: usize) -> String {
        let mut out = String::new();
        for e in self.entries.iter().skip(from) {
            out.push_str(&e.line());
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BoardError {
    #[error("board is closed")]
    Closed,
    #[error("ballot hash {0} is already on the board")]
    Duplicate(String),
    #[error("malformed {kind} payload: {reason}")]
    Malformed { kind: EntryKind, reason: String },
    #[error("invalid ballot: {0}")]
    InvalidBallot(Rejection),
    #[error("the Manifest must be entry 0 and only entry 0")]
    ManifestPosition,
    #[error("only Close may follow the TallyArtifact")]
    AfterTally,
    #[error("bad Close entry: {0}")]
    BadClose(String),
    #[error("board file is corrupt: {0}")]
    Corrupt(ChainBreak),
    #[error("manifest in entry 0: {0}")]
    Manifest(ManifestError),
    #[error("board storage: {0}")]
    Io(#[from] io::Error),
}

/// Parses `payload` as the document type of `kind` and returns its canonical
/// serialization.
pub fn canonicalize(kind: EntryKind, payload: &str) -> Result<String, BoardError> {
    fn canon<D: serde::de::DeserializeOwned + serde::Serialize>(
        kind: EntryKind,
        s: &str,
    ) -> Result<String, BoardError> {
        serde_json::from_str::<D>(s)
            .map(|d| canonical(&d))
            .map_err(|e| BoardError::Malformed {
                kind,
                reason: e.to_string(),
            })
    }
    match kind {
        EntryKind::Manifest => canon::<ManifestDoc>(kind, payload),
        EntryKind::CastBallot => canon::<BallotDoc>(kind, payload),
        EntryKind::ChallengedBallot => canon::<ChallengeDoc>(kind, payload),
        EntryKind::TallyArtifact => canon::<TallyDoc>(kind, payload),
        EntryKind::Close => canon::<CloseDoc>(kind, payload),
    }
}

enum Store {
    Memory,
    File(File),
}

/// Something ballots can be posted to.
pub trait BallotSink {
    fn post(&mut self, kind: EntryKind, payload: &str) -> Result<Appended, BoardError>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Appended {
    pub seq: u64,
    pub entry_hash: [u8; 32],
}

pub struct Board<T> {
    manifest: Arc<Manifest<T>>,
    snap: Snapshot,
    store: Store,
}

impl<T: GroupInt> Board<T> {
    pub fn in_memory(manifest: Arc<Manifest<T>>) -> Self {
        let mut b = Board {
            manifest,
            snap: Snapshot::default(),
            store: Store::Memory,
        };
        b.push_manifest().expect("memory store cannot fail");
        b
    }

    /// Creates a new board file, refusing to overwrite an existing one.
    pub fn create(path: &Path, manifest: Arc<Manifest<T>>) -> Result<Self, BoardError> {
        let file = OpenOptions::new().append(true).create_new(true).open(path)?;
        let mut b = Board {
            manifest,
            snap: Snapshot::default(),
            store: Store::File(file),
        };
        b.push_manifest()?;
        Ok(b)
    }

    /// Reopens a board file for further appends. The chain is re-verified and
    /// the index rebuilt; proofs are not re-checked.
    pub fn open(path: &Path) -> Result<Self, BoardError> {
        let mut bytes = Vec::new();
        File::open(path)?.read_to_end(&mut bytes)?;
        let (manifest, snap) = Self::load(&bytes)?;
        let file = OpenOptions::new().append(true).open(path)?;
        Ok(Board {
            manifest,
            snap,
            store: Store::File(file),
        })
    }

    /// A memory-backed board holding a copy of `bytes`.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, BoardError> {
        let (manifest, snap) = Self::load(bytes)?;
        Ok(Board {
            manifest,
            snap,
            store: Store::Memory,
        })
    }

    fn load(bytes: &[u8]) -> Result<(Arc<Manifest<T>>, Snapshot), BoardError> {
        let snap = Snapshot::from_bytes(bytes).map_err(BoardError::Corrupt)?;
        let first = snap.entries.first().ok_or(BoardError::ManifestPosition)?;
        let manifest = Manifest::from_json(first.payload.as_bytes()).map_err(BoardError::Manifest)?;
        Ok((Arc::new(manifest), snap))
    }

    fn push_manifest(&mut self) -> Result<Appended, BoardError> {
        let payload = self.manifest.canonical_json().to_owned();
        self.persist(EntryKind::Manifest, payload)
    }

    pub fn manifest(&self) -> &Arc<Manifest<T>> {
        &self.manifest
    }

    pub fn snapshot(&self) -> &Snapshot {
        &self.snap
    }

    pub fn lookup(&self, ballot_hash: &[u8; 32]) -> Lookup {
        self.snap.lookup(ballot_hash)
    }

    /// Validates and appends one entry.
    pub fn append(&mut self, kind: EntryKind, payload: &str) -> Result<Appended, BoardError> {
        if self.snap.is_closed() {
            return Err(BoardError::Closed);
        }
        if kind == EntryKind::Manifest {
            return Err(BoardError::ManifestPosition);
        }
        let payload = canonicalize(kind, payload)?;
        match kind {
            EntryKind::CastBallot => {
                let doc: BallotDoc = serde_json::from_str(&payload).expect("canonicalized");
                self.check_ballot(&doc)?;
            }
            EntryKind::ChallengedBallot => {
                let doc: ChallengeDoc = serde_json::from_str(&payload).expect("canonicalized");
                self.check_ballot(&doc.ballot)?;
            }
            EntryKind::TallyArtifact => {
                if self.snap.tally.is_some() {
                    return Err(BoardError::AfterTally);
                }
                let doc: TallyDoc = serde_json::from_str(&payload).expect("canonicalized");
                if doc.candidates.len() != self.manifest.n_candidates() {
                    return Err(BoardError::Malformed {
                        kind,
                        reason: format!(
                            "{} candidate tallies for {} candidates",
                            doc.candidates.len(),
                            self.manifest.n_candidates()
                        ),
                    });
                }
            }
            EntryKind::Close => {
                let doc: CloseDoc = serde_json::from_str(&payload).expect("canonicalized");
                self.check_close(&doc)?;
            }
            EntryKind::Manifest => unreachable!(),
        }
        self.persist(kind, payload)
    }

    fn check_ballot(&self, doc: &BallotDoc) -> Result<(), BoardError> {
        if self.snap.tally.is_some() {
            return Err(BoardError::AfterTally);
        }
        let ballot = verify_ballot(&self.manifest, doc).map_err(BoardError::InvalidBallot)?;
        if self.snap.ballots.contains_key(&ballot.hash) {
            return Err(BoardError::Duplicate(doc.ballot_hash.clone()));
        }
        Ok(())
    }

    fn check_close(&self, doc: &CloseDoc) -> Result<(), BoardError> {
        let count = self.snap.len() as u64 + 1;
        if doc.entry_count != count {
            return Err(BoardError::BadClose(format!(
                "entry_count {} but Close would be entry {count}",
                doc.entry_count
            )));
        }
        let code_key = decode_digest(&doc.code_key).map_err(|_| BoardError::BadClose("code_key encoding".into()))?;
        let group = self.manifest.group();
        let sig = Signature::from_doc(group, &doc.signature)
            .map_err(|_| BoardError::BadClose("signature encoding".into()))?;
        let msg = close_message(doc.entry_count, &self.snap.head(), &code_key);
        if !proofs::verify_signature(group, self.manifest.authority_pk(), &msg, &sig) {
            return Err(BoardError::BadClose("signature does not verify".into()));
        }
        Ok(())
    }

    /// Signs and appends the Close entry, publishing the return-code key.
    pub fn close<R: RngCore + ?Sized>(
        &mut self,
        authority: &KeyPair<T>,
        code_key: &[u8; CODE_KEY_LEN],
        rng: &mut R,
    ) -> Result<Appended, BoardError> {
        let entry_count = self.snap.len() as u64 + 1;
        let msg = close_message(entry_count, &self.snap.head(), code_key);
        let signature = proofs::sign(self.manifest.group(), authority, &msg, rng);
        let doc = CloseDoc {
            entry_count,
            code_key: encode(code_key),
            signature: signature.to_doc(self.manifest.group()),
        };
        self.append(EntryKind::Close, &canonical(&doc))
    }

    fn persist(&mut self, kind: EntryKind, payload: String) -> Result<Appended, BoardError> {
        let entry = Entry::new(self.snap.len() as u64, self.snap.head(), kind, payload);
        if let Store::File(f) = &mut self.store {
            let mut line = entry.line();
            line.push('\n');
            f.write_all(line.as_bytes())?;
            f.sync_data()?;
        }
        let appended = Appended {
            seq: entry.seq,
            entry_hash: entry.entry_hash,
        };
        self.snap.index(&entry);
        self.snap.entries.push(entry);
        Ok(appended)
    }
}

impl<T: GroupInt> BallotSink for Board<T> {
    fn post(&mut self, kind: EntryKind, payload: &str) -> Result<Appended, BoardError> {
        self.append(kind, payload)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ballot::{encrypt_ballot, PlainBallot};
    use crate::group::Group;
    use crate::manifest::{setup_election, ElectionSecrets};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn setup() -> (Board<u64>, ElectionSecrets<u64>, ChaCha20Rng) {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let names: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let (m, secrets) = setup_election(Arc::new(Group::<u64>::toy()), "b", &names, 1, &mut rng).unwrap();
        (Board::in_memory(Arc::new(m)), secrets, rng)
    }

    fn ballot(board: &Board<u64>, sel: u32, rng: &mut ChaCha20Rng) -> (String, [u8; 32]) {
        let (b, _) = encrypt_ballot(board.manifest(), PlainBallot { selection: sel }, rng).unwrap();
        (canonical(&b.to_doc(board.manifest().group())), b.hash)
    }

    #[test]
    fn genesis_and_lookup() {
        let (mut board, _, mut rng) = setup();
        let e0 = &board.snapshot().entries()[0];
        assert_eq!((e0.seq, e0.prev_hash, e0.kind), (0, [0u8; 32], EntryKind::Manifest));
        let (payload, hash) = ballot(&board, 0, &mut rng);
        let a = board.append(EntryKind::CastBallot, &payload).unwrap();
        assert_eq!(a.seq, 1);
        assert_eq!(
            board.lookup(&hash),
            Lookup::Found {
                seq: 1,
                kind: EntryKind::CastBallot
            }
        );
        assert_eq!(board.lookup(&[0x5a; 32]), Lookup::Absent);
        assert!(matches!(
            board.append(EntryKind::CastBallot, &payload),
            Err(BoardError::Duplicate(_))
        ));
        assert!(matches!(
            board.append(
                EntryKind::Manifest,
                board.manifest().canonical_json().to_owned().as_str()
            ),
            Err(BoardError::ManifestPosition)
        ));
        assert!(matches!(
            board.append(EntryKind::CastBallot, "{}"),
            Err(BoardError::Malformed { .. })
        ));
    }

    #[test]
    fn challenged_hashes_cannot_be_cast() {
        let (mut board, _, mut rng) = setup();
        let (b, rnd) = encrypt_ballot(board.manifest(), PlainBallot { selection: 2 }, &mut rng).unwrap();
        let g = board.manifest().group().clone();
        let rec = ChallengeDoc {
            ballot: b.to_doc(&g),
            randomness: rnd.to_hex(&g),
            claimed: 2,
        };
        board.append(EntryKind::ChallengedBallot, &canonical(&rec)).unwrap();
        assert_eq!(
            board.lookup(&b.hash),
            Lookup::Found {
                seq: 1,
                kind: EntryKind::ChallengedBallot
            }
        );
        assert!(matches!(
            board.append(EntryKind::CastBallot, &canonical(&b.to_doc(&g))),
            Err(BoardError::Duplicate(_))
        ));
    }

    #[test]
    fn close_seals_the_board() {
        let (mut board, secrets, mut rng) = setup();
        let (payload, _) = ballot(&board, 1, &mut rng);
        board.append(EntryKind::CastBallot, &payload).unwrap();
        let other = KeyPair::generate(board.manifest().group(), &mut rng);
        assert!(matches!(
            board.close(&other, &secrets.code_key, &mut rng),
            Err(BoardError::BadClose(_))
        ));
        board.close(&secrets.authority, &secrets.code_key, &mut rng).unwrap();
        assert_eq!(board.snapshot().code_key(), Some(&secrets.code_key));
        let (payload, _) = ballot(&board, 1, &mut rng);
        assert!(matches!(
            board.append(EntryKind::CastBallot, &payload),
            Err(BoardError::Closed)
        ));
        let summary = verify_chain(board.snapshot().to_ndjson().as_bytes()).unwrap();
        assert_eq!(
            summary,
            ChainSummary {
                entries: 3,
                closed: true
            }
        );
    }

    #[test]
    fn truncation_keeps_the_chain_but_loses_the_close() {
        let (mut board, secrets, mut rng) = setup();
        for s in 0..3 {
            let (payload, _) = ballot(&board, s, &mut rng);
            board.append(EntryKind::CastBallot, &payload).unwrap();
        }
        board.close(&secrets.authority, &secrets.code_key, &mut rng).unwrap();
        let text = board.snapshot().to_ndjson();
        let lines: Vec<&str> = text.lines().collect();
        let truncated = lines[..4].join("\n");
        assert_eq!(
            verify_chain(truncated.as_bytes()).unwrap(),
            ChainSummary {
                entries: 4,
                closed: false
            }
        );
    }

    #[test]
    fn every_single_bit_flip_breaks_the_chain_at_or_after_the_flip() {
        let (mut board, secrets, mut rng) = setup();
        for s in 0..8 {
            let (payload, _) = ballot(&board, s % 3, &mut rng);
            board.append(EntryKind::CastBallot, &payload).unwrap();
        }
        board.close(&secrets.authority, &secrets.code_key, &mut rng).unwrap();
        let bytes = board.snapshot().to_ndjson().into_bytes();
        assert_eq!(board.snapshot().len(), 10);
        let line_of = |pos: usize| bytes[..pos].iter().filter(|&&b| b == b'\n').count() as u64;
        for pos in 0..bytes.len() {
            for bit in 0..8 {
                let mut m = bytes.clone();
                m[pos] ^= 1 << bit;
                let k = line_of(pos);
                match verify_chain(&m) {
                    Ok(_) => panic!("flip at byte {pos} bit {bit} accepted"),
                    Err(b) => assert!(b.seq == k || b.seq == k + 1, "flip on line {k} reported at {}", b.seq),
                }
            }
        }
    }

    #[test]
    fn file_boards_reopen_to_the_same_state() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("board.ndjson");
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let names: Vec<String> = ["A", "B"].iter().map(|s| s.to_string()).collect();
        let (m, _) = setup_election(Arc::new(Group::<u64>::toy()), "f", &names, 2, &mut rng).unwrap();
        let mut board = Board::create(&path, Arc::new(m)).unwrap();
        let (payload, hash) = ballot(&board, 1, &mut rng);
        board.append(EntryKind::CastBallot, &payload).unwrap();
        let before = board.snapshot().to_ndjson();
        let manifest = board.manifest().clone();
        drop(board);
        assert!(matches!(Board::create(&path, manifest), Err(BoardError::Io(_))));
        let mut board = Board::<u64>::open(&path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), before);
        assert_eq!(
            board.lookup(&hash),
            Lookup::Found {
                seq: 1,
                kind: EntryKind::CastBallot
            }
        );
        let (payload, _) = ballot(&board, 0, &mut rng);
        board.append(EntryKind::CastBallot, &payload).unwrap();
        let after = std::fs::read_to_string(&path).unwrap();
        assert!(after.starts_with(&before));
        assert_eq!(after.lines().count(), 3);
    }
}
