//! Adjudication of voter claims, defamation odds and dummy-vote audits.
//!
//! Outcomes are evidence labels. `Upheld` is only ever reached on a valid
//! device signature or an independent observer's word; a claim that could
//! have been fabricated by the claimant ends `Inconclusive` at worst.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use e2ev_format::doc::{canonical, ClaimDoc, ReceiptDoc, SignatureDoc};
use e2ev_format::hexfmt::{decode_digest, encode};
use e2ev_format::EntryKind;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::arith::GroupInt;
use crate::ballot::{open_challenge, Opening};
use crate::board::{Lookup, Snapshot};
use crate::manifest::Manifest;
use crate::receipt::{code_from_index, issue_return_code, Receipt, CODE_SPACE};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClaimKind {
    /// The receipted ballot is not on the cast list.
    NotIncluded,
    /// The device printed a return code other than the one bound to the ballot.
    WrongCode,
}

impl ClaimKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClaimKind::NotIncluded => "NotIncluded",
            ClaimKind::WrongCode => "WrongCode",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown claim kind {0:?}")]
pub struct UnknownClaimKind(pub String);

impl FromStr for ClaimKind {
    type Err = UnknownClaimKind;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "NotIncluded" => Ok(ClaimKind::NotIncluded),
            "WrongCode" => Ok(ClaimKind::WrongCode),
            other => Err(UnknownClaimKind(other.to_owned())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisputeClaim {
    pub receipt: ReceiptDoc,
    pub kind: ClaimKind,
    pub observed_issuance: bool,
}

impl DisputeClaim {
    pub fn from_doc(doc: ClaimDoc) -> Result<Self, UnknownClaimKind> {
        Ok(DisputeClaim {
            kind: doc.kind.parse()?,
            receipt: doc.receipt,
            observed_issuance: doc.observed_issuance,
        })
    }

    pub fn to_doc(&self) -> ClaimDoc {
        ClaimDoc {
            receipt: self.receipt.clone(),
            kind: self.kind.as_str().to_owned(),
            observed_issuance: self.observed_issuance,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Upheld,
    Rejected,
    Inconclusive,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Upheld => "Upheld",
            Outcome::Rejected => "Rejected",
            Outcome::Inconclusive => "Inconclusive",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Machine-readable evidence behind an adjudication.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Locator {
    pub claim: String,
    pub outcome: String,
    pub ballot_hash: String,
    /// Seq of the cast entry carrying the ballot, if any.
    pub board_seq: Option<u64>,
    /// `valid`, `invalid` or `malformed`.
    pub signature: String,
    pub observed_issuance: bool,
    pub recomputed_code: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adjudication {
    pub outcome: Outcome,
    pub rationale: String,
    pub locator: Locator,
}

impl Adjudication {
    /// Plain-text report followed by the JSON locator on its own line.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "outcome: {}", self.outcome);
        let _ = writeln!(s, "claim: {}", self.locator.claim);
        let _ = writeln!(s, "rationale: {}", self.rationale);
        let _ = writeln!(s, "locator:");
        let _ = writeln!(s, "{}", canonical(&self.locator));
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SignatureStatus {
    Valid,
    Invalid,
    Malformed,
}

impl SignatureStatus {
    fn as_str(self) -> &'static str {
        match self {
            SignatureStatus::Valid => "valid",
            SignatureStatus::Invalid => "invalid",
            SignatureStatus::Malformed => "malformed",
        }
    }
}

fn cast_seq(snapshot: &Snapshot, hash: &[u8; 32]) -> Option<u64> {
    match snapshot.lookup(hash) {
        Lookup::Found {
            seq,
            kind: EntryKind::CastBallot,
        } => Some(seq),
        _ => None,
    }
}

/// Decides a claim against the board.
///
/// | signature | claim        | board                          | outcome      |
/// |-----------|--------------|--------------------------------|--------------|
/// | valid     | any          | ballot not on the cast list    | Upheld       |
/// | valid     | NotIncluded  | on the cast list               | Rejected     |
/// | valid     | WrongCode    | on the list, no code key yet   | Inconclusive |
/// | valid     | WrongCode    | on the list, code differs      | Upheld       |
/// | valid     | WrongCode    | on the list, code matches      | Rejected     |
/// | invalid   | any          | observed issuance              | Upheld       |
/// | invalid   | any          | unobserved                     | Inconclusive |
///
/// A malformed receipt counts as an invalid signature.
pub fn adjudicate<T: GroupInt>(claim: &DisputeClaim, snapshot: &Snapshot, manifest: &Manifest<T>) -> Adjudication {
    let group = manifest.group();
    let parsed = Receipt::from_doc(group, &claim.receipt);
    let status = match &parsed {
        Err(_) => SignatureStatus::Malformed,
        Ok(r) if r.signature_valid(group, manifest.device_pk()) => SignatureStatus::Valid,
        Ok(_) => SignatureStatus::Invalid,
    };
    let hash = parsed.as_ref().ok().map(|r| r.ballot_hash);
    let seq = hash.as_ref().and_then(|h| cast_seq(snapshot, h));
    let mut recomputed = None;

    let (outcome, rationale) = match status {
        SignatureStatus::Valid => match (seq, claim.kind) {
            (None, _) => (
                Outcome::Upheld,
                "device signature is valid and the ballot is not on the cast list".to_owned(),
            ),
            (Some(seq), ClaimKind::NotIncluded) => {
                (Outcome::Rejected, format!("ballot is on the cast list at seq {seq}"))
            }
            (Some(seq), ClaimKind::WrongCode) => match snapshot.code_key() {
                None => (
                    Outcome::Inconclusive,
                    format!("ballot is at seq {seq} but the code key is not yet published"),
                ),
                Some(key) => {
                    let code = issue_return_code(key, hash.as_ref().expect("valid implies parsed"));
                    let r = if code != claim.receipt.return_code {
                        (
                            Outcome::Upheld,
                            format!(
                                "device signed return code {} but the ballot at seq {seq} is bound to {code}",
                                claim.receipt.return_code
                            ),
                        )
                    } else {
                        (
                            Outcome::Rejected,
                            format!("return code matches the ballot at seq {seq}"),
                        )
                    };
                    recomputed = Some(code);
                    r
                }
            },
        },
        bad => {
            if claim.observed_issuance {
                (
                    Outcome::Upheld,
                    format!(
                        "an observer saw the device issue a receipt whose signature is {}",
                        bad.as_str()
                    ),
                )
            } else {
                (
                    Outcome::Inconclusive,
                    format!(
                        "receipt signature is {} and its issuance was not observed",
                        bad.as_str()
                    ),
                )
            }
        }
    };

    Adjudication {
        outcome,
        rationale,
        locator: Locator {
            claim: claim.kind.as_str().to_owned(),
            outcome: outcome.as_str().to_owned(),
            ballot_hash: claim.receipt.ballot_hash.clone(),
            board_seq: seq,
            signature: status.as_str().to_owned(),
            observed_issuance: claim.observed_issuance,
            recomputed_code: recomputed,
        },
    }
}

/// Credibility in a return-code-only regime, where receipts carry no
/// signature: a claim citing a cast ballot is believed iff its code is the
/// one bound to that ballot. A claimant who never held the receipt has to
/// guess the code.
pub fn adjudicate_by_code(claim: &DisputeClaim, snapshot: &Snapshot) -> Outcome {
    let Ok(hash) = decode_digest(&claim.receipt.ballot_hash) else {
        return Outcome::Rejected;
    };
    let (Some(_), Some(key)) = (cast_seq(snapshot, &hash), snapshot.code_key()) else {
        return Outcome::Rejected;
    };
    if issue_return_code(key, &hash) == claim.receipt.return_code {
        Outcome::Upheld
    } else {
        Outcome::Rejected
    }
}

/// Expected number of correct guesses among `n_claims` uniform code guesses.
pub fn expected_defamation_successes(n_claims: u64) -> f64 {
    n_claims as f64 / CODE_SPACE as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefamationStats {
    pub n_claims: u64,
    pub trials: u64,
    /// Upheld count of each trial.
    pub upheld: Vec<u64>,
    pub mean: f64,
    pub std_dev: f64,
    pub expected: f64,
}

/// Each trial files `n_claims` `WrongCode` claims citing uniformly chosen
/// cast ballots with uniformly guessed codes, and counts how many
/// [`adjudicate_by_code`] upholds.
pub fn defamation_monte_carlo(snapshot: &Snapshot, n_claims: u64, trials: u64, seed: u64) -> DefamationStats {
    let cast: Vec<String> = snapshot
        .ballot_hashes(EntryKind::CastBallot)
        .iter()
        .map(|h| encode(h))
        .collect();
    assert!(!cast.is_empty(), "defamation needs at least one cast ballot");
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut upheld = Vec::with_capacity(trials as usize);
    let mut claim = DisputeClaim {
        receipt: ReceiptDoc {
            ballot_hash: String::new(),
            signature: SignatureDoc {
                r: String::new(),
                s: String::new(),
            },
            return_code: String::new(),
        },
        kind: ClaimKind::WrongCode,
        observed_issuance: false,
    };
    for _ in 0..trials {
        let mut hits = 0;
        for _ in 0..n_claims {
            claim
                .receipt
                .ballot_hash
                .clone_from(&cast[rng.gen_range(0..cast.len())]);
            claim.receipt.return_code = code_from_index(rng.gen_range(0..CODE_SPACE));
            if adjudicate_by_code(&claim, snapshot) == Outcome::Upheld {
                hits += 1;
            }
        }
        upheld.push(hits);
    }
    let n = trials as f64;
    let mean = upheld.iter().sum::<u64>() as f64 / n;
    let var = upheld.iter().map(|&u| (u as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    DefamationStats {
        n_claims,
        trials,
        upheld,
        mean,
        std_dev: var.sqrt(),
        expected: expected_defamation_successes(n_claims),
    }
}

/// An unobserved claim that an honest election must never uphold.
///
/// `receipts` are the genuine receipts of the election. The claim is one of:
/// a genuine receipt with either claim kind, a genuine receipt with an
/// altered code or hash, a signature transplanted from another receipt, or
/// random bytes.
pub fn false_claim<R: RngCore + ?Sized>(rng: &mut R, receipts: &[ReceiptDoc], snapshot: &Snapshot) -> DisputeClaim {
    let kind = if rng.gen_bool(0.5) {
        ClaimKind::NotIncluded
    } else {
        ClaimKind::WrongCode
    };
    let pick = |rng: &mut R| receipts[rng.gen_range(0..receipts.len())].clone();
    let random_hex = |rng: &mut R, len: usize| {
        let mut b = vec![0u8; len];
        rng.fill_bytes(&mut b);
        encode(&b)
    };
    let mut receipt = pick(rng);
    match rng.gen_range(0..6) {
        0 => {}
        1 => {
            let real = receipt.return_code.clone();
            while receipt.return_code == real {
                receipt.return_code = code_from_index(rng.gen_range(0..CODE_SPACE));
            }
        }
        2 => receipt.ballot_hash = random_hex(rng, 32),
        3 => {
            let other = pick(rng);
            receipt.signature = other.signature;
        }
        4 => {
            let challenged = snapshot.ballot_hashes(EntryKind::ChallengedBallot);
            if !challenged.is_empty() {
                receipt.ballot_hash = encode(&challenged[rng.gen_range(0..challenged.len())]);
            } else {
                receipt.ballot_hash = random_hex(rng, 32);
            }
        }
        _ => {
            let w = receipt.signature.r.len() / 2;
            receipt = ReceiptDoc {
                ballot_hash: random_hex(rng, 32),
                signature: SignatureDoc {
                    r: random_hex(rng, w),
                    s: random_hex(rng, receipt.signature.s.len() / 2),
                },
                return_code: code_from_index(rng.gen_range(0..CODE_SPACE)),
            };
        }
    }
    DisputeClaim {
        receipt,
        kind,
        observed_issuance: false,
    }
}

/// One scripted dummy vote, recorded by the auditor before the device
/// committed to an encryption.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DummyVote {
    pub session: u64,
    pub ballot_hash: String,
    pub selection: u32,
}

/// The sidecar file listing all dummy sessions of an election.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DummySidecar {
    pub dummies: Vec<DummyVote>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inconsistency {
    pub dummy: DummyVote,
    pub board_seq: Option<u64>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DummyAudit {
    pub audited: usize,
    pub inconsistencies: Vec<Inconsistency>,
    /// Dummy ballots found on the cast list, which must be empty.
    pub counted: Vec<u64>,
}

impl DummyAudit {
    pub fn clean(&self) -> bool {
        self.inconsistencies.is_empty() && self.counted.is_empty()
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "dummy audit: {} sessions, {} inconsistencies, {} counted",
            self.audited,
            self.inconsistencies.len(),
            self.counted.len()
        );
        for i in &self.inconsistencies {
            let seq = i.board_seq.map_or_else(|| "-".to_owned(), |s| s.to_string());
            let _ = writeln!(
                s,
                "session {} seq {} selection {} ballot {}: {}",
                i.dummy.session, seq, i.dummy.selection, i.dummy.ballot_hash, i.reason
            );
        }
        for seq in &self.counted {
            let _ = writeln!(s, "dummy ballot counted at seq {seq}");
        }
        s
    }
}

/// Checks that every dummy session was opened on the challenged list with
/// the scripted selection and opens consistently.
pub fn dummy_vote_audit<T: GroupInt>(
    snapshot: &Snapshot,
    manifest: &Manifest<T>,
    sidecar: &DummySidecar,
) -> DummyAudit {
    let mut inconsistencies = Vec::new();
    let mut counted = Vec::new();
    for d in &sidecar.dummies {
        let mut flag = |board_seq, reason: String| {
            inconsistencies.push(Inconsistency {
                dummy: d.clone(),
                board_seq,
                reason,
            })
        };
        let Ok(hash) = decode_digest(&d.ballot_hash) else {
            flag(None, "malformed ballot hash in sidecar".to_owned());
            continue;
        };
        let seq = match snapshot.lookup(&hash) {
            Lookup::Absent => {
                flag(None, "not on the board".to_owned());
                continue;
            }
            Lookup::Found {
                seq,
                kind: EntryKind::ChallengedBallot,
            } => seq,
            Lookup::Found { seq, .. } => {
                counted.push(seq);
                continue;
            }
        };
        let payload = &snapshot.entries()[seq as usize].payload;
        let Ok(doc) = serde_json::from_str(payload) else {
            flag(Some(seq), "challenge record does not decode".to_owned());
            continue;
        };
        let doc: e2ev_format::doc::ChallengeDoc = doc;
        if doc.claimed != d.selection {
            flag(
                Some(seq),
                format!("device claimed selection {} instead of {}", doc.claimed, d.selection),
            );
            continue;
        }
        match open_challenge(manifest, &doc) {
            Ok(Opening::Consistent) => {}
            Ok(Opening::Inconsistent(r)) => flag(Some(seq), format!("opening inconsistent: {r}")),
            Err(r) => flag(Some(seq), format!("challenge record invalid: {r}")),
        }
    }
    DummyAudit {
        audited: sidecar.dummies.len(),
        inconsistencies,
        counted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::board::Board;
    use crate::device::{Device, DeviceConfig};
    use crate::group::Group;
    use crate::manifest::{setup_election, ElectionSecrets};
    use crate::tally::tally_board;
    use std::sync::Arc;

    struct Election {
        board: Board<u64>,
        receipts: Vec<ReceiptDoc>,
        dummies: DummySidecar,
        secrets: ElectionSecrets<u64>,
        cheated: usize,
    }

    fn election(config: DeviceConfig, voters: u32, dummies: u32, close: bool) -> Election {
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed.wrapping_mul(31));
        let names: Vec<String> = ["A", "B", "C"].iter().map(|s| s.to_string()).collect();
        let (m, secrets) = setup_election(Arc::new(Group::<u64>::toy()), "disp", &names, 1, &mut rng).unwrap();
        let m = Arc::new(m);
        let mut board = Board::in_memory(m.clone());
        let mut dev = Device::new(config, m.clone(), secrets.device.clone(), secrets.code_key).unwrap();
        let mut sidecar = DummySidecar::default();
        for i in 0..dummies {
            let c = dev.begin(i % 3).unwrap();
            sidecar.dummies.push(DummyVote {
                session: c.session.0,
                ballot_hash: encode(&c.ballot_hash),
                selection: i % 3,
            });
            dev.finalize_challenge(c.session, &mut board).unwrap();
        }
        let mut receipts = Vec::new();
        for i in 0..voters {
            let c = dev.begin(i % 3).unwrap();
            let (r, _) = dev.finalize_cast(c.session, &mut board).unwrap();
            receipts.push(r.to_doc(m.group()));
        }
        if close {
            tally_board(&mut board, &secrets.trustees).unwrap();
            board.close(&secrets.authority, &secrets.code_key, &mut rng).unwrap();
        }
        Election {
            board,
            receipts,
            dummies: sidecar,
            secrets,
            cheated: dev.log().iter().filter(|r| r.cheated()).count(),
        }
    }

    fn claim(receipt: &ReceiptDoc, kind: ClaimKind, observed: bool) -> DisputeClaim {
        DisputeClaim {
            receipt: receipt.clone(),
            kind,
            observed_issuance: observed,
        }
    }

    fn judge(e: &Election, c: &DisputeClaim) -> Adjudication {
        adjudicate(c, e.board.snapshot(), e.board.manifest())
    }

    #[test]
    fn dropped_ballots_are_upheld_for_either_claim_kind() {
        let e = election(
            DeviceConfig {
                drop_rate: 1.0,
                ..DeviceConfig::honest(1)
            },
            3,
            0,
            true,
        );
        for r in &e.receipts {
            for kind in [ClaimKind::NotIncluded, ClaimKind::WrongCode] {
                let a = judge(&e, &claim(r, kind, false));
                assert_eq!(a.outcome, Outcome::Upheld, "{}", a.rationale);
                assert_eq!(a.locator.board_seq, None);
                assert_eq!(a.locator.signature, "valid");
            }
        }
    }

    #[test]
    fn genuine_receipts_exonerate_the_system() {
        let e = election(DeviceConfig::honest(2), 4, 0, true);
        for r in &e.receipts {
            let a = judge(&e, &claim(r, ClaimKind::NotIncluded, false));
            assert_eq!(a.outcome, Outcome::Rejected);
            assert!(a.locator.board_seq.is_some());
            let a = judge(&e, &claim(r, ClaimKind::WrongCode, true));
            assert_eq!(a.outcome, Outcome::Rejected);
            assert_eq!(a.locator.recomputed_code.as_deref(), Some(r.return_code.as_str()));
        }
    }

    #[test]
    fn wrong_code_needs_the_published_key() {
        let e = election(DeviceConfig::honest(3), 2, 0, false);
        let a = judge(&e, &claim(&e.receipts[0], ClaimKind::WrongCode, false));
        assert_eq!(a.outcome, Outcome::Inconclusive);
    }

    #[test]
    fn device_signed_wrong_code_is_upheld() {
        let e = election(DeviceConfig::honest(4), 1, 0, true);
        let group = e.board.manifest().group();
        let hash = decode_digest(&e.receipts[0].ballot_hash).unwrap();
        let wrong_key = [0xeeu8; 32];
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let mut r = Receipt::issue(group, &e.secrets.device, &wrong_key, hash, &mut rng);
        if r.return_code == e.receipts[0].return_code {
            r = Receipt::issue(group, &e.secrets.device, &[0xefu8; 32], hash, &mut rng);
        }
        let a = judge(&e, &claim(&r.to_doc(group), ClaimKind::WrongCode, false));
        assert_eq!(a.outcome, Outcome::Upheld, "{}", a.rationale);
    }

    #[test]
    fn bad_signatures_depend_on_observation() {
        let e = election(
            DeviceConfig {
                bad_signature_rate: 1.0,
                ..DeviceConfig::honest(5)
            },
            2,
            0,
            true,
        );
        let r = &e.receipts[0];
        assert_eq!(
            judge(&e, &claim(r, ClaimKind::NotIncluded, true)).outcome,
            Outcome::Upheld
        );
        let a = judge(&e, &claim(r, ClaimKind::NotIncluded, false));
        assert_eq!(a.outcome, Outcome::Inconclusive);
        assert_eq!(a.locator.signature, "invalid");
        let mut junk = r.clone();
        junk.ballot_hash = "zz".into();
        assert_eq!(
            judge(&e, &claim(&junk, ClaimKind::WrongCode, false)).locator.signature,
            "malformed"
        );
    }

    #[test]
    fn report_ends_with_a_parseable_locator() {
        let e = election(DeviceConfig::honest(6), 1, 0, true);
        let a = judge(&e, &claim(&e.receipts[0], ClaimKind::NotIncluded, false));
        let text = a.report();
        assert!(text.starts_with("outcome: Rejected\nclaim: NotIncluded\n"));
        let last = text.lines().last().unwrap();
        let loc: Locator = serde_json::from_str(last).unwrap();
        assert_eq!(loc, a.locator);
        let doc = claim(&e.receipts[0], ClaimKind::WrongCode, true).to_doc();
        assert_eq!(DisputeClaim::from_doc(doc.clone()).unwrap().to_doc(), doc);
        assert!("Other".parse::<ClaimKind>().is_err());
    }

    #[test]
    fn fuzzed_false_claims_are_never_upheld() {
        let e = election(DeviceConfig::honest(7), 12, 3, true);
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..2000 {
            let c = false_claim(&mut rng, &e.receipts, e.board.snapshot());
            let a = judge(&e, &c);
            assert_ne!(a.outcome, Outcome::Upheld, "{}", a.report());
            seen.insert(a.outcome);
        }
        assert_eq!(seen.len(), 2);
    }

    #[test]
    fn defamation_expectation() {
        assert_eq!(expected_defamation_successes(0), 0.0);
        assert_eq!(expected_defamation_successes(676), 1.0);
        assert!((expected_defamation_successes(1000) - 1.479).abs() < 5e-4);
    }

    #[test]
    fn guessing_codes_succeeds_at_one_in_676() {
        let e = election(DeviceConfig::honest(8), 5, 0, true);
        let stats = defamation_monte_carlo(e.board.snapshot(), 1000, 200, 8);
        // 2*10^5 guesses at p = 1/676: 3 sigma on the rate is 3*sqrt(p(1-p)/n).
        let p = 1.0 / 676.0;
        let n = 200_000.0;
        let rate = stats.upheld.iter().sum::<u64>() as f64 / n;
        assert!((rate - p).abs() <= 3.0 * (p * (1.0 - p) / n).sqrt(), "rate {rate}");
        assert_eq!(stats, defamation_monte_carlo(e.board.snapshot(), 1000, 200, 8));
        let mut honest = claim(&e.receipts[0], ClaimKind::WrongCode, false);
        assert_eq!(adjudicate_by_code(&honest, e.board.snapshot()), Outcome::Upheld);
        honest.receipt.return_code = if honest.receipt.return_code == "AA" { "AB" } else { "AA" }.into();
        assert_eq!(adjudicate_by_code(&honest, e.board.snapshot()), Outcome::Rejected);
    }

    #[test]
    fn honest_dummies_are_clean() {
        let e = election(DeviceConfig::honest(9), 2, 50, true);
        let audit = dummy_vote_audit(e.board.snapshot(), e.board.manifest(), &e.dummies);
        assert!(audit.clean(), "{}", audit.report());
        assert_eq!(audit.audited, 50);
    }

    #[test]
    fn cheating_dummies_are_captured() {
        // The oracle is the device's own log: every cheated dummy session
        // must be reported, and nothing else.
        let cfg = DeviceConfig {
            cheat_rate: 0.5,
            ..DeviceConfig::honest(10)
        };
        let mut total = 0usize;
        for seed in 0..20 {
            let e = election(DeviceConfig { seed: 10 + seed, ..cfg }, 0, 50, false);
            let audit = dummy_vote_audit(e.board.snapshot(), e.board.manifest(), &e.dummies);
            assert!(audit.counted.is_empty());
            assert!(audit
                .inconsistencies
                .iter()
                .all(|i| i.reason.starts_with("opening inconsistent")));
            assert_eq!(audit.inconsistencies.len(), e.cheated);
            total += audit.inconsistencies.len();
        }
        let mean = total as f64 / 20.0;
        // Binomial(50, 0.5) averaged over 20 runs: sd of the mean ~0.79.
        assert!((mean - 25.0).abs() < 3.0, "mean {mean}");
    }

    #[test]
    fn dummies_on_the_cast_list_or_missing_are_reported() {
        let e = election(DeviceConfig::honest(11), 2, 1, true);
        let mut sidecar = e.dummies.clone();
        sidecar.dummies.push(DummyVote {
            session: 99,
            ballot_hash: e.receipts[0].ballot_hash.clone(),
            selection: 0,
        });
        sidecar.dummies.push(DummyVote {
            session: 100,
            ballot_hash: encode(&[1u8; 32]),
            selection: 0,
        });
        sidecar.dummies[0].selection = 2;
        let audit = dummy_vote_audit(e.board.snapshot(), e.board.manifest(), &sidecar);
        assert_eq!(audit.counted.len(), 1);
        assert_eq!(audit.inconsistencies.len(), 2);
        assert!(audit.inconsistencies[0]
            .reason
            .contains("claimed selection 0 instead of 2"));
        assert_eq!(audit.inconsistencies[1].reason, "not on the board");
        assert!(!audit.clean());
        assert!(audit.report().contains("dummy ballot counted at seq"));
    }
}
