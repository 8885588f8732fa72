//! Adversarial election simulator.
//!
//! A trial runs a complete election against a possibly misbehaving device
//! and records which detection channels fired. Voters decide to challenge
//! only after the device has committed to an encryption, so the device
//! cannot condition on the decision.
//!
//! Each trial draws from its own seed, `SHA-256(seed ‖ trial)`, split into
//! independent ChaCha20 streams for setup, the device and the voters.

use std::io;
use std::sync::Arc;

use e2ev_format::doc::{canonical, BallotDoc, ReceiptDoc};
use e2ev_format::EntryKind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::GroupInt;
use crate::ballot::{open_challenge, Opening};
use crate::board::{Board, Lookup, Snapshot};
use crate::device::{Device, DeviceConfig};
use crate::dlog::recover_exponent;
use crate::elgamal::{combine_shares, Ciphertext};
use crate::group::{Group, TrusteeShare};
use crate::manifest::{setup_election, Manifest};
use crate::tally::tally_board;
use crate::verifier::{check_receipt, verify_election, ReceiptStatus};

const STREAM_SETUP: u64 = 0;
const STREAM_DEVICE: u64 = 1;
const STREAM_VOTERS: u64 = 2;

/// 97.5% standard normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_voters: u32,
    pub candidates: u32,
    /// Per-voter probability of challenging one session before casting.
    pub q: f64,
    /// Per-voter probability of checking the receipt on the closed board.
    pub rho: f64,
    /// Device cheat rate.
    pub f: f64,
    /// Device drop rate.
    pub d: f64,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("{0} must be in [0, 1], got {1}")]
    Probability(&'static str, f64),
    #[error("{0} must be at least {1}")]
    TooSmall(&'static str, u64),
    #[error("sweep grid has no cells")]
    EmptyGrid,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        for (name, v) in [("q", self.q), ("rho", self.rho), ("f", self.f), ("d", self.d)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SimError::Probability(name, v));
            }
        }
        if self.n_voters < 1 {
            return Err(SimError::TooSmall("n_voters", 1));
        }
        if self.candidates < 2 {
            return Err(SimError::TooSmall("candidates", 2));
        }
        if self.trials < 1 {
            return Err(SimError::TooSmall("trials", 1));
        }
        Ok(())
    }

    /// `1 − (1 − qf)^N`.
    pub fn analytic_challenge(&self) -> f64 {
        1.0 - (1.0 - self.q * self.f).powi(self.n_voters as i32)
    }

    /// `1 − (1 − ρd)^N`.
    pub fn analytic_receipt(&self) -> f64 {
        1.0 - (1.0 - self.rho * self.d).powi(self.n_voters as i32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    ChallengeMismatch,
    ReceiptMissing,
    ReceiptSignature,
    VerifierFail,
}

/// What one simulated election produced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub detected: bool,
    /// Every channel that fired, in channel order.
    pub channels: Vec<Channel>,
    pub verifier_passed: bool,
    /// Intended selections per candidate.
    pub truth: Vec<u64>,
    /// Published counts; empty if the tally could not be produced.
    pub reported: Vec<u64>,
    /// Cast ballots on the board whose plaintext differs from the voter's intent.
    pub shifted: u64,
    /// Receipted ballots missing from the cast list.
    pub dropped: u64,
    pub tally_error: u64,
    pub challenges: u64,
    pub receipt_checks: u64,
}

impl TrialOutcome {
    pub fn fired(&self, c: Channel) -> bool {
        self.channels.contains(&c)
    }
}

pub fn trial_seed(seed: u64, trial: u64) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(seed.to_be_bytes());
    h.update(trial.to_be_bytes());
    h.finalize().into()
}

fn stream(seed: [u8; 32], s: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::from_seed(seed);
    rng.set_stream(s);
    rng
}

/// Decrypts one ballot with the trustee secrets; `None` unless exactly one
/// candidate decrypts to 1.
fn plaintext<T: GroupInt>(manifest: &Manifest<T>, shares: &[TrusteeShare<T>], doc: &BallotDoc) -> Option<u32> {
    let group = manifest.group();
    let mut selected = None;
    for (j, ct) in doc.ciphertexts.iter().enumerate() {
        let ct = Ciphertext::from_doc(group, ct).ok()?;
        let partials: Vec<_> = shares.iter().map(|s| group.pow(&ct.a, &s.sk)).collect();
        let gm = combine_shares(group, &ct, &partials, shares.len()).ok()?;
        match recover_exponent(group, &gm, 1)? {
            0 => {}
            _ if selected.is_some() => return None,
            _ => selected = Some(j as u32),
        }
    }
    selected
}

/// Runs one election in `group`: setup, N voter sessions, tally, close,
/// receipt checks and full verification.
pub fn run_election<T: GroupInt>(config: &SimConfig, group: &Arc<Group<T>>, seed: [u8; 32]) -> TrialOutcome {
    let mut setup_rng = stream(seed, STREAM_SETUP);
    let mut voters = stream(seed, STREAM_VOTERS);
    let names: Vec<String> = (0..config.candidates).map(|i| format!("candidate-{i}")).collect();
    let (manifest, secrets) =
        setup_election(group.clone(), "sim", &names, 1, &mut setup_rng).expect("simulator setup is well-formed");
    let manifest = Arc::new(manifest);
    let device_config = DeviceConfig {
        cheat_rate: config.f,
        drop_rate: config.d,
        bad_signature_rate: 0.0,
        seed: 0,
    };
    let mut device = Device::with_rng(
        device_config,
        manifest.clone(),
        secrets.device.clone(),
        secrets.code_key,
        stream(seed, STREAM_DEVICE),
    )
    .expect("rates validated");
    let mut board = Board::in_memory(manifest.clone());

    let mut channels = Vec::new();
    let mut truth = vec![0u64; config.candidates as usize];
    let mut cast: Vec<(u32, ReceiptDoc)> = Vec::with_capacity(config.n_voters as usize);
    let mut challenges = 0;
    for _ in 0..config.n_voters {
        let selection = voters.gen_range(0..config.candidates);
        truth[selection as usize] += 1;
        let commitment = device.begin(selection).expect("selection in range");
        if voters.gen_bool(config.q) {
            challenges += 1;
            let (record, _) = device
                .finalize_challenge(commitment.session, &mut board)
                .expect("board accepts the challenge");
            if record.claimed != selection || open_challenge(&manifest, &record) != Ok(Opening::Consistent) {
                channels.push(Channel::ChallengeMismatch);
            }
            let again = device.begin(selection).expect("selection in range");
            cast.push((selection, cast_one(&mut device, again.session, &mut board, group)));
        } else {
            cast.push((selection, cast_one(&mut device, commitment.session, &mut board, group)));
        }
    }

    let reported = match tally_board(&mut board, &secrets.trustees) {
        Ok((doc, _)) => doc.candidates.iter().map(|c| c.count).collect(),
        Err(_) => Vec::new(),
    };
    board
        .close(&secrets.authority, &secrets.code_key, &mut setup_rng)
        .expect("board closes once");
    let snapshot: &Snapshot = board.snapshot();

    let mut receipt_checks = 0;
    for (_, receipt) in &cast {
        if voters.gen_bool(config.rho) {
            receipt_checks += 1;
            match check_receipt(receipt, snapshot, &manifest) {
                ReceiptStatus::Included => {}
                ReceiptStatus::Missing => channels.push(Channel::ReceiptMissing),
                ReceiptStatus::SignatureInvalid => channels.push(Channel::ReceiptSignature),
            }
        }
    }

    let report = verify_election::<T>(
        manifest.canonical_json().as_bytes(),
        snapshot.to_ndjson().as_bytes(),
        None,
    );
    if !report.passed() {
        channels.push(Channel::VerifierFail);
    }

    let (mut shifted, mut dropped) = (0, 0);
    for (selection, receipt) in &cast {
        let hash = e2ev_format::hexfmt::decode_digest(&receipt.ballot_hash).expect("device receipts are well-formed");
        match snapshot.lookup(&hash) {
            Lookup::Found {
                seq,
                kind: EntryKind::CastBallot,
            } => {
                let doc: BallotDoc =
                    serde_json::from_str(&snapshot.entries()[seq as usize].payload).expect("board validated it");
                if plaintext(&manifest, &secrets.trustees, &doc) != Some(*selection) {
                    shifted += 1;
                }
            }
            _ => dropped += 1,
        }
    }

    channels.sort_unstable();
    channels.dedup();
    TrialOutcome {
        detected: !channels.is_empty(),
        channels,
        verifier_passed: report.passed(),
        truth,
        reported,
        shifted,
        dropped,
        tally_error: shifted + dropped,
        challenges,
        receipt_checks,
    }
}

fn cast_one<T: GroupInt>(
    device: &mut Device<T>,
    session: crate::device::SessionId,
    board: &mut Board<T>,
    group: &Group<T>,
) -> ReceiptDoc {
    let (receipt, _) = device
        .finalize_cast(session, board)
        .unwrap_or_else(|_| panic!("board rejected an honest-format ballot"));
    receipt.to_doc(group)
}

/// All trials of `config` in the toy group.
pub fn run_trials(config: &SimConfig) -> Result<Vec<TrialOutcome>, SimError> {
    config.validate()?;
    let group = Arc::new(Group::<u64>::toy());
    Ok((0..config.trials)
        .map(|i| run_election(config, &group, trial_seed(config.seed, i)))
        .collect())
}

/// Wilson score interval at 95%.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

pub fn wilson(successes: u64, n: u64) -> Interval {
    if n == 0 {
        return Interval { lo: 0.0, hi: 1.0 };
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Interval {
        lo: (center - half).max(0.0),
        hi: (center + half).min(1.0),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rate {
    pub analytic: f64,
    pub empirical: f64,
    pub interval: Interval,
    pub deviation: f64,
}

impl Rate {
    fn new(analytic: f64, hits: u64, n: u64) -> Self {
        let empirical = hits as f64 / n as f64;
        Rate {
            analytic,
            empirical,
            interval: wilson(hits, n),
            deviation: (empirical - analytic).abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetectionEstimate {
    pub trials: u64,
    pub challenge: Rate,
    pub receipt: Rate,
    /// Fraction of trials in which any channel fired.
    pub any: f64,
}

pub fn summarize(config: &SimConfig, outcomes: &[TrialOutcome]) -> DetectionEstimate {
    let n = outcomes.len() as u64;
    let count = |c| outcomes.iter().filter(|o| o.fired(c)).count() as u64;
    DetectionEstimate {
        trials: n,
        challenge: Rate::new(config.analytic_challenge(), count(Channel::ChallengeMismatch), n),
        receipt: Rate::new(config.analytic_receipt(), count(Channel::ReceiptMissing), n),
        any: outcomes.iter().filter(|o| o.detected).count() as f64 / n as f64,
    }
}

pub fn estimate_detection(config: &SimConfig) -> Result<DetectionEstimate, SimError> {
    if config.trials < 100 {
        return Err(SimError::TooSmall("trials", 100));
    }
    let outcomes = run_trials(config)?;
    Ok(summarize(config, &outcomes))
}

/// Cartesian grid of configurations sharing candidates, trials and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n_voters: Vec<u32>,
    pub q: Vec<f64>,
    pub rho: Vec<f64>,
    pub f: Vec<f64>,
    pub d: Vec<f64>,
    pub candidates: u32,
    pub trials: u64,
    pub seed: u64,
}

impl SweepConfig {
    pub fn cells(&self) -> Vec<SimConfig> {
        let mut out = Vec::new();
        for &n_voters in &self.n_voters {
            for &q in &self.q {
                for &rho in &self.rho {
                    for &f in &self.f {
                        for &d in &self.d {
                            out.push(SimConfig {
                                n_voters,
                                candidates: self.candidates,
                                q,
                                rho,
                                f,
                                d,
                                trials: self.trials,
                                seed: self.seed,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: u32,
    pub q: f64,
    pub rho: f64,
    pub f: f64,
    pub d: f64,
    pub trials: u64,
    pub analytic_challenge: f64,
    pub empirical_challenge: f64,
    pub analytic_receipt: f64,
    pub empirical_receipt: f64,
}

impl SweepRow {
    pub fn new(config: &SimConfig, estimate: &DetectionEstimate) -> Self {
        SweepRow {
            n: config.n_voters,
            q: config.q,
            rho: config.rho,
            f: config.f,
            d: config.d,
            trials: estimate.trials,
            analytic_challenge: estimate.challenge.analytic,
            empirical_challenge: estimate.challenge.empirical,
            analytic_receipt: estimate.receipt.analytic,
            empirical_receipt: estimate.receipt.empirical,
        }
    }
}

pub fn sweep(grid: &SweepConfig) -> Result<Vec<SweepRow>, SimError> {
    let cells = grid.cells();
    if cells.is_empty() {
        return Err(SimError::EmptyGrid);
    }
    cells
        .iter()
        .map(|c| estimate_detection(c).map(|e| SweepRow::new(c, &e)))
        .collect()
}

pub fn write_csv<W: io::Write>(rows: &[SweepRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Canonical JSON of a run, for byte-level reproducibility checks.
pub fn outcomes_json(outcomes: &[TrialOutcome]) -> String {
    canonical(&outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: u32, q: f64, rho: f64, f: f64, d: f64, trials: u64) -> SimConfig {
        SimConfig {
            n_voters: n,
            candidates: 3,
            q,
            rho,
            f,
            d,
            trials,
            seed: 42,
        }
    }

    #[test]
    fn analytic_values() {
        // 1 - 0.98^100 and 1 - 0.9975^1000, computed independently.
        assert!((config(100, 0.2, 0.0, 0.1, 0.0, 1).analytic_challenge() - 0.867_380).abs() < 1e-6);
        assert!((config(1000, 0.05, 0.0, 0.05, 0.0, 1).analytic_challenge() - 0.918_172).abs() < 1e-6);
        assert_eq!(config(1000, 0.0, 0.0, 0.5, 0.0, 1).analytic_challenge(), 0.0);
        assert_eq!(config(1000, 0.5, 0.0, 0.0, 0.0, 1).analytic_challenge(), 0.0);
        assert!((config(10, 0.0, 0.5, 0.0, 0.2, 1).analytic_receipt() - (1.0 - 0.9f64.powi(10))).abs() < 1e-12);
    }

    #[test]
    fn analytic_is_monotone_over_a_grid() {
        let axis = [0.0, 0.01, 0.05, 0.1, 0.5, 1.0];
        for &n in &[1u32, 10, 100, 1000] {
            for &q in &axis {
                for &f in &axis {
                    let base = config(n, q, 0.0, f, 0.0, 1).analytic_challenge();
                    assert!(config(n * 2, q, 0.0, f, 0.0, 1).analytic_challenge() >= base);
                    assert!(config(n, (q + 0.01).min(1.0), 0.0, f, 0.0, 1).analytic_challenge() >= base);
                    assert!(config(n, q, 0.0, (f + 0.01).min(1.0), 0.0, 1).analytic_challenge() >= base);
                }
            }
        }
    }

    #[test]
    fn wilson_interval() {
        // Oracle: the closed form evaluated by hand for 8/10, z = 1.96.
        let i = wilson(8, 10);
        assert!((i.lo - 0.4902).abs() < 1e-3 && (i.hi - 0.9433).abs() < 1e-3, "{i:?}");
        assert!(wilson(0, 100).lo.abs() < 1e-12);
        assert!((wilson(100, 100).hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn honest_runs_pass_with_zero_error() {
        let group = Arc::new(Group::<u64>::toy());
        let c = config(12, 0.5, 1.0, 0.0, 0.0, 1);
        for i in 0..5 {
            let o = run_election(&c, &group, trial_seed(1, i));
            assert!(!o.detected, "{o:?}");
            assert!(o.verifier_passed);
            assert_eq!(o.tally_error, 0);
            assert_eq!(o.reported, o.truth);
            assert_eq!(o.receipt_checks, 12);
        }
    }

    #[test]
    fn always_cheating_always_challenged_is_caught() {
        let group = Arc::new(Group::<u64>::toy());
        let o = run_election(&config(5, 1.0, 0.0, 1.0, 0.0, 1), &group, trial_seed(2, 0));
        // The published challenges fail the verifier's opening check too.
        assert_eq!(o.channels, vec![Channel::ChallengeMismatch, Channel::VerifierFail]);
        assert_eq!(o.challenges, 5);
        assert_eq!(o.shifted, 5);
    }

    #[test]
    fn always_dropping_is_caught_by_receipts_and_the_verifier_stays_quiet() {
        let group = Arc::new(Group::<u64>::toy());
        let o = run_election(&config(4, 0.0, 1.0, 0.0, 1.0, 1), &group, trial_seed(3, 0));
        assert_eq!(o.channels, vec![Channel::ReceiptMissing]);
        assert_eq!((o.dropped, o.tally_error), (4, 4));
        assert_eq!(o.reported, vec![0, 0, 0]);
    }

    #[test]
    fn misbehaviour_is_conserved_in_the_tally_error() {
        // Undetected trials: every shifted or dropped ballot shows up in the
        // published counts as a vote moved away from the truth.
        let c = config(8, 0.0, 0.0, 0.4, 0.2, 30);
        let outcomes = run_trials(&c).unwrap();
        assert!(outcomes.iter().any(|o| o.tally_error > 0));
        for o in &outcomes {
            assert!(!o.detected);
            let lost: u64 = o.truth.iter().zip(&o.reported).map(|(t, r)| t.saturating_sub(*r)).sum();
            let gained: u64 = o.reported.iter().zip(&o.truth).map(|(r, t)| r.saturating_sub(*t)).sum();
            assert!(lost <= o.tally_error && gained <= o.shifted);
            assert_eq!(lost - gained, o.dropped);
        }
    }

    #[test]
    fn runs_reproduce_byte_for_byte() {
        let c = config(6, 0.3, 0.3, 0.3, 0.3, 8);
        let a = outcomes_json(&run_trials(&c).unwrap());
        assert_eq!(a, outcomes_json(&run_trials(&c).unwrap()));
        let other = SimConfig { seed: 43, ..c };
        assert_ne!(a, outcomes_json(&run_trials(&other).unwrap()));
    }

    #[test]
    fn no_challenges_means_no_challenge_detection() {
        let e = estimate_detection(&config(10, 0.0, 0.0, 1.0, 0.0, 100)).unwrap();
        assert_eq!(e.challenge.empirical, 0.0);
        let e = estimate_detection(&config(10, 1.0, 0.0, 0.0, 0.0, 100)).unwrap();
        assert_eq!((e.challenge.empirical, e.any), (0.0, 0.0));
    }

    #[test]
    fn empirical_rate_fits_the_model() {
        let c = config(10, 0.3, 0.5, 0.2, 0.1, 400);
        let e = estimate_detection(&c).unwrap();
        for r in [&e.challenge, &e.receipt] {
            let p = r.analytic;
            assert!(r.deviation <= 3.0 * (p * (1.0 - p) / 400.0).sqrt(), "{r:?}");
            assert!(r.interval.lo <= r.empirical && r.empirical <= r.interval.hi);
        }
    }

    #[test]
    fn validation_and_csv() {
        assert_eq!(
            config(0, 0.1, 0.0, 0.0, 0.0, 1).validate(),
            Err(SimError::TooSmall("n_voters", 1))
        );
        assert_eq!(
            config(1, 1.5, 0.0, 0.0, 0.0, 1).validate(),
            Err(SimError::Probability("q", 1.5))
        );
        assert_eq!(
            estimate_detection(&config(1, 0.1, 0.0, 0.0, 0.0, 99)),
            Err(SimError::TooSmall("trials", 100))
        );
        let grid = SweepConfig {
            n_voters: vec![3],
            q: vec![0.0, 0.5],
            rho: vec![0.0],
            f: vec![0.5],
            d: vec![0.0],
            candidates: 2,
            trials: 100,
            seed: 1,
        };
        let rows = sweep(&grid).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].empirical_challenge, 0.0);
        let mut out = Vec::new();
        write_csv(&rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with(
            "N,q,rho,f,d,trials,analytic_challenge,empirical_challenge,analytic_receipt,empirical_receipt\n3,0.0,0.0,0.5,0.0,100,0.0,0.0,0.0,0.0\n"
        ));
        assert_eq!(sweep(&SweepConfig { q: vec![], ..grid }), Err(SimError::EmptyGrid));
    }
}
