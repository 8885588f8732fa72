//! In-process election verifier.
//!
//! Implements the check sequence documented in [`e2ev_format::report`] on
//! top of this crate's arithmetic. The standalone `e2ev-verify` executable
//! implements the same sequence without this crate; the two must produce
//! byte-identical reports.

use std::sync::Arc;

use e2ev_format::doc::{BallotDoc, ChallengeDoc, CloseDoc, EntryLine, ManifestDoc, ReceiptDoc, TallyDoc};
use e2ev_format::hexfmt::{decode_digest, encode};
use e2ev_format::layout::{close_message, entry_hash, manifest_hash};
use e2ev_format::report::{self as rep, phrase, ReportBuilder, ReportDoc};
use e2ev_format::{EntryKind, HASH_ALG};

use crate::arith::GroupInt;
use crate::ballot::{decode_randomness, open_ballot, verify_ballot_counted, EncryptedBallot, Opening, PlainBallot};
use crate::board::Snapshot;
use crate::dlog::recover_exponent;
use crate::elgamal::{homomorphic_add, Ciphertext};
use crate::group::{combine_public_keys, DecodeError, Element, Group};
use crate::manifest::Manifest;
use crate::proofs::{self, ChaumPedersen, DecContext, Signature};
use crate::receipt::Receipt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReceiptStatus {
    Included,
    Missing,
    SignatureInvalid,
}

impl ReceiptStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ReceiptStatus::Included => rep::RECEIPT_INCLUDED,
            ReceiptStatus::Missing => rep::RECEIPT_MISSING,
            ReceiptStatus::SignatureInvalid => rep::RECEIPT_SIGNATURE_INVALID,
        }
    }
}

/// Checks a receipt's device signature, then looks its ballot up among the
/// cast ballots.
pub fn check_receipt<T: GroupInt>(receipt: &ReceiptDoc, snapshot: &Snapshot, manifest: &Manifest<T>) -> ReceiptStatus {
    let Ok(r) = Receipt::from_doc(manifest.group(), receipt) else {
        return ReceiptStatus::SignatureInvalid;
    };
    if !r.signature_valid(manifest.group(), manifest.device_pk()) {
        return ReceiptStatus::SignatureInvalid;
    }
    match snapshot.lookup(&r.ballot_hash) {
        crate::board::Lookup::Found {
            kind: EntryKind::CastBallot,
            ..
        } => ReceiptStatus::Included,
        _ => ReceiptStatus::Missing,
    }
}

fn encoding_or_membership(e: &DecodeError) -> (&'static str, &'static str) {
    match e {
        DecodeError::Encoding => (phrase::CANONICAL_HEX, phrase::INVALID_ENCODING),
        DecodeError::OutOfRange | DecodeError::NotAMember => (phrase::SUBGROUP_ELEMENT, phrase::NOT_A_MEMBER),
    }
}

struct Line<'a> {
    entry: EntryLine<'a>,
    kind: Option<EntryKind>,
}

impl Line<'_> {
    fn is(&self, kind: EntryKind) -> bool {
        self.kind == Some(kind)
    }

    fn is_ballot(&self) -> bool {
        self.kind.is_some_and(EntryKind::is_ballot)
    }
}

/// Splits a board file into its lines and their byte offsets.
fn split_board(board: &[u8]) -> Vec<(usize, &[u8])> {
    let body = board.strip_suffix(b"\n").unwrap_or(board);
    if body.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut start = 0;
    for piece in body.split(|&b| b == b'\n') {
        out.push((start, piece));
        start += piece.len() + 1;
    }
    out
}

/// Runs every check on a manifest file and a board file.
pub fn verify_election<T: GroupInt>(manifest_file: &[u8], board: &[u8], receipt: Option<&[u8]>) -> ReportDoc {
    let mut rb = ReportBuilder::new();

    let manifest_doc = serde_json::from_slice::<ManifestDoc>(manifest_file);
    if manifest_doc.is_err() {
        rb.fail(rep::DECODE, 0, "manifest_file", "ManifestDoc", phrase::UNDECODABLE);
    }
    let mut lines = Vec::new();
    for (i, (offset, raw)) in split_board(board).into_iter().enumerate() {
        match EntryLine::parse(raw) {
            Ok(entry) => {
                let kind = entry.kind.parse().ok();
                lines.push(Line { entry, kind });
            }
            Err(_) => rb.fail(
                rep::DECODE,
                i as u64,
                "line",
                phrase::ENTRY_LINE,
                phrase::undecodable_at(offset),
            ),
        }
    }
    if rb.any_failure() {
        for c in &rep::CHECK_ORDER[1..] {
            rb.skip(c);
        }
        return rb.finish();
    }

    let mut v = Verifier::<T> {
        rb,
        lines,
        manifest: None,
    };
    v.rb.metadata.entries = v.lines.len() as u64;
    v.rb.metadata.cast = v.lines.iter().filter(|l| l.is(EntryKind::CastBallot)).count() as u64;
    v.rb.metadata.challenged = v.lines.iter().filter(|l| l.is(EntryKind::ChallengedBallot)).count() as u64;

    v.chain();
    v.manifest(manifest_file);
    v.close();
    let ballots = v.ballots();
    v.duplicates();
    v.openings(&ballots);
    v.tally();
    if let Some(bytes) = receipt {
        v.receipt(bytes);
    }
    v.rb.finish()
}

struct Verifier<'a, T> {
    rb: ReportBuilder,
    lines: Vec<Line<'a>>,
    manifest: Option<Manifest<T>>,
}

impl<'a, T: GroupInt> Verifier<'a, T> {
    fn n(&self) -> u64 {
        self.lines.len() as u64
    }

    fn first(&self, kind: EntryKind) -> Option<usize> {
        self.lines.iter().position(|l| l.is(kind))
    }

    fn chain(&mut self) {
        if self.lines.is_empty() {
            self.rb
                .fail(rep::CHAIN, 0, "kind", EntryKind::Manifest.name(), phrase::MISSING);
            return;
        }
        let first_close = self.first(EntryKind::Close);
        let zeros = encode(&[0u8; 32]);
        for i in 0..self.lines.len() {
            let seq = i as u64;
            let e = &self.lines[i].entry;
            if e.seq != seq {
                self.rb.fail(rep::CHAIN, seq, "seq", seq.to_string(), e.seq.to_string());
            }
            let expected_prev = if i == 0 {
                zeros.as_str()
            } else {
                self.lines[i - 1].entry.entry_hash.as_str()
            };
            let prev_ok = e.prev_hash == expected_prev;
            if !prev_ok {
                self.rb
                    .fail(rep::CHAIN, seq, "prev_hash", expected_prev, e.prev_hash.as_str());
            }
            match self.lines[i].kind {
                None => self
                    .rb
                    .fail(rep::CHAIN, seq, "kind", phrase::KNOWN_KIND, e.kind.as_str()),
                Some(k) if i == 0 && k != EntryKind::Manifest => {
                    self.rb
                        .fail(rep::CHAIN, 0, "kind", EntryKind::Manifest.name(), k.name())
                }
                Some(EntryKind::Manifest) if i > 0 => self.rb.fail(
                    rep::CHAIN,
                    seq,
                    "kind",
                    phrase::NOT_MANIFEST,
                    EntryKind::Manifest.name(),
                ),
                Some(_) => {}
            }
            if let (true, Some(kind), Ok(prev)) = (prev_ok, self.lines[i].kind, decode_digest(&e.prev_hash)) {
                let h = encode(&entry_hash(&prev, e.seq, kind, e.payload_bytes()));
                if e.entry_hash != h {
                    self.rb.fail(rep::CHAIN, seq, "entry_hash", h, e.entry_hash.as_str());
                }
            }
            if first_close.is_some_and(|c| i > c) {
                self.rb
                    .fail(rep::CHAIN, seq, "kind", phrase::NOTHING_AFTER_CLOSE, e.kind.as_str());
            }
        }
    }

    fn manifest(&mut self, file: &[u8]) {
        const M: &str = rep::MANIFEST;
        let Some(line0) = self.lines.first().filter(|l| l.is(EntryKind::Manifest)) else {
            self.rb.fail(M, 0, "payload", "ManifestDoc", phrase::MISSING);
            return;
        };
        let payload = line0.entry.payload_bytes();
        let Ok(doc) = serde_json::from_slice::<ManifestDoc>(payload) else {
            self.rb.fail(M, 0, "payload", "ManifestDoc", phrase::UNDECODABLE);
            return;
        };
        let file = file.strip_suffix(b"\n").unwrap_or(file);
        if file != payload {
            let k = file
                .iter()
                .zip(payload)
                .position(|(a, b)| a != b)
                .unwrap_or(file.len().min(payload.len()));
            self.rb.fail(
                M,
                0,
                "manifest_file",
                phrase::IDENTICAL_TO_ENTRY_0,
                phrase::differs_at(k),
            );
        }
        let before = self.rb.failure_count(M);

        if doc.hash_alg != HASH_ALG {
            self.rb.fail(M, 0, "hash_alg", HASH_ALG, doc.hash_alg.as_str());
        }
        let Ok(group) = Group::<T>::from_doc(&doc.group) else {
            self.rb.fail(M, 0, "group", phrase::VALID_GROUP, phrase::INVALID_GROUP);
            return;
        };
        if doc.candidates.len() < 2 {
            self.rb.fail(
                M,
                0,
                "candidates",
                phrase::AT_LEAST_TWO,
                doc.candidates.len().to_string(),
            );
        }
        if doc.trustee_pks.is_empty() {
            self.rb.fail(M, 0, "trustee_pks", phrase::AT_LEAST_ONE, "0");
        }
        let mut keys_ok = true;
        let mut encodings_ok = true;
        let mut key = |rb: &mut ReportBuilder, field: String, s: &str| match group.decode_element(s) {
            Ok(e) => Some(e),
            Err(err) => {
                let (exp, found) = encoding_or_membership(&err);
                rb.fail(M, 0, field, exp, found);
                keys_ok = false;
                encodings_ok &= err != DecodeError::Encoding;
                None
            }
        };
        let election_pk = key(&mut self.rb, "election_pk".into(), &doc.election_pk);
        let trustees: Vec<Option<Element<T>>> = doc
            .trustee_pks
            .iter()
            .enumerate()
            .map(|(j, s)| key(&mut self.rb, format!("trustee_pks[{j}]"), s))
            .collect();
        key(&mut self.rb, "device_pk".into(), &doc.device_pk);
        key(&mut self.rb, "authority_pk".into(), &doc.authority_pk);
        if keys_ok && !trustees.is_empty() {
            let pks: Vec<Element<T>> = trustees.into_iter().flatten().collect();
            let product = combine_public_keys(&group, &pks);
            if Some(&product) != election_pk.as_ref() {
                self.rb.fail(
                    M,
                    0,
                    "election_pk",
                    group.hex(product.value()),
                    doc.election_pk.as_str(),
                );
            }
        }
        if encodings_ok {
            if let Ok(h) = manifest_hash(&doc, group.width()) {
                if encode(&h) != doc.manifest_hash {
                    self.rb
                        .fail(M, 0, "manifest_hash", encode(&h), doc.manifest_hash.as_str());
                }
            }
        }
        if self.rb.failure_count(M) == before {
            let m = Manifest::from_doc_in(doc, Arc::new(group)).expect("every manifest condition was checked above");
            self.manifest = Some(m);
        }
    }

    fn close(&mut self) {
        const C: &str = rep::CLOSE;
        let n = self.n();
        let Some(c) = self.first(EntryKind::Close) else {
            self.rb.fail(C, n, "kind", EntryKind::Close.name(), phrase::MISSING);
            return;
        };
        let seq = c as u64;
        let entry = &self.lines[c].entry;
        let Ok(doc) = serde_json::from_slice::<CloseDoc>(entry.payload_bytes()) else {
            self.rb.fail(C, seq, "payload", "CloseDoc", phrase::UNDECODABLE);
            return;
        };
        if doc.entry_count != n {
            self.rb
                .fail(C, seq, "entry_count", n.to_string(), doc.entry_count.to_string());
        }
        let Ok(code_key) = decode_digest(&doc.code_key) else {
            self.rb
                .fail(C, seq, "code_key", phrase::CANONICAL_HEX, phrase::INVALID_ENCODING);
            return;
        };
        let Some(m) = &self.manifest else {
            self.rb.skip(C);
            return;
        };
        let group = m.group();
        let valid = match (
            Signature::from_doc(group, &doc.signature),
            decode_digest(&entry.prev_hash),
        ) {
            (Ok(sig), Ok(prev)) => {
                self.rb.metadata.proofs_checked += 1;
                let msg = close_message(doc.entry_count, &prev, &code_key);
                proofs::verify_signature(group, m.authority_pk(), &msg, &sig)
            }
            _ => false,
        };
        if !valid {
            self.rb
                .fail(C, seq, "signature", phrase::VALID_SIGNATURE, phrase::INVALID_SIGNATURE);
        }
    }

    /// Ballots that passed, by line.
    fn ballots(&mut self) -> Vec<Option<EncryptedBallot<T>>> {
        let mut out: Vec<Option<EncryptedBallot<T>>> = (0..self.lines.len()).map(|_| None).collect();
        let Some(m) = &self.manifest else {
            self.rb.skip(rep::BALLOT);
            return out;
        };
        for (i, line) in self.lines.iter().enumerate() {
            let seq = i as u64;
            let doc = match line.kind {
                Some(EntryKind::CastBallot) => {
                    serde_json::from_slice::<BallotDoc>(line.entry.payload_bytes()).map_err(|_| "BallotDoc")
                }
                Some(EntryKind::ChallengedBallot) => serde_json::from_slice::<ChallengeDoc>(line.entry.payload_bytes())
                    .map(|c| c.ballot)
                    .map_err(|_| "ChallengeDoc"),
                _ => continue,
            };
            let doc = match doc {
                Ok(d) => d,
                Err(name) => {
                    self.rb.fail(rep::BALLOT, seq, "payload", name, phrase::UNDECODABLE);
                    continue;
                }
            };
            match verify_ballot_counted(m, &doc, &mut self.rb.metadata.proofs_checked) {
                Ok(b) => out[i] = Some(b),
                Err(r) => self.rb.fail(rep::BALLOT, seq, r.field, r.expected, r.found),
            }
        }
        out
    }

    fn duplicates(&mut self) {
        let mut seen: std::collections::HashMap<String, u64> = std::collections::HashMap::new();
        for (i, line) in self.lines.iter().enumerate() {
            let hash = match line.kind {
                Some(EntryKind::CastBallot) => serde_json::from_slice::<BallotDoc>(line.entry.payload_bytes())
                    .ok()
                    .map(|d| d.ballot_hash),
                Some(EntryKind::ChallengedBallot) => serde_json::from_slice::<ChallengeDoc>(line.entry.payload_bytes())
                    .ok()
                    .map(|d| d.ballot.ballot_hash),
                _ => None,
            };
            let Some(hash) = hash else { continue };
            match seen.get(&hash) {
                Some(&k) => self.rb.fail(
                    rep::DUPLICATE,
                    i as u64,
                    "ballot_hash",
                    phrase::UNIQUE,
                    phrase::duplicate_of(k),
                ),
                None => {
                    seen.insert(hash, i as u64);
                }
            }
        }
    }

    fn openings(&mut self, ballots: &[Option<EncryptedBallot<T>>]) {
        let Some(m) = &self.manifest else {
            self.rb.skip(rep::OPENING);
            return;
        };
        let n_cand = m.n_candidates();
        for (i, line) in self.lines.iter().enumerate() {
            let (true, Some(ballot)) = (line.is(EntryKind::ChallengedBallot), &ballots[i]) else {
                continue;
            };
            let seq = i as u64;
            let rec: ChallengeDoc =
                serde_json::from_slice(line.entry.payload_bytes()).expect("parsed by the ballot check");
            if rec.claimed as usize >= n_cand {
                self.rb.fail(
                    rep::OPENING,
                    seq,
                    "claimed",
                    phrase::less_than(n_cand),
                    rec.claimed.to_string(),
                );
                continue;
            }
            if rec.randomness.len() != n_cand {
                self.rb.fail(
                    rep::OPENING,
                    seq,
                    "randomness",
                    n_cand.to_string(),
                    rec.randomness.len().to_string(),
                );
                continue;
            }
            let rnd = match decode_randomness(m.group(), &rec.randomness) {
                Ok(r) => r,
                Err(r) => {
                    self.rb.fail(rep::OPENING, seq, r.field, r.expected, r.found);
                    continue;
                }
            };
            if let Opening::Inconsistent(r) = open_ballot(m, ballot, &rnd, PlainBallot { selection: rec.claimed }) {
                self.rb.fail(rep::OPENING, seq, r.field, r.expected, r.found);
            }
        }
    }

    fn tally(&mut self) {
        let later = [rep::DECRYPTION_PROOF, rep::COUNT_MISMATCH, rep::TOTAL_MISMATCH];
        let Some(m) = self.manifest.take() else {
            self.rb.skip(rep::AGGREGATE);
            for c in later {
                self.rb.skip(c);
            }
            return;
        };
        if !self.tally_with(&m) {
            for c in later {
                self.rb.skip(c);
            }
        }
        self.manifest = Some(m);
    }

    /// Returns false when the tally artifact is unusable for checks 9 to 11.
    fn tally_with(&mut self, m: &Manifest<T>) -> bool {
        const A: &str = rep::AGGREGATE;
        let group = m.group();
        let n_cand = m.n_candidates();
        let Some(t) = self.first(EntryKind::TallyArtifact) else {
            self.rb
                .fail(A, self.n(), "kind", EntryKind::TallyArtifact.name(), phrase::MISSING);
            return false;
        };
        let tseq = t as u64;
        for (i, line) in self.lines.iter().enumerate().skip(t + 1) {
            if line.is(EntryKind::TallyArtifact) {
                self.rb
                    .fail(A, i as u64, "kind", phrase::SINGLE_TALLY, phrase::DUPLICATE_TALLY);
            } else if line.is_ballot() {
                self.rb.fail(
                    A,
                    i as u64,
                    "kind",
                    phrase::NO_BALLOT_AFTER_TALLY,
                    line.entry.kind.as_str(),
                );
            }
        }
        let Ok(doc) = serde_json::from_slice::<TallyDoc>(self.lines[t].entry.payload_bytes()) else {
            self.rb.fail(A, tseq, "payload", "TallyDoc", phrase::UNDECODABLE);
            return false;
        };
        if doc.candidates.len() != n_cand {
            self.rb.fail(
                A,
                tseq,
                "candidates",
                n_cand.to_string(),
                doc.candidates.len().to_string(),
            );
            return false;
        }

        let mut expected = vec![Ciphertext::zero(group); n_cand];
        let mut k_cast = 0u64;
        for line in &self.lines {
            if !line.is(EntryKind::CastBallot) {
                continue;
            }
            k_cast += 1;
            let Ok(b) = serde_json::from_slice::<BallotDoc>(line.entry.payload_bytes()) else {
                continue;
            };
            if b.ciphertexts.len() != n_cand {
                continue;
            }
            let cts: Result<Vec<Ciphertext<T>>, DecodeError> = b
                .ciphertexts
                .iter()
                .map(|c| {
                    Ok(Ciphertext {
                        a: group.decode_residue(&c.a)?,
                        b: group.decode_residue(&c.b)?,
                    })
                })
                .collect();
            if let Ok(cts) = cts {
                for (e, c) in expected.iter_mut().zip(&cts) {
                    *e = homomorphic_add(group, e, c);
                }
            }
        }

        let mut published = Vec::with_capacity(n_cand);
        for (j, cand) in doc.candidates.iter().enumerate() {
            let field = format!("aggregate[{j}]");
            let ct = match (
                group.decode_residue(&cand.aggregate.a),
                group.decode_residue(&cand.aggregate.b),
            ) {
                (Ok(a), Ok(b)) => Ciphertext { a, b },
                _ => {
                    self.rb
                        .fail(A, tseq, field, phrase::CANONICAL_HEX, phrase::INVALID_ENCODING);
                    published.push(None);
                    continue;
                }
            };
            if ct != expected[j] {
                let exp = phrase::pair(&group.hex(expected[j].a.value()), &group.hex(expected[j].b.value()));
                self.rb
                    .fail(A, tseq, field, exp, phrase::pair(&cand.aggregate.a, &cand.aggregate.b));
            }
            published.push(Some(ct));
        }

        let n_trustees = m.trustee_pks().len();
        let mut recovered = Vec::with_capacity(n_cand);
        for (j, (cand, ct)) in doc.candidates.iter().zip(&published).enumerate() {
            let Some(ct) = ct else {
                recovered.push(None);
                continue;
            };
            if cand.shares.len() != n_trustees {
                self.rb.fail(
                    rep::DECRYPTION_PROOF,
                    tseq,
                    format!("shares[{j}]"),
                    n_trustees.to_string(),
                    cand.shares.len().to_string(),
                );
                recovered.push(None);
                continue;
            }
            let mut partials = Vec::with_capacity(n_trustees);
            for (k, share) in cand.shares.iter().enumerate() {
                let field = format!("decryption[{j}][{k}]");
                if share.trustee as usize != k {
                    self.rb.fail(
                        rep::DECRYPTION_PROOF,
                        tseq,
                        field,
                        phrase::trustee(k as u64),
                        phrase::trustee(share.trustee.into()),
                    );
                    continue;
                }
                let partial = match group.decode_element(&share.partial) {
                    Ok(p) => p,
                    Err(err) => {
                        let (exp, found) = encoding_or_membership(&err);
                        self.rb.fail(rep::DECRYPTION_PROOF, tseq, field, exp, found);
                        continue;
                    }
                };
                let Ok(proof) = ChaumPedersen::from_doc(group, &share.proof) else {
                    self.rb.fail(
                        rep::DECRYPTION_PROOF,
                        tseq,
                        field,
                        phrase::CANONICAL_HEX,
                        phrase::INVALID_ENCODING,
                    );
                    continue;
                };
                let ctx = DecContext {
                    manifest_hash: m.hash(),
                    candidate: j as u32,
                    trustee: k as u32,
                };
                self.rb.metadata.proofs_checked += 1;
                if !proofs::verify_decryption_proof(group, &m.trustee_pks()[k], ct, &partial, &proof, &ctx) {
                    self.rb.fail(
                        rep::DECRYPTION_PROOF,
                        tseq,
                        field,
                        phrase::VALID_PROOF,
                        phrase::INVALID_PROOF,
                    );
                    continue;
                }
                partials.push(partial);
            }
            if partials.len() != n_trustees {
                recovered.push(None);
                continue;
            }
            let prod = partials.iter().fold(group.identity(), |acc, p| group.mul(&acc, p));
            let gm = group.mul(&ct.b, &group.inv(&prod));
            let field = format!("count[{j}]");
            match recover_exponent(group, &gm, k_cast) {
                Some(v) => {
                    if v != cand.count {
                        self.rb
                            .fail(rep::COUNT_MISMATCH, tseq, field, v.to_string(), cand.count.to_string());
                    }
                    recovered.push(Some(v));
                }
                None => {
                    self.rb.fail(
                        rep::COUNT_MISMATCH,
                        tseq,
                        field,
                        phrase::no_exponent(k_cast),
                        cand.count.to_string(),
                    );
                    recovered.push(None);
                }
            }
        }
        if recovered.iter().all(Option::is_some) {
            self.rb.counts = recovered.into_iter().flatten().collect();
        }

        if doc.total_cast != k_cast {
            self.rb.fail(
                rep::TOTAL_MISMATCH,
                tseq,
                "total_cast",
                k_cast.to_string(),
                doc.total_cast.to_string(),
            );
        }
        let sum: u128 = doc.candidates.iter().map(|c| u128::from(c.count)).sum();
        if sum != u128::from(k_cast) {
            self.rb.fail(
                rep::TOTAL_MISMATCH,
                tseq,
                "sum(count)",
                k_cast.to_string(),
                sum.to_string(),
            );
        }
        true
    }

    fn receipt(&mut self, bytes: &[u8]) {
        let Some(m) = &self.manifest else { return };
        let group = m.group();
        let status = match serde_json::from_slice::<ReceiptDoc>(bytes)
            .ok()
            .and_then(|d| Receipt::from_doc(group, &d).ok())
        {
            None => ReceiptStatus::SignatureInvalid,
            Some(r) => {
                self.rb.metadata.proofs_checked += 1;
                if !r.signature_valid(group, m.device_pk()) {
                    ReceiptStatus::SignatureInvalid
                } else {
                    let wanted = encode(&r.ballot_hash);
                    let found = self.lines.iter().any(|l| {
                        l.is(EntryKind::CastBallot)
                            && serde_json::from_slice::<BallotDoc>(l.entry.payload_bytes())
                                .is_ok_and(|d| d.ballot_hash == wanted)
                    });
                    if found {
                        ReceiptStatus::Included
                    } else {
                        ReceiptStatus::Missing
                    }
                }
            }
        };
        self.rb.receipt = Some(status.as_str().to_owned());
    }
}
