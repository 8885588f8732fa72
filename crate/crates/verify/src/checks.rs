//! The eleven checks, in report order.

use std::collections::HashMap;

use e2ev_format::doc::{
    BallotDoc, BitProofDoc, ChallengeDoc, ChaumPedersenDoc, CiphertextDoc, CloseDoc, EntryLine, ManifestDoc,
    ReceiptDoc, SignatureDoc, TallyDoc,
};
use e2ev_format::hexfmt::{decode_digest, decode_fixed, encode};
use e2ev_format::layout::{ballot_hash, close_message, entry_hash, manifest_hash, receipt_message};
use e2ev_format::report::{self as rep, phrase, ReportBuilder, ReportDoc};
use e2ev_format::{tags, EntryKind, BALLOT_NONCE_LEN, HASH_ALG, RETURN_CODE_LEN};
use num_bigint::BigUint;
use num_traits::One;

use crate::group::{Bad, Group};

struct Line<'a> {
    entry: EntryLine<'a>,
    kind: Option<EntryKind>,
}

impl Line<'_> {
    fn is(&self, kind: EntryKind) -> bool {
        self.kind == Some(kind)
    }

    fn payload(&self) -> &[u8] {
        self.entry.payload_bytes()
    }

    /// The ballot document of a CastBallot or ChallengedBallot line.
    fn ballot(&self) -> Option<Result<BallotDoc, &'static str>> {
        match self.kind? {
            EntryKind::CastBallot => Some(serde_json::from_slice(self.payload()).map_err(|_| "BallotDoc")),
            EntryKind::ChallengedBallot => Some(
                serde_json::from_slice::<ChallengeDoc>(self.payload())
                    .map(|c| c.ballot)
                    .map_err(|_| "ChallengeDoc"),
            ),
            _ => None,
        }
    }
}

struct Manifest {
    group: Group,
    hash: [u8; 32],
    candidates: usize,
    election_pk: BigUint,
    trustee_pks: Vec<BigUint>,
    device_pk: BigUint,
    authority_pk: BigUint,
}

type Ct = (BigUint, BigUint);

/// A failed ballot check: `(field, expected, found)`.
type Miss = (String, String, String);

fn miss(field: impl Into<String>, expected: impl Into<String>, found: impl Into<String>) -> Miss {
    (field.into(), expected.into(), found.into())
}

fn bad_encoding(field: impl Into<String>) -> Miss {
    miss(field, phrase::CANONICAL_HEX, phrase::INVALID_ENCODING)
}

fn evidence(b: Bad) -> (&'static str, &'static str) {
    match b {
        Bad::Encoding => (phrase::CANONICAL_HEX, phrase::INVALID_ENCODING),
        Bad::Value => (phrase::SUBGROUP_ELEMENT, phrase::NOT_A_MEMBER),
    }
}

fn lines_of(board: &[u8]) -> Vec<(usize, &[u8])> {
    let body = board.strip_suffix(b"\n").unwrap_or(board);
    if body.is_empty() {
        return Vec::new();
    }
    let mut offset = 0;
    body.split(|&b| b == b'\n')
        .map(|l| {
            let at = offset;
            offset += l.len() + 1;
            (at, l)
        })
        .collect()
}

pub fn run(manifest_file: &[u8], board: &[u8], receipt: Option<&[u8]>) -> ReportDoc {
    let mut rb = ReportBuilder::new();
    if serde_json::from_slice::<ManifestDoc>(manifest_file).is_err() {
        rb.fail(rep::DECODE, 0, "manifest_file", "ManifestDoc", phrase::UNDECODABLE);
    }
    let mut lines = Vec::new();
    for (i, (offset, raw)) in lines_of(board).into_iter().enumerate() {
        match EntryLine::parse(raw) {
            Ok(entry) => lines.push(Line {
                kind: entry.kind.parse().ok(),
                entry,
            }),
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
        rep::CHECK_ORDER[1..].iter().for_each(|c| rb.skip(c));
        return rb.finish();
    }

    let count = |k| lines.iter().filter(|l: &&Line| l.is(k)).count() as u64;
    rb.metadata.entries = lines.len() as u64;
    rb.metadata.cast = count(EntryKind::CastBallot);
    rb.metadata.challenged = count(EntryKind::ChallengedBallot);

    let mut run = Run { rb, lines: &lines };
    run.chain();
    let manifest = run.manifest(manifest_file);
    run.close(manifest.as_ref());
    match &manifest {
        Some(m) => {
            let passed = run.ballots(m);
            run.duplicates();
            run.openings(m, &passed);
            if !run.tally(m) {
                [rep::DECRYPTION_PROOF, rep::COUNT_MISMATCH, rep::TOTAL_MISMATCH]
                    .iter()
                    .for_each(|c| run.rb.skip(c));
            }
            if let Some(bytes) = receipt {
                run.receipt(m, bytes);
            }
        }
        None => {
            run.rb.skip(rep::BALLOT);
            run.duplicates();
            for c in [
                rep::OPENING,
                rep::AGGREGATE,
                rep::DECRYPTION_PROOF,
                rep::COUNT_MISMATCH,
                rep::TOTAL_MISMATCH,
            ] {
                run.rb.skip(c);
            }
        }
    }
    run.rb.finish()
}

struct Run<'l, 'a> {
    rb: ReportBuilder,
    lines: &'l [Line<'a>],
}

impl Run<'_, '_> {
    fn n(&self) -> u64 {
        self.lines.len() as u64
    }

    fn first(&self, kind: EntryKind) -> Option<usize> {
        self.lines.iter().position(|l| l.is(kind))
    }

    fn chain(&mut self) {
        const C: &str = rep::CHAIN;
        if self.lines.is_empty() {
            self.rb.fail(C, 0, "kind", "Manifest", phrase::MISSING);
            return;
        }
        let close = self.first(EntryKind::Close);
        let genesis = encode(&[0u8; 32]);
        for (i, line) in self.lines.iter().enumerate() {
            let seq = i as u64;
            let e = &line.entry;
            if e.seq != seq {
                self.rb.fail(C, seq, "seq", seq.to_string(), e.seq.to_string());
            }
            let want_prev = match i {
                0 => genesis.as_str(),
                _ => self.lines[i - 1].entry.entry_hash.as_str(),
            };
            let linked = e.prev_hash == want_prev;
            if !linked {
                self.rb.fail(C, seq, "prev_hash", want_prev, e.prev_hash.as_str());
            }
            match line.kind {
                None => self.rb.fail(C, seq, "kind", phrase::KNOWN_KIND, e.kind.as_str()),
                Some(k) if i == 0 && k != EntryKind::Manifest => self.rb.fail(C, 0, "kind", "Manifest", k.name()),
                Some(EntryKind::Manifest) if i > 0 => self.rb.fail(C, seq, "kind", phrase::NOT_MANIFEST, "Manifest"),
                _ => {}
            }
            if let (true, Some(k)) = (linked, line.kind) {
                if let Ok(prev) = decode_digest(&e.prev_hash) {
                    let h = encode(&entry_hash(&prev, e.seq, k, e.payload_bytes()));
                    if h != e.entry_hash {
                        self.rb.fail(C, seq, "entry_hash", h, e.entry_hash.as_str());
                    }
                }
            }
            if close.is_some_and(|c| i > c) {
                self.rb
                    .fail(C, seq, "kind", phrase::NOTHING_AFTER_CLOSE, e.kind.as_str());
            }
        }
    }

    fn manifest(&mut self, file: &[u8]) -> Option<Manifest> {
        const M: &str = rep::MANIFEST;
        let Some(line) = self.lines.first().filter(|l| l.is(EntryKind::Manifest)) else {
            self.rb.fail(M, 0, "payload", "ManifestDoc", phrase::MISSING);
            return None;
        };
        let payload = line.payload();
        let Ok(doc) = serde_json::from_slice::<ManifestDoc>(payload) else {
            self.rb.fail(M, 0, "payload", "ManifestDoc", phrase::UNDECODABLE);
            return None;
        };
        let file = file.strip_suffix(b"\n").unwrap_or(file);
        if file != payload {
            let k = (0..file.len().min(payload.len()))
                .find(|&k| file[k] != payload[k])
                .unwrap_or(file.len().min(payload.len()));
            self.rb.fail(
                M,
                0,
                "manifest_file",
                phrase::IDENTICAL_TO_ENTRY_0,
                phrase::differs_at(k),
            );
        }
        let failures_before = self.rb.failure_count(M);

        if doc.hash_alg != HASH_ALG {
            self.rb.fail(M, 0, "hash_alg", HASH_ALG, doc.hash_alg.as_str());
        }
        let Some(group) = Group::from_doc(&doc.group) else {
            self.rb.fail(M, 0, "group", phrase::VALID_GROUP, phrase::INVALID_GROUP);
            return None;
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

        let mut fields = vec![("election_pk".to_owned(), &doc.election_pk)];
        fields.extend(
            doc.trustee_pks
                .iter()
                .enumerate()
                .map(|(j, s)| (format!("trustee_pks[{j}]"), s)),
        );
        fields.push(("device_pk".to_owned(), &doc.device_pk));
        fields.push(("authority_pk".to_owned(), &doc.authority_pk));
        let mut keys = Vec::with_capacity(fields.len());
        let mut all_keys = true;
        let mut all_hex = true;
        for (field, s) in fields {
            match group.member(s) {
                Ok(k) => keys.push(k),
                Err(b) => {
                    let (exp, found) = evidence(b);
                    self.rb.fail(M, 0, field, exp, found);
                    all_keys = false;
                    all_hex &= b != Bad::Encoding;
                }
            }
        }
        if all_keys && !doc.trustee_pks.is_empty() {
            let trustees = &keys[1..keys.len() - 2];
            let product = trustees.iter().fold(BigUint::one(), |acc, k| group.mul(&acc, k));
            if product != keys[0] {
                self.rb
                    .fail(M, 0, "election_pk", group.hex(&product), doc.election_pk.as_str());
            }
        }
        let mut hash = [0u8; 32];
        if all_hex {
            if let Ok(h) = manifest_hash(&doc, group.width) {
                if encode(&h) != doc.manifest_hash {
                    self.rb
                        .fail(M, 0, "manifest_hash", encode(&h), doc.manifest_hash.as_str());
                }
                hash = h;
            }
        }
        if self.rb.failure_count(M) != failures_before {
            return None;
        }
        let authority_pk = keys.pop().expect("all keys decoded");
        let device_pk = keys.pop().expect("all keys decoded");
        let election_pk = keys.remove(0);
        Some(Manifest {
            group,
            hash,
            candidates: doc.candidates.len(),
            election_pk,
            trustee_pks: keys,
            device_pk,
            authority_pk,
        })
    }

    fn close(&mut self, manifest: Option<&Manifest>) {
        const C: &str = rep::CLOSE;
        let n = self.n();
        let Some(c) = self.first(EntryKind::Close) else {
            self.rb.fail(C, n, "kind", "Close", phrase::MISSING);
            return;
        };
        let seq = c as u64;
        let line = &self.lines[c];
        let Ok(doc) = serde_json::from_slice::<CloseDoc>(line.payload()) else {
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
        let Some(m) = manifest else {
            self.rb.skip(C);
            return;
        };
        let valid = match (
            signature(&m.group, &doc.signature),
            decode_digest(&line.entry.prev_hash),
        ) {
            (Some(sig), Ok(prev)) => {
                self.rb.metadata.proofs_checked += 1;
                verify_signature(
                    &m.group,
                    &m.authority_pk,
                    &close_message(doc.entry_count, &prev, &code_key),
                    &sig,
                )
            }
            _ => false,
        };
        if !valid {
            self.rb
                .fail(C, seq, "signature", phrase::VALID_SIGNATURE, phrase::INVALID_SIGNATURE);
        }
    }

    /// Ciphertexts of every ballot line that passed, by line.
    fn ballots(&mut self, m: &Manifest) -> Vec<Option<Vec<Ct>>> {
        let mut passed = vec![None; self.lines.len()];
        for (i, line) in self.lines.iter().enumerate() {
            let Some(doc) = line.ballot() else { continue };
            let outcome = match doc {
                Ok(doc) => check_ballot(m, &doc, &mut self.rb.metadata.proofs_checked),
                Err(name) => Err(miss("payload", name, phrase::UNDECODABLE)),
            };
            match outcome {
                Ok(cts) => passed[i] = Some(cts),
                Err((field, exp, found)) => self.rb.fail(rep::BALLOT, i as u64, field, exp, found),
            }
        }
        passed
    }

    fn duplicates(&mut self) {
        let mut first_seen = HashMap::new();
        for (i, line) in self.lines.iter().enumerate() {
            let Some(Ok(doc)) = line.ballot() else { continue };
            if let Some(&k) = first_seen.get(&doc.ballot_hash) {
                self.rb.fail(
                    rep::DUPLICATE,
                    i as u64,
                    "ballot_hash",
                    phrase::UNIQUE,
                    phrase::duplicate_of(k),
                );
            } else {
                first_seen.insert(doc.ballot_hash, i as u64);
            }
        }
    }

    fn openings(&mut self, m: &Manifest, passed: &[Option<Vec<Ct>>]) {
        for (i, line) in self.lines.iter().enumerate() {
            let (true, Some(cts)) = (line.is(EntryKind::ChallengedBallot), &passed[i]) else {
                continue;
            };
            let rec: ChallengeDoc = serde_json::from_slice(line.payload()).expect("decoded by the ballot check");
            if let Err((field, exp, found)) = open(m, &rec, cts) {
                self.rb.fail(rep::OPENING, i as u64, field, exp, found);
            }
        }
    }

    /// False when checks 9 to 11 cannot run.
    fn tally(&mut self, m: &Manifest) -> bool {
        const A: &str = rep::AGGREGATE;
        let g = &m.group;
        let Some(t) = self.first(EntryKind::TallyArtifact) else {
            self.rb.fail(A, self.n(), "kind", "TallyArtifact", phrase::MISSING);
            return false;
        };
        let tseq = t as u64;
        for (i, line) in self.lines.iter().enumerate().skip(t + 1) {
            match line.kind {
                Some(EntryKind::TallyArtifact) => {
                    self.rb
                        .fail(A, i as u64, "kind", phrase::SINGLE_TALLY, phrase::DUPLICATE_TALLY)
                }
                Some(EntryKind::CastBallot | EntryKind::ChallengedBallot) => self.rb.fail(
                    A,
                    i as u64,
                    "kind",
                    phrase::NO_BALLOT_AFTER_TALLY,
                    line.entry.kind.as_str(),
                ),
                _ => {}
            }
        }
        let Ok(doc) = serde_json::from_slice::<TallyDoc>(self.lines[t].payload()) else {
            self.rb.fail(A, tseq, "payload", "TallyDoc", phrase::UNDECODABLE);
            return false;
        };
        if doc.candidates.len() != m.candidates {
            self.rb.fail(
                A,
                tseq,
                "candidates",
                m.candidates.to_string(),
                doc.candidates.len().to_string(),
            );
            return false;
        }

        let mut expected: Vec<Ct> = vec![(BigUint::one(), BigUint::one()); m.candidates];
        let mut cast = 0u64;
        for line in self.lines.iter().filter(|l| l.is(EntryKind::CastBallot)) {
            cast += 1;
            let Ok(b) = serde_json::from_slice::<BallotDoc>(line.payload()) else {
                continue;
            };
            if b.ciphertexts.len() != m.candidates {
                continue;
            }
            let Ok(cts) = b
                .ciphertexts
                .iter()
                .map(|c| residues(g, c))
                .collect::<Result<Vec<Ct>, Bad>>()
            else {
                continue;
            };
            for (e, c) in expected.iter_mut().zip(&cts) {
                *e = (g.mul(&e.0, &c.0), g.mul(&e.1, &c.1));
            }
        }

        let mut published = Vec::with_capacity(m.candidates);
        for (j, cand) in doc.candidates.iter().enumerate() {
            let field = format!("aggregate[{j}]");
            let Ok(ct) = residues(g, &cand.aggregate) else {
                self.rb
                    .fail(A, tseq, field, phrase::CANONICAL_HEX, phrase::INVALID_ENCODING);
                published.push(None);
                continue;
            };
            if ct != expected[j] {
                let exp = phrase::pair(&g.hex(&expected[j].0), &g.hex(&expected[j].1));
                self.rb
                    .fail(A, tseq, field, exp, phrase::pair(&cand.aggregate.a, &cand.aggregate.b));
            }
            published.push(Some(ct));
        }

        let trustees = m.trustee_pks.len();
        let mut counts = Vec::with_capacity(m.candidates);
        for (j, (cand, ct)) in doc.candidates.iter().zip(&published).enumerate() {
            let Some(ct) = ct else {
                counts.push(None);
                continue;
            };
            if cand.shares.len() != trustees {
                self.rb.fail(
                    rep::DECRYPTION_PROOF,
                    tseq,
                    format!("shares[{j}]"),
                    trustees.to_string(),
                    cand.shares.len().to_string(),
                );
                counts.push(None);
                continue;
            }
            let mut combined = BigUint::one();
            let mut good = 0;
            for (k, share) in cand.shares.iter().enumerate() {
                let field = format!("decryption[{j}][{k}]");
                if share.trustee as usize != k {
                    let found = phrase::trustee(share.trustee.into());
                    self.rb
                        .fail(rep::DECRYPTION_PROOF, tseq, field, phrase::trustee(k as u64), found);
                    continue;
                }
                let partial = match g.member(&share.partial) {
                    Ok(x) => x,
                    Err(b) => {
                        let (exp, found) = evidence(b);
                        self.rb.fail(rep::DECRYPTION_PROOF, tseq, field, exp, found);
                        continue;
                    }
                };
                let Some(proof) = chaum_pedersen(g, &share.proof) else {
                    self.rb.fail(
                        rep::DECRYPTION_PROOF,
                        tseq,
                        field,
                        phrase::CANONICAL_HEX,
                        phrase::INVALID_ENCODING,
                    );
                    continue;
                };
                self.rb.metadata.proofs_checked += 1;
                if !verify_decryption(m, j as u32, k as u32, ct, &partial, &proof) {
                    self.rb.fail(
                        rep::DECRYPTION_PROOF,
                        tseq,
                        field,
                        phrase::VALID_PROOF,
                        phrase::INVALID_PROOF,
                    );
                    continue;
                }
                combined = g.mul(&combined, &partial);
                good += 1;
            }
            if good != trustees {
                counts.push(None);
                continue;
            }
            let plain = g.mul(&ct.1, &g.inv(&combined));
            let field = format!("count[{j}]");
            let m_j = g.dlog(&plain, cast);
            match m_j {
                Some(v) if v != cand.count => {
                    self.rb
                        .fail(rep::COUNT_MISMATCH, tseq, field, v.to_string(), cand.count.to_string())
                }
                Some(_) => {}
                None => self.rb.fail(
                    rep::COUNT_MISMATCH,
                    tseq,
                    field,
                    phrase::no_exponent(cast),
                    cand.count.to_string(),
                ),
            }
            counts.push(m_j);
        }
        if let Some(all) = counts.into_iter().collect::<Option<Vec<u64>>>() {
            self.rb.counts = all;
        }

        if doc.total_cast != cast {
            self.rb.fail(
                rep::TOTAL_MISMATCH,
                tseq,
                "total_cast",
                cast.to_string(),
                doc.total_cast.to_string(),
            );
        }
        let sum: u128 = doc.candidates.iter().map(|c| c.count as u128).sum();
        if sum != cast as u128 {
            self.rb.fail(
                rep::TOTAL_MISMATCH,
                tseq,
                "sum(count)",
                cast.to_string(),
                sum.to_string(),
            );
        }
        true
    }

    fn receipt(&mut self, m: &Manifest, bytes: &[u8]) {
        let g = &m.group;
        let parsed = serde_json::from_slice::<ReceiptDoc>(bytes).ok().and_then(|d| {
            let hash = decode_digest(&d.ballot_hash).ok()?;
            let sig = signature(g, &d.signature)?;
            let code_ok =
                d.return_code.len() == RETURN_CODE_LEN && d.return_code.bytes().all(|b| b.is_ascii_uppercase());
            code_ok.then_some((d, hash, sig))
        });
        let status = match parsed {
            None => rep::RECEIPT_SIGNATURE_INVALID,
            Some((doc, hash, sig)) => {
                self.rb.metadata.proofs_checked += 1;
                if !verify_signature(g, &m.device_pk, &receipt_message(&hash, &doc.return_code), &sig) {
                    rep::RECEIPT_SIGNATURE_INVALID
                } else if self.lines.iter().any(|l| {
                    l.is(EntryKind::CastBallot)
                        && serde_json::from_slice::<BallotDoc>(l.payload())
                            .is_ok_and(|b| b.ballot_hash == doc.ballot_hash)
                }) {
                    rep::RECEIPT_INCLUDED
                } else {
                    rep::RECEIPT_MISSING
                }
            }
        };
        self.rb.receipt = Some(status.to_owned());
    }
}

fn residues(g: &Group, c: &CiphertextDoc) -> Result<Ct, Bad> {
    Ok((g.residue(&c.a)?, g.residue(&c.b)?))
}

struct Cp {
    a: BigUint,
    b: BigUint,
    c: BigUint,
    s: BigUint,
}

fn chaum_pedersen(g: &Group, d: &ChaumPedersenDoc) -> Option<Cp> {
    Some(Cp {
        a: g.residue(&d.a).ok()?,
        b: g.residue(&d.b).ok()?,
        c: g.scalar(&d.c).ok()?,
        s: g.scalar(&d.s).ok()?,
    })
}

fn signature(g: &Group, d: &SignatureDoc) -> Option<(BigUint, BigUint)> {
    Some((g.residue(&d.r).ok()?, g.scalar(&d.s).ok()?))
}

/// Schnorr: `g^s = r · X^c`, `c = H(X, r, msg)`.
fn verify_signature(g: &Group, x: &BigUint, msg: &[u8], (r, s): &(BigUint, BigUint)) -> bool {
    let c = g.challenge(tags::SIG, &[&g.bytes(x), &g.bytes(r), msg]);
    g.g_pow(s) == g.mul(r, &g.pow(x, &c))
}

fn verify_decryption(m: &Manifest, j: u32, k: u32, ct: &Ct, partial: &BigUint, p: &Cp) -> bool {
    let g = &m.group;
    let pk = &m.trustee_pks[k as usize];
    let c = g.challenge(
        tags::DEC,
        &[
            &m.hash,
            &j.to_be_bytes(),
            &k.to_be_bytes(),
            &g.bytes(pk),
            &g.bytes(&ct.0),
            &g.bytes(&ct.1),
            &g.bytes(partial),
            &g.bytes(&p.a),
            &g.bytes(&p.b),
        ],
    );
    c == p.c && g.g_pow(&p.s) == g.mul(&p.a, &g.pow(pk, &c)) && g.pow(&ct.0, &p.s) == g.mul(&p.b, &g.pow(partial, &c))
}

struct Bit {
    a0: BigUint,
    b0: BigUint,
    a1: BigUint,
    b1: BigUint,
    c0: BigUint,
    c1: BigUint,
    s0: BigUint,
    s1: BigUint,
}

fn bit_proof(g: &Group, d: &BitProofDoc, j: usize) -> Result<Bit, Miss> {
    let r = |name: &str, s: &str| {
        g.residue(s)
            .map_err(|_| bad_encoding(format!("bit_proofs[{j}].{name}")))
    };
    let sc = |name: &str, s: &str| g.scalar(s).map_err(|_| bad_encoding(format!("bit_proofs[{j}].{name}")));
    Ok(Bit {
        a0: r("a0", &d.a0)?,
        b0: r("b0", &d.b0)?,
        a1: r("a1", &d.a1)?,
        b1: r("b1", &d.b1)?,
        c0: sc("c0", &d.c0)?,
        c1: sc("c1", &d.c1)?,
        s0: sc("s0", &d.s0)?,
        s1: sc("s1", &d.s1)?,
    })
}

/// Checks one ballot and returns its ciphertexts.
fn check_ballot(m: &Manifest, doc: &BallotDoc, proofs: &mut u64) -> Result<Vec<Ct>, Miss> {
    let g = &m.group;
    let n = m.candidates;
    if doc.ciphertexts.len() != n {
        return Err(miss("ciphertexts", n.to_string(), doc.ciphertexts.len().to_string()));
    }
    if doc.bit_proofs.len() != n {
        return Err(miss("bit_proofs", n.to_string(), doc.bit_proofs.len().to_string()));
    }
    let nonce = decode_fixed(&doc.nonce, BALLOT_NONCE_LEN).map_err(|_| bad_encoding("nonce"))?;
    let mut cts = Vec::with_capacity(n);
    for (j, c) in doc.ciphertexts.iter().enumerate() {
        let a = g
            .residue(&c.a)
            .map_err(|_| bad_encoding(format!("ciphertexts[{j}].a")))?;
        let b = g
            .residue(&c.b)
            .map_err(|_| bad_encoding(format!("ciphertexts[{j}].b")))?;
        cts.push((a, b));
    }
    let bits = doc
        .bit_proofs
        .iter()
        .enumerate()
        .map(|(j, d)| bit_proof(g, d, j))
        .collect::<Result<Vec<Bit>, Miss>>()?;
    let sp = &doc.sum_proof;
    let sum = Cp {
        a: g.residue(&sp.a).map_err(|_| bad_encoding("sum_proof.a"))?,
        b: g.residue(&sp.b).map_err(|_| bad_encoding("sum_proof.b"))?,
        c: g.scalar(&sp.c).map_err(|_| bad_encoding("sum_proof.c"))?,
        s: g.scalar(&sp.s).map_err(|_| bad_encoding("sum_proof.s"))?,
    };
    decode_digest(&doc.ballot_hash).map_err(|_| bad_encoding("ballot_hash"))?;
    let h = encode(&ballot_hash(doc, g.width).expect("every field decoded"));
    if h != doc.ballot_hash {
        return Err(miss("ballot_hash", h, doc.ballot_hash.as_str()));
    }

    let pk = &m.election_pk;
    let pk_bytes = g.bytes(pk);
    let mut total = (BigUint::one(), BigUint::one());
    for (j, ((a, b), p)) in cts.iter().zip(&bits).enumerate() {
        if !g.is_member(a) || !g.is_member(b) {
            return Err(miss(
                format!("ciphertext[{j}]"),
                phrase::SUBGROUP_ELEMENT,
                phrase::NOT_A_MEMBER,
            ));
        }
        let c = g.challenge(
            tags::BIT,
            &[
                &m.hash,
                &nonce,
                &(j as u32).to_be_bytes(),
                &pk_bytes,
                &g.bytes(a),
                &g.bytes(b),
                &g.bytes(&p.a0),
                &g.bytes(&p.b0),
                &g.bytes(&p.a1),
                &g.bytes(&p.b1),
            ],
        );
        *proofs += 1;
        let b1 = g.unshift(b);
        let ok = (&p.c0 + &p.c1) % &g.q == c
            && g.g_pow(&p.s0) == g.mul(&p.a0, &g.pow(a, &p.c0))
            && g.pow(pk, &p.s0) == g.mul(&p.b0, &g.pow(b, &p.c0))
            && g.g_pow(&p.s1) == g.mul(&p.a1, &g.pow(a, &p.c1))
            && g.pow(pk, &p.s1) == g.mul(&p.b1, &g.pow(&b1, &p.c1));
        if !ok {
            return Err(miss(
                format!("bit-proof[{j}]"),
                phrase::VALID_PROOF,
                phrase::INVALID_PROOF,
            ));
        }
        total = (g.mul(&total.0, a), g.mul(&total.1, b));
    }
    let c = g.challenge(
        tags::SUM,
        &[
            &m.hash,
            &nonce,
            &pk_bytes,
            &g.bytes(&total.0),
            &g.bytes(&total.1),
            &g.bytes(&sum.a),
            &g.bytes(&sum.b),
        ],
    );
    *proofs += 1;
    let ok = c == sum.c
        && g.g_pow(&sum.s) == g.mul(&sum.a, &g.pow(&total.0, &c))
        && g.pow(pk, &sum.s) == g.mul(&sum.b, &g.pow(&g.unshift(&total.1), &c));
    if !ok {
        return Err(miss("sum-proof", phrase::VALID_PROOF, phrase::INVALID_PROOF));
    }
    Ok(cts)
}

/// Re-encrypts the claimed selection with the published randomness.
fn open(m: &Manifest, rec: &ChallengeDoc, cts: &[Ct]) -> Result<(), Miss> {
    let g = &m.group;
    let n = m.candidates;
    if rec.claimed as usize >= n {
        return Err(miss("claimed", phrase::less_than(n), rec.claimed.to_string()));
    }
    if rec.randomness.len() != n {
        return Err(miss("randomness", n.to_string(), rec.randomness.len().to_string()));
    }
    let rnd = rec
        .randomness
        .iter()
        .enumerate()
        .map(|(j, s)| g.scalar(s).map_err(|_| bad_encoding(format!("randomness[{j}]"))))
        .collect::<Result<Vec<BigUint>, Miss>>()?;
    for (j, (r, (a, b))) in rnd.iter().zip(cts).enumerate() {
        let mut b_exp = g.pow(&m.election_pk, r);
        if j as u32 == rec.claimed {
            b_exp = g.mul(&g.g, &b_exp);
        }
        let a_exp = g.g_pow(r);
        if (&a_exp, &b_exp) != (a, b) {
            return Err(miss(
                format!("opening[{j}]"),
                phrase::pair(&g.hex(&a_exp), &g.hex(&b_exp)),
                phrase::pair(&g.hex(a), &g.hex(b)),
            ));
        }
    }
    Ok(())
}
