//! Verification report schema and the fixed check order.
//!
//! A conforming verifier runs the checks below and records every failure as
//! a locator `(check, seq, field, expected, found)`. Failures within a check
//! are listed in ascending line order, and within a line in the order given
//! here. `first_failure` is the first locator of the first failing check in
//! [`CHECK_ORDER`]; the verdict is `PASS` iff there are no failures. `seq`
//! is always the physical line index in the board file.
//!
//! Notation: `n` is the number of board lines, `C` the manifest's candidate
//! count, `T` its trustee count and `K` the number of lines whose kind is
//! `CastBallot`. "encoding" below means the pair
//! (`canonical hex`, `invalid encoding`) and "membership" the pair
//! (`subgroup element`, `not a member`). Elements are decoded at the group
//! width: keys, ciphertext components and partial decryptions must be
//! subgroup members; proof commitments and signature commitments need only be
//! below `p`; scalars must be below `q`. A value that is not fixed-width hex
//! is an encoding failure; a well-encoded value that is not a member is a
//! membership failure. `a:b` denotes a ciphertext as its two hex strings.
//!
//! 1. `decode`. The manifest file must parse as a `ManifestDoc`, else
//!    `(0, manifest_file, ManifestDoc, undecodable)`. The board, with one
//!    trailing `\n` removed, splits on `\n` (an empty board has no lines);
//!    each line must parse as an entry line, else
//!    `(i, line, entry line, undecodable at byte <offset of the line>)`.
//!    On any decode failure every other check is `skipped`, metadata is
//!    zero and the exit code is 2.
//! 2. `chain`, per line `i`: `(i, seq, i, seq)`; `(i, prev_hash, <64 zeros
//!    or line i-1's entry_hash string>, prev_hash)`; `(i, kind, known kind,
//!    kind)`, or for a known kind `(0, kind, Manifest, kind)` on line 0 and
//!    `(i, kind, not Manifest, Manifest)` elsewhere; when `prev_hash` matched
//!    and the kind is known, `(i, entry_hash, <recomputed>, entry_hash)`,
//!    recomputed from the line's own `seq`; and for every line after the
//!    first Close `(i, kind, no entry after Close, kind)`. An empty board
//!    gives `(0, kind, Manifest, missing)`.
//! 3. `close`, at the first Close line `c`: `(n, kind, Close, missing)` if
//!    there is none; `(c, payload, CloseDoc, undecodable)`;
//!    `(c, entry_count, n, entry_count)`; encoding of `code_key`; then
//!    `(c, signature, valid signature, invalid signature)` when the signature
//!    does not decode or does not verify under `authority_pk` over
//!    `close_message(entry_count, prev_hash of line c, code_key)`. The
//!    signature is only checked when `code_key` decoded and the manifest is
//!    usable; with an unusable manifest the check is otherwise `skipped`.
//! 4. `manifest`, all at seq 0: `(payload, ManifestDoc, missing)` when line
//!    0 is absent or not a Manifest, `(payload, ManifestDoc, undecodable)`
//!    when its payload does not parse; then `(manifest_file, identical to
//!    entry 0, differs at byte k)` comparing the file (one trailing `\n`
//!    removed) with the payload bytes. The entry-0 document is then checked
//!    in order: `hash_alg`; `(group, valid safe-prime group, invalid group)`,
//!    which ends the check; `(candidates, at least 2, <count>)`;
//!    `(trustee_pks, at least 1, 0)`; encoding or membership of
//!    `election_pk`, `trustee_pks[j]`, `device_pk`, `authority_pk`; when all
//!    keys decoded, `(election_pk, <product of trustee keys>, election_pk)`;
//!    when all fixed-width fields decoded,
//!    `(manifest_hash, <recomputed>, manifest_hash)`. The manifest is
//!    *usable* iff nothing but `manifest_file` failed. Checks 5, 7 to 11 are
//!    `skipped` when it is not.
//! 5. `ballot`, per CastBallot and ChallengedBallot line, first failure only:
//!    `(payload, BallotDoc|ChallengeDoc, undecodable)`;
//!    `(ciphertexts, C, count)`; `(bit_proofs, C, count)`; encoding of
//!    `nonce`, `ciphertexts[j].a`, `ciphertexts[j].b` (all j), then
//!    `bit_proofs[j].a0 … s1` in field order (all j), `sum_proof.a … s`,
//!    `ballot_hash`; `(ballot_hash, <recomputed>, ballot_hash)`; then per
//!    candidate `j` membership of both components as `ciphertext[j]`
//!    followed by `(bit-proof[j], valid proof, invalid proof)`; finally
//!    `(sum-proof, valid proof, invalid proof)`.
//! 6. `duplicate`: among ballot lines whose payload parses, a repeated
//!    `ballot_hash` string gives `(i, ballot_hash, unique, duplicate of seq
//!    k)` with `k` its first occurrence. Runs even without a usable manifest.
//! 7. `opening`, per ChallengedBallot line that passed check 5:
//!    `(claimed, less than C, claimed)`; `(randomness, C, count)`; encoding of
//!    `randomness[j]`; first `(opening[j], <re-encryption a:b>, <ballot a:b>)`.
//! 8. `aggregate`: `(n, kind, TallyArtifact, missing)` if there is no tally
//!    line. Otherwise with `t` the first tally line: every later tally line
//!    `u` gives `(u, kind, single TallyArtifact, duplicate)`; every ballot
//!    line after `t` gives `(i, kind, no ballot after TallyArtifact, kind)`;
//!    then `(t, payload, TallyDoc, undecodable)`; `(t, candidates, C,
//!    count)`; per candidate, encoding of `aggregate[j]` (as a pair of
//!    residues below p) or `(t, aggregate[j], <expected a:b>, <published
//!    a:b>)`. The expected aggregate is the product, over every CastBallot
//!    line whose payload parses with exactly `C` ciphertexts all of whose
//!    components are residues below `p`, of the `j`-th ciphertext; the empty
//!    product is `(1, 1)`. If the tally is missing or its payload or
//!    candidate count fails, checks 9 to 11 are `skipped`.
//! 9. `decryption-proof`, per candidate `j` with a decodable published
//!    aggregate: `(t, shares[j], T, count)`, else per share `k`, first
//!    failure only, with field `decryption[j][k]`: `(trustee k, trustee
//!    <index>)`; encoding or membership of `partial`; encoding of the proof;
//!    `(valid proof, invalid proof)` against the published aggregate.
//! 10. `count-mismatch`, per candidate whose shares all passed: the combined
//!     plaintext `g^m` is searched for `m` in `0..=K`;
//!     `(t, count[j], m, count)` or `(t, count[j], no exponent in 0..=K,
//!     count)`. The report's `counts` are the recovered values when every
//!     candidate yielded one, else empty.
//! 11. `total-mismatch`: `(t, total_cast, K, total_cast)` and
//!     `(t, sum(count), K, <sum of published counts>)`.
//!
//! `metadata.proofs_checked` counts every bit, sum and decryption proof and
//! every signature whose verification equations were evaluated. A receipt,
//! when given, is `Included` if its signature verifies under `device_pk`
//! over `receipt_message(ballot_hash, return_code)` and some CastBallot
//! line's payload carries that ballot hash, `Missing` if only the signature
//! verifies, and `SignatureInvalid` otherwise, including for a malformed
//! receipt (bad JSON, hash, signature encoding or a code that is not two
//! letters `A`–`Z`). It is not evaluated without a usable manifest and never
//! affects the verdict.

use serde::{Deserialize, Serialize};

pub const DECODE: &str = "decode";
pub const CHAIN: &str = "chain";
pub const CLOSE: &str = "close";
pub const MANIFEST: &str = "manifest";
pub const BALLOT: &str = "ballot";
pub const DUPLICATE: &str = "duplicate";
pub const OPENING: &str = "opening";
pub const AGGREGATE: &str = "aggregate";
pub const DECRYPTION_PROOF: &str = "decryption-proof";
pub const COUNT_MISMATCH: &str = "count-mismatch";
pub const TOTAL_MISMATCH: &str = "total-mismatch";

pub const CHECK_ORDER: [&str; 11] = [
    DECODE,
    CHAIN,
    CLOSE,
    MANIFEST,
    BALLOT,
    DUPLICATE,
    OPENING,
    AGGREGATE,
    DECRYPTION_PROOF,
    COUNT_MISMATCH,
    TOTAL_MISMATCH,
];

pub const PASS: &str = "PASS";
pub const FAIL: &str = "FAIL";

pub const STATUS_PASS: &str = "pass";
pub const STATUS_FAIL: &str = "fail";
pub const STATUS_SKIPPED: &str = "skipped";

/// Fixed phrases used in `expected` / `found` so independent verifiers emit
/// identical evidence.
pub mod phrase {
    pub const VALID_PROOF: &str = "valid proof";
    pub const INVALID_PROOF: &str = "invalid proof";
    pub const VALID_SIGNATURE: &str = "valid signature";
    pub const INVALID_SIGNATURE: &str = "invalid signature";
    pub const SUBGROUP_ELEMENT: &str = "subgroup element";
    pub const NOT_A_MEMBER: &str = "not a member";
    pub const CANONICAL_HEX: &str = "canonical hex";
    pub const INVALID_ENCODING: &str = "invalid encoding";
    pub const UNDECODABLE: &str = "undecodable";
    pub const MISSING: &str = "missing";
    pub const CONSISTENT: &str = "consistent";
    pub const INCONSISTENT: &str = "inconsistent";
    pub const UNIQUE: &str = "unique";
    pub const KNOWN_KIND: &str = "known kind";
    pub const NOT_MANIFEST: &str = "not Manifest";
    pub const NOTHING_AFTER_CLOSE: &str = "no entry after Close";
    pub const NO_BALLOT_AFTER_TALLY: &str = "no ballot after TallyArtifact";
    pub const SINGLE_TALLY: &str = "single TallyArtifact";
    pub const DUPLICATE_TALLY: &str = "duplicate";
    pub const VALID_GROUP: &str = "valid safe-prime group";
    pub const INVALID_GROUP: &str = "invalid group";
    pub const AT_LEAST_TWO: &str = "at least 2";
    pub const AT_LEAST_ONE: &str = "at least 1";
    pub const IDENTICAL_TO_ENTRY_0: &str = "identical to entry 0";
    pub const ENTRY_LINE: &str = "entry line";

    pub fn undecodable_at(offset: usize) -> String {
        format!("undecodable at byte {offset}")
    }

    pub fn differs_at(k: usize) -> String {
        format!("differs at byte {k}")
    }

    pub fn duplicate_of(seq: u64) -> String {
        format!("duplicate of seq {seq}")
    }

    pub fn less_than(n: usize) -> String {
        format!("less than {n}")
    }

    pub fn trustee(k: u64) -> String {
        format!("trustee {k}")
    }

    pub fn no_exponent(bound: u64) -> String {
        format!("no exponent in 0..={bound}")
    }

    /// A ciphertext written as `a:b`.
    pub fn pair(a: &str, b: &str) -> String {
        format!("{a}:{b}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureDoc {
    pub check: String,
    pub seq: u64,
    pub field: String,
    pub expected: String,
    pub found: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckDoc {
    pub name: String,
    pub status: String,
    pub failures: Vec<FailureDoc>,
}

/// Deterministic work counters. Wall-clock time is deliberately absent so
/// that identical inputs give byte-identical reports.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetadataDoc {
    pub entries: u64,
    pub cast: u64,
    pub challenged: u64,
    pub proofs_checked: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportDoc {
    pub verdict: String,
    pub first_failure: Option<FailureDoc>,
    pub checks: Vec<CheckDoc>,
    pub counts: Vec<u64>,
    pub receipt: Option<String>,
    pub metadata: MetadataDoc,
}

impl ReportDoc {
    pub fn passed(&self) -> bool {
        self.verdict == PASS
    }

    pub fn check(&self, name: &str) -> Option<&CheckDoc> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// 0 for PASS, 1 for FAIL, 2 when the inputs did not decode.
    pub fn exit_code(&self) -> i32 {
        if self.check(DECODE).is_some_and(|c| c.status == STATUS_FAIL) {
            2
        } else if self.passed() {
            0
        } else {
            1
        }
    }
}

/// Receipt statuses reported by `--receipt`.
pub const RECEIPT_INCLUDED: &str = "Included";
pub const RECEIPT_MISSING: &str = "Missing";
pub const RECEIPT_SIGNATURE_INVALID: &str = "SignatureInvalid";

/// Collects failures per check and assembles a [`ReportDoc`].
///
/// Both verifiers use this builder so the report layout cannot drift; the
/// checks themselves are implemented separately.
#[derive(Debug, Default)]
pub struct ReportBuilder {
    failures: Vec<(usize, FailureDoc)>,
    skipped: Vec<usize>,
    pub metadata: MetadataDoc,
    pub counts: Vec<u64>,
    pub receipt: Option<String>,
}

fn index_of(check: &str) -> usize {
    CHECK_ORDER
        .iter()
        .position(|c| *c == check)
        .unwrap_or_else(|| panic!("unregistered check {check}"))
}

impl ReportBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fail(
        &mut self,
        check: &str,
        seq: u64,
        field: impl Into<String>,
        expected: impl Into<String>,
        found: impl Into<String>,
    ) {
        self.failures.push((
            index_of(check),
            FailureDoc {
                check: check.to_owned(),
                seq,
                field: field.into(),
                expected: expected.into(),
                found: found.into(),
            },
        ));
    }

    pub fn skip(&mut self, check: &str) {
        self.skipped.push(index_of(check));
    }

    pub fn has_failures(&self, check: &str) -> bool {
        self.failure_count(check) > 0
    }

    pub fn failure_count(&self, check: &str) -> usize {
        let i = index_of(check);
        self.failures.iter().filter(|(c, _)| *c == i).count()
    }

    pub fn any_failure(&self) -> bool {
        !self.failures.is_empty()
    }

    pub fn finish(self) -> ReportDoc {
        let mut checks = Vec::with_capacity(CHECK_ORDER.len());
        for (i, name) in CHECK_ORDER.iter().enumerate() {
            let failures: Vec<FailureDoc> = self
                .failures
                .iter()
                .filter(|(c, _)| *c == i)
                .map(|(_, f)| f.clone())
                .collect();
            let status = if !failures.is_empty() {
                STATUS_FAIL
            } else if self.skipped.contains(&i) {
                STATUS_SKIPPED
            } else {
                STATUS_PASS
            };
            checks.push(CheckDoc {
                name: (*name).to_owned(),
                status: status.to_owned(),
                failures,
            });
        }
        let first_failure = checks.iter().flat_map(|c| c.failures.first()).next().cloned();
        ReportDoc {
            verdict: if first_failure.is_some() { FAIL } else { PASS }.to_owned(),
            first_failure,
            checks,
            counts: self.counts,
            receipt: self.receipt,
            metadata: self.metadata,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_failure_follows_check_order_not_insertion_order() {
        let mut b = ReportBuilder::new();
        b.fail(COUNT_MISMATCH, 8, "count[0]", "2", "3");
        b.fail(CHAIN, 4, "entry_hash", "aa", "bb");
        b.skip(OPENING);
        let r = b.finish();
        assert_eq!(r.verdict, FAIL);
        let first = r.first_failure.clone().unwrap();
        assert_eq!((first.check.as_str(), first.seq), (CHAIN, 4));
        assert_eq!(r.check(OPENING).unwrap().status, STATUS_SKIPPED);
        assert_eq!(r.checks.len(), 11);
    }

    #[test]
    fn empty_builder_passes() {
        let r = ReportBuilder::new().finish();
        assert!(r.passed());
        assert!(r.checks.iter().all(|c| c.status == STATUS_PASS));
    }
}
