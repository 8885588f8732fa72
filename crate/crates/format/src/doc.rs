//! JSON documents. Field order is part of the format: payloads are stored as
//! the compact `serde_json` serialization of these structs, and that exact
//! byte string is what the entry hash covers.
//!
//! All hex fields follow [`crate::hexfmt`]: elements and scalars are
//! `width` bytes wide, digests 32 bytes, ballot nonces 16 bytes.

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDoc {
    pub p: String,
    pub q: String,
    pub g: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestDoc {
    pub election_id: String,
    pub candidates: Vec<String>,
    pub group: GroupDoc,
    pub election_pk: String,
    pub trustee_pks: Vec<String>,
    pub device_pk: String,
    pub authority_pk: String,
    pub hash_alg: String,
    pub manifest_hash: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CiphertextDoc {
    pub a: String,
    pub b: String,
}

/// Disjunctive proof that a ciphertext encrypts 0 or 1. Branch `j` proves
/// `log_g(a) = log_pk(b / g^j)` with commitments `(aj, bj)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BitProofDoc {
    pub a0: String,
    pub b0: String,
    pub a1: String,
    pub b1: String,
    pub c0: String,
    pub c1: String,
    pub s0: String,
    pub s1: String,
}

/// Chaum–Pedersen transcript: commitments `a` (base g) and `b` (second base),
/// challenge `c`, response `s`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChaumPedersenDoc {
    pub a: String,
    pub b: String,
    pub c: String,
    pub s: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallotDoc {
    pub nonce: String,
    pub ciphertexts: Vec<CiphertextDoc>,
    pub bit_proofs: Vec<BitProofDoc>,
    pub sum_proof: ChaumPedersenDoc,
    pub ballot_hash: String,
}

/// Payload of a ChallengedBallot entry: the spoiled ballot, the randomness
/// that opens it, and the selection the device claims it encrypts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChallengeDoc {
    pub ballot: BallotDoc,
    pub randomness: Vec<String>,
    pub claimed: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShareDoc {
    pub trustee: u32,
    pub partial: String,
    pub proof: ChaumPedersenDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateTallyDoc {
    pub aggregate: CiphertextDoc,
    pub shares: Vec<ShareDoc>,
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TallyDoc {
    pub candidates: Vec<CandidateTallyDoc>,
    pub total_cast: u64,
}

/// Schnorr signature `(r, s)` with `g^s = r · X^c`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureDoc {
    pub r: String,
    pub s: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CloseDoc {
    pub entry_count: u64,
    pub code_key: String,
    pub signature: SignatureDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiptDoc {
    pub ballot_hash: String,
    pub signature: SignatureDoc,
    pub return_code: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimDoc {
    pub receipt: ReceiptDoc,
    pub kind: String,
    pub observed_issuance: bool,
}

/// One line of `board.ndjson`, borrowed from the file bytes so the payload
/// is kept verbatim.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryLine<'a> {
    pub seq: u64,
    pub prev_hash: String,
    pub kind: String,
    #[serde(borrow)]
    pub payload: &'a RawValue,
    pub entry_hash: String,
}

impl<'a> EntryLine<'a> {
    pub fn parse(line: &'a [u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(line)
    }

    pub fn payload_bytes(&self) -> &'a [u8] {
        self.payload.get().as_bytes()
    }
}

/// Serializes one board line with the fixed field order.
///
/// `payload` must already be canonical JSON; it is embedded verbatim.
pub fn write_entry_line(seq: u64, prev_hash_hex: &str, kind: &str, payload: &str, entry_hash_hex: &str) -> String {
    let mut out = String::with_capacity(payload.len() + 200);
    out.push_str("{\"seq\":");
    out.push_str(&seq.to_string());
    out.push_str(",\"prev_hash\":");
    out.push_str(&serde_json::to_string(prev_hash_hex).expect("string serializes"));
    out.push_str(",\"kind\":");
    out.push_str(&serde_json::to_string(kind).expect("string serializes"));
    out.push_str(",\"payload\":");
    out.push_str(payload);
    out.push_str(",\"entry_hash\":");
    out.push_str(&serde_json::to_string(entry_hash_hex).expect("string serializes"));
    out.push('}');
    out
}

/// Compact canonical JSON of a document.
pub fn canonical<T: Serialize>(doc: &T) -> String {
    serde_json::to_string(doc).expect("documents contain only strings, integers and lists")
}
