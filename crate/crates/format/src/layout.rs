//! Byte layouts fed to SHA-256.
//!
//! Framing: a field list is serialized as `len(field) as u32 BE ‖ field` for
//! each field, so no two field lists share an encoding.

use sha2::{Digest, Sha256};

use crate::doc::{BallotDoc, ManifestDoc};
use crate::hexfmt::{decode_fixed, HexError};
use crate::kind::EntryKind;
use crate::BALLOT_NONCE_LEN;

fn frame_into(out: &mut Vec<u8>, field: &[u8]) {
    out.extend_from_slice(&(field.len() as u32).to_be_bytes());
    out.extend_from_slice(field);
}

/// Length-prefixed concatenation of `fields`.
pub fn frame(fields: &[&[u8]]) -> Vec<u8> {
    let mut out = Vec::with_capacity(fields.iter().map(|f| f.len() + 4).sum());
    for f in fields {
        frame_into(&mut out, f);
    }
    out
}

/// SHA-256 over the framed fields.
pub fn framed_sha256(fields: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    for f in fields {
        h.update((f.len() as u32).to_be_bytes());
        h.update(f);
    }
    h.finalize().into()
}

/// SHA-256 over the framed tag followed by the framed fields.
///
/// This is the hash behind every Fiat–Shamir challenge (reduced mod q by the
/// caller) and the return-code keyed hash. It does not check the registry;
/// challenge derivation does.
pub fn domain_hash(tag: &str, fields: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((tag.len() as u32).to_be_bytes());
    h.update(tag.as_bytes());
    for f in fields {
        h.update((f.len() as u32).to_be_bytes());
        h.update(f);
    }
    h.finalize().into()
}

/// `SHA-256(prev_hash ‖ seq as u64 BE ‖ kind tag ‖ payload)`.
pub fn entry_hash(prev_hash: &[u8; 32], seq: u64, kind: EntryKind, payload: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(prev_hash);
    h.update(seq.to_be_bytes());
    h.update([kind.tag()]);
    h.update(payload);
    h.finalize().into()
}

/// Manifest hash: framed SHA-256 over
/// `election_id, u32 candidate count, each candidate, p, q, g, election_pk,
/// u32 trustee count, each trustee pk, device_pk, authority_pk, hash_alg`.
/// Group values are fixed-width bytes.
pub fn manifest_hash(doc: &ManifestDoc, width: usize) -> Result<[u8; 32], HexError> {
    let fixed = |s: &str| decode_fixed(s, width);
    let mut fields: Vec<Vec<u8>> = Vec::new();
    fields.push(doc.election_id.as_bytes().to_vec());
    fields.push((doc.candidates.len() as u32).to_be_bytes().to_vec());
    fields.extend(doc.candidates.iter().map(|c| c.as_bytes().to_vec()));
    fields.push(fixed(&doc.group.p)?);
    fields.push(fixed(&doc.group.q)?);
    fields.push(fixed(&doc.group.g)?);
    fields.push(fixed(&doc.election_pk)?);
    fields.push((doc.trustee_pks.len() as u32).to_be_bytes().to_vec());
    for pk in &doc.trustee_pks {
        fields.push(fixed(pk)?);
    }
    fields.push(fixed(&doc.device_pk)?);
    fields.push(fixed(&doc.authority_pk)?);
    fields.push(doc.hash_alg.as_bytes().to_vec());
    let refs: Vec<&[u8]> = fields.iter().map(Vec::as_slice).collect();
    Ok(framed_sha256(&refs))
}

/// The bytes a ballot hash covers: nonce, then each ciphertext `a ‖ b` in
/// candidate order, then each bit proof `a0 ‖ b0 ‖ a1 ‖ b1 ‖ c0 ‖ c1 ‖ s0 ‖ s1`,
/// then the sum proof `a ‖ b ‖ c ‖ s`. Every value is fixed width, so no
/// framing is needed.
pub fn ballot_hash_input(doc: &BallotDoc, width: usize) -> Result<Vec<u8>, HexError> {
    let mut out = decode_fixed(&doc.nonce, BALLOT_NONCE_LEN)?;
    let mut push = |s: &str| -> Result<(), HexError> {
        out.extend_from_slice(&decode_fixed(s, width)?);
        Ok(())
    };
    for ct in &doc.ciphertexts {
        push(&ct.a)?;
        push(&ct.b)?;
    }
    for p in &doc.bit_proofs {
        for v in [&p.a0, &p.b0, &p.a1, &p.b1, &p.c0, &p.c1, &p.s0, &p.s1] {
            push(v)?;
        }
    }
    let sp = &doc.sum_proof;
    for v in [&sp.a, &sp.b, &sp.c, &sp.s] {
        push(v)?;
    }
    Ok(out)
}

pub fn ballot_hash(doc: &BallotDoc, width: usize) -> Result<[u8; 32], HexError> {
    Ok(Sha256::digest(ballot_hash_input(doc, width)?).into())
}

/// Message signed by the device on a receipt.
pub fn receipt_message(ballot_hash: &[u8; 32], return_code: &str) -> Vec<u8> {
    frame(&[b"receipt", ballot_hash, return_code.as_bytes()])
}

/// Message signed by the election authority in the Close entry. `prev_hash`
/// is the Close entry's own `prev_hash`, binding the signature to the whole
/// chain before it.
pub fn close_message(entry_count: u64, prev_hash: &[u8; 32], code_key: &[u8]) -> Vec<u8> {
    frame(&[b"close", &entry_count.to_be_bytes(), prev_hash, code_key])
}
