//! Encrypted ballots: one ciphertext and bit proof per candidate plus a proof
//! that exactly one ciphertext encrypts 1.

use e2ev_format::doc::{BallotDoc, ChallengeDoc};
use e2ev_format::hexfmt::{decode_fixed, encode};
use e2ev_format::layout;
use e2ev_format::report::phrase;
use e2ev_format::BALLOT_NONCE_LEN;
use rand::RngCore;

use crate::arith::GroupInt;
use crate::elgamal::{encrypt_bit, encrypt_unchecked, homomorphic_add, Ciphertext};
use crate::group::{DecodeError, Group, Scalar};
use crate::manifest::Manifest;
use crate::proofs::{self, BitContext, BitProof, ChaumPedersen, SumContext};

/// A hand-checkable finding: which field, what was expected, what was found.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{field}: expected {expected}, found {found}")]
pub struct Rejection {
    pub field: String,
    pub expected: String,
    pub found: String,
}

impl Rejection {
    pub fn new(field: impl Into<String>, expected: impl Into<String>, found: impl Into<String>) -> Self {
        Rejection {
            field: field.into(),
            expected: expected.into(),
            found: found.into(),
        }
    }

    fn encoding(field: impl Into<String>) -> Self {
        Self::new(field, phrase::CANONICAL_HEX, phrase::INVALID_ENCODING)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PlainBallot {
    pub selection: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncryptedBallot<T> {
    pub nonce: [u8; BALLOT_NONCE_LEN],
    pub ciphertexts: Vec<Ciphertext<T>>,
    pub bit_proofs: Vec<BitProof<T>>,
    pub sum_proof: ChaumPedersen<T>,
    pub hash: [u8; 32],
}

/// Per-candidate encryption randomness and its sum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallotRandomness<T> {
    pub r: Vec<Scalar<T>>,
    pub total: Scalar<T>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BallotError {
    #[error("selection {selection} out of range for {candidates} candidates")]
    SelectionOutOfRange { selection: u32, candidates: usize },
}

impl<T: GroupInt> EncryptedBallot<T> {
    /// Serializes without the hash field populated from `self.hash`; the
    /// caller-visible doc always carries the recomputed hash.
    pub fn to_doc(&self, group: &Group<T>) -> BallotDoc {
        BallotDoc {
            nonce: encode(&self.nonce),
            ciphertexts: self.ciphertexts.iter().map(|c| c.to_doc(group)).collect(),
            bit_proofs: self.bit_proofs.iter().map(|p| p.to_doc(group)).collect(),
            sum_proof: self.sum_proof.to_doc(group),
            ballot_hash: encode(&self.hash),
        }
    }

    pub fn hash_hex(&self) -> String {
        encode(&self.hash)
    }
}

impl<T: GroupInt> BallotRandomness<T> {
    pub fn to_hex(&self, group: &Group<T>) -> Vec<String> {
        self.r.iter().map(|r| group.hex(r.value())).collect()
    }
}

/// Encrypts `plain` honestly.
pub fn encrypt_ballot<T: GroupInt, R: RngCore + ?Sized>(
    manifest: &Manifest<T>,
    plain: PlainBallot,
    rng: &mut R,
) -> Result<(EncryptedBallot<T>, BallotRandomness<T>), BallotError> {
    let n = manifest.n_candidates();
    if plain.selection as usize >= n {
        return Err(BallotError::SelectionOutOfRange {
            selection: plain.selection,
            candidates: n,
        });
    }
    let group = manifest.group();
    let pk = manifest.election_pk();
    let mut nonce = [0u8; BALLOT_NONCE_LEN];
    rng.fill_bytes(&mut nonce);

    let mut ciphertexts = Vec::with_capacity(n);
    let mut bit_proofs = Vec::with_capacity(n);
    let mut rs = Vec::with_capacity(n);
    let mut total_r = group.scalar_zero();
    let mut total = Ciphertext::zero(group);
    for i in 0..n {
        let m = u64::from(i as u32 == plain.selection);
        let r = group.random_scalar(rng);
        let ct = encrypt_bit(group, pk, m, &r).expect("m is a bit and r is nonzero");
        let ctx = BitContext {
            manifest_hash: manifest.hash(),
            nonce: &nonce,
            index: i as u32,
        };
        bit_proofs.push(proofs::prove_bit(group, pk, &ct, m, &r, &ctx, rng).expect("m is a bit"));
        total_r = group.scalar_add(&total_r, &r);
        total = homomorphic_add(group, &total, &ct);
        ciphertexts.push(ct);
        rs.push(r);
    }
    let sum_ctx = SumContext {
        manifest_hash: manifest.hash(),
        nonce: &nonce,
    };
    let sum_proof = proofs::prove_sum(group, pk, &total, &total_r, &sum_ctx, rng);
    let mut ballot = EncryptedBallot {
        nonce,
        ciphertexts,
        bit_proofs,
        sum_proof,
        hash: [0u8; 32],
    };
    ballot.hash = layout::ballot_hash(&ballot.to_doc(group), group.width()).expect("encoded at group width");
    Ok((ballot, BallotRandomness { r: rs, total: total_r }))
}

/// Checks an untrusted ballot. Checks run in a fixed order (candidate count,
/// encoding, ballot hash, then per candidate ciphertext membership and bit
/// proof, then the sum proof) and the first failure is returned.
pub fn verify_ballot<T: GroupInt>(manifest: &Manifest<T>, doc: &BallotDoc) -> Result<EncryptedBallot<T>, Rejection> {
    verify_ballot_counted(manifest, doc, &mut 0)
}

/// [`verify_ballot`] that also counts the proofs whose equations were evaluated.
pub fn verify_ballot_counted<T: GroupInt>(
    manifest: &Manifest<T>,
    doc: &BallotDoc,
    proofs_checked: &mut u64,
) -> Result<EncryptedBallot<T>, Rejection> {
    let group = manifest.group();
    let n = manifest.n_candidates();
    if doc.ciphertexts.len() != n {
        return Err(Rejection::new(
            "ciphertexts",
            n.to_string(),
            doc.ciphertexts.len().to_string(),
        ));
    }
    if doc.bit_proofs.len() != n {
        return Err(Rejection::new(
            "bit_proofs",
            n.to_string(),
            doc.bit_proofs.len().to_string(),
        ));
    }

    let nonce: [u8; BALLOT_NONCE_LEN] = decode_fixed(&doc.nonce, BALLOT_NONCE_LEN)
        .map_err(|_| Rejection::encoding("nonce"))?
        .try_into()
        .expect("decoded at nonce length");
    let mut ciphertexts = Vec::with_capacity(n);
    for (i, c) in doc.ciphertexts.iter().enumerate() {
        let a = group
            .decode_residue(&c.a)
            .map_err(|_| Rejection::encoding(format!("ciphertexts[{i}].a")))?;
        let b = group
            .decode_residue(&c.b)
            .map_err(|_| Rejection::encoding(format!("ciphertexts[{i}].b")))?;
        ciphertexts.push(Ciphertext { a, b });
    }
    let mut bit_proofs = Vec::with_capacity(n);
    for (i, p) in doc.bit_proofs.iter().enumerate() {
        bit_proofs
            .push(BitProof::from_doc(group, p).map_err(|(f, _)| Rejection::encoding(format!("bit_proofs[{i}].{f}")))?);
    }
    let sum_proof = ChaumPedersen::from_doc(group, &doc.sum_proof)
        .map_err(|(f, _)| Rejection::encoding(format!("sum_proof.{f}")))?;
    let claimed_hash: [u8; 32] = decode_fixed(&doc.ballot_hash, 32)
        .map_err(|_| Rejection::encoding("ballot_hash"))?
        .try_into()
        .expect("decoded at digest length");

    let hash = layout::ballot_hash(doc, group.width()).expect("every field decoded");
    if hash != claimed_hash {
        return Err(Rejection::new("ballot_hash", encode(&hash), doc.ballot_hash.clone()));
    }

    let pk = manifest.election_pk();
    let mut total = Ciphertext::zero(group);
    for (i, (ct, proof)) in ciphertexts.iter().zip(&bit_proofs).enumerate() {
        if !group.is_member(ct.a.value()) || !group.is_member(ct.b.value()) {
            return Err(Rejection::new(
                format!("ciphertext[{i}]"),
                phrase::SUBGROUP_ELEMENT,
                phrase::NOT_A_MEMBER,
            ));
        }
        let ctx = BitContext {
            manifest_hash: manifest.hash(),
            nonce: &nonce,
            index: i as u32,
        };
        *proofs_checked += 1;
        if !proofs::verify_bit(group, pk, ct, proof, &ctx) {
            return Err(Rejection::new(
                format!("bit-proof[{i}]"),
                phrase::VALID_PROOF,
                phrase::INVALID_PROOF,
            ));
        }
        total = homomorphic_add(group, &total, ct);
    }
    let sum_ctx = SumContext {
        manifest_hash: manifest.hash(),
        nonce: &nonce,
    };
    *proofs_checked += 1;
    if !proofs::verify_sum(group, pk, &total, &sum_proof, &sum_ctx) {
        return Err(Rejection::new("sum-proof", phrase::VALID_PROOF, phrase::INVALID_PROOF));
    }
    Ok(EncryptedBallot {
        nonce,
        ciphertexts,
        bit_proofs,
        sum_proof,
        hash,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Opening {
    Consistent,
    Inconsistent(Rejection),
}

impl Opening {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Opening::Consistent)
    }
}

/// Re-encrypts `claimed` under `rnd` and compares with the ballot.
pub fn open_ballot<T: GroupInt>(
    manifest: &Manifest<T>,
    ballot: &EncryptedBallot<T>,
    rnd: &[Scalar<T>],
    claimed: PlainBallot,
) -> Opening {
    let group = manifest.group();
    let n = manifest.n_candidates();
    if claimed.selection as usize >= n {
        return Opening::Inconsistent(Rejection::new(
            "claimed",
            phrase::less_than(n),
            claimed.selection.to_string(),
        ));
    }
    if rnd.len() != n {
        return Opening::Inconsistent(Rejection::new("randomness", n.to_string(), rnd.len().to_string()));
    }
    for (i, (r, ct)) in rnd.iter().zip(&ballot.ciphertexts).enumerate() {
        let m = u64::from(i as u32 == claimed.selection);
        let expected = encrypt_unchecked(group, manifest.election_pk(), m, r);
        if &expected != ct {
            let pair = |c: &Ciphertext<T>| phrase::pair(&group.hex(c.a.value()), &group.hex(c.b.value()));
            return Opening::Inconsistent(Rejection::new(format!("opening[{i}]"), pair(&expected), pair(ct)));
        }
    }
    Opening::Consistent
}

/// Decodes the randomness list of a challenge record.
pub fn decode_randomness<T: GroupInt>(group: &Group<T>, hex: &[String]) -> Result<Vec<Scalar<T>>, Rejection> {
    hex.iter()
        .enumerate()
        .map(|(i, s)| {
            group
                .decode_scalar(s)
                .map_err(|_: DecodeError| Rejection::encoding(format!("randomness[{i}]")))
        })
        .collect()
}

/// Full check of a challenge record: the ballot verifies and its opening is
/// consistent with the claimed selection.
pub fn open_challenge<T: GroupInt>(manifest: &Manifest<T>, record: &ChallengeDoc) -> Result<Opening, Rejection> {
    let ballot = verify_ballot(manifest, &record.ballot)?;
    if record.claimed as usize >= manifest.n_candidates() {
        return Ok(Opening::Inconsistent(Rejection::new(
            "claimed",
            phrase::less_than(manifest.n_candidates()),
            record.claimed.to_string(),
        )));
    }
    if record.randomness.len() != manifest.n_candidates() {
        return Ok(Opening::Inconsistent(Rejection::new(
            "randomness",
            manifest.n_candidates().to_string(),
            record.randomness.len().to_string(),
        )));
    }
    let rnd = match decode_randomness(manifest.group(), &record.randomness) {
        Ok(r) => r,
        Err(rej) => return Ok(Opening::Inconsistent(rej)),
    };
    Ok(open_ballot(
        manifest,
        &ballot,
        &rnd,
        PlainBallot {
            selection: record.claimed,
        },
    ))
}
