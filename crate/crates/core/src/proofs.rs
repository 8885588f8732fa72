//! Sigma protocols made non-interactive with [`crate::challenge`]:
//! the disjunctive bit proof, Chaum–Pedersen equality-of-logs proofs (ballot
//! sum and decryption) and Schnorr signatures.

use e2ev_format::doc::{BitProofDoc, ChaumPedersenDoc, SignatureDoc};
use e2ev_format::{framed_sha256, tags};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::arith::GroupInt;
use crate::challenge::Transcript;
use crate::elgamal::{Ciphertext, CryptoError};
use crate::group::{DecodeError, Element, Group, KeyPair, PublicKey, Scalar, TrusteeShare};

/// Proof that a ciphertext encrypts 0 or 1. Branch `j` shows
/// `log_g(a) = log_pk(b / g^j)`; one branch is real, the other simulated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitProof<T> {
    pub a0: Element<T>,
    pub b0: Element<T>,
    pub a1: Element<T>,
    pub b1: Element<T>,
    pub c0: Scalar<T>,
    pub c1: Scalar<T>,
    pub s0: Scalar<T>,
    pub s1: Scalar<T>,
}

/// Equality of discrete logs: commitments `a = g^w`, `b = h^w`,
/// response `s = w + c·x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChaumPedersen<T> {
    pub a: Element<T>,
    pub b: Element<T>,
    pub c: Scalar<T>,
    pub s: Scalar<T>,
}

/// Schnorr signature: `g^s = r · X^c` with `c = H(X, r, msg)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature<T> {
    pub r: Element<T>,
    pub s: Scalar<T>,
}

pub struct BitContext<'a> {
    pub manifest_hash: &'a [u8; 32],
    pub nonce: &'a [u8; 16],
    pub index: u32,
}

pub struct SumContext<'a> {
    pub manifest_hash: &'a [u8; 32],
    pub nonce: &'a [u8; 16],
}

pub struct DecContext<'a> {
    pub manifest_hash: &'a [u8; 32],
    pub candidate: u32,
    pub trustee: u32,
}

fn bit_challenge<T: GroupInt>(
    group: &Group<T>,
    pk: &Element<T>,
    ct: &Ciphertext<T>,
    commitments: [&Element<T>; 4],
    ctx: &BitContext<'_>,
) -> Scalar<T> {
    let mut t = Transcript::new(group)
        .bytes(ctx.manifest_hash)
        .bytes(ctx.nonce)
        .index(ctx.index)
        .int(&pk.0)
        .int(&ct.a.0)
        .int(&ct.b.0);
    for c in commitments {
        t = t.int(&c.0);
    }
    t.challenge(tags::BIT)
}

/// `b · g^-j` for `j ∈ {0, 1}`.
fn shifted<T: GroupInt>(group: &Group<T>, b: &Element<T>, j: u64) -> Element<T> {
    if j == 0 {
        b.clone()
    } else {
        group.mul(b, group.g_inv())
    }
}

pub fn prove_bit<T: GroupInt, R: RngCore + ?Sized>(
    group: &Group<T>,
    pk: &PublicKey<T>,
    ct: &Ciphertext<T>,
    m: u64,
    r: &Scalar<T>,
    ctx: &BitContext<'_>,
    rng: &mut R,
) -> Result<BitProof<T>, CryptoError> {
    if m > 1 {
        return Err(CryptoError::NotABit(m));
    }
    let other = 1 - m;
    let w = group.random_scalar_any(rng);
    let c_sim = group.random_scalar_any(rng);
    let s_sim = group.random_scalar_any(rng);

    let real = (group.g_pow(&w), pk.pow(&w));
    let neg_c = group.scalar_neg(&c_sim);
    let sim = (
        group.mul(&group.g_pow(&s_sim), &group.pow(&ct.a, &neg_c)),
        group.mul(&pk.pow(&s_sim), &group.pow(&shifted(group, &ct.b, other), &neg_c)),
    );
    let (a0, b0, a1, b1) = if m == 0 {
        (real.0, real.1, sim.0, sim.1)
    } else {
        (sim.0, sim.1, real.0, real.1)
    };
    let c = bit_challenge(group, pk.element(), ct, [&a0, &b0, &a1, &b1], ctx);
    let c_real = group.scalar_sub(&c, &c_sim);
    let s_real = group.scalar_add(&w, &group.scalar_mul(&c_real, r));
    let (c0, c1, s0, s1) = if m == 0 {
        (c_real, c_sim, s_real, s_sim)
    } else {
        (c_sim, c_real, s_sim, s_real)
    };
    Ok(BitProof {
        a0,
        b0,
        a1,
        b1,
        c0,
        c1,
        s0,
        s1,
    })
}

pub fn verify_bit<T: GroupInt>(
    group: &Group<T>,
    pk: &PublicKey<T>,
    ct: &Ciphertext<T>,
    proof: &BitProof<T>,
    ctx: &BitContext<'_>,
) -> bool {
    let c = bit_challenge(
        group,
        pk.element(),
        ct,
        [&proof.a0, &proof.b0, &proof.a1, &proof.b1],
        ctx,
    );
    if group.scalar_add(&proof.c0, &proof.c1) != c {
        return false;
    }
    let branches = [
        (&proof.a0, &proof.b0, &proof.c0, &proof.s0, 0),
        (&proof.a1, &proof.b1, &proof.c1, &proof.s1, 1),
    ];
    branches.into_iter().all(|(aj, bj, cj, sj, j)| {
        group.g_pow(sj) == group.mul(aj, &group.pow(&ct.a, cj))
            && pk.pow(sj) == group.mul(bj, &group.pow(&shifted(group, &ct.b, j), cj))
    })
}

fn sum_challenge<T: GroupInt>(
    group: &Group<T>,
    pk: &Element<T>,
    total: &Ciphertext<T>,
    t1: &Element<T>,
    t2: &Element<T>,
    ctx: &SumContext<'_>,
) -> Scalar<T> {
    Transcript::new(group)
        .bytes(ctx.manifest_hash)
        .bytes(ctx.nonce)
        .int(&pk.0)
        .int(&total.a.0)
        .int(&total.b.0)
        .int(&t1.0)
        .int(&t2.0)
        .challenge(tags::SUM)
}

/// Proves that `total = (A, B)` encrypts exactly 1, i.e. `A = g^R` and
/// `B / g = pk^R`.
pub fn prove_sum<T: GroupInt, R: RngCore + ?Sized>(
    group: &Group<T>,
    pk: &PublicKey<T>,
    total: &Ciphertext<T>,
    big_r: &Scalar<T>,
    ctx: &SumContext<'_>,
    rng: &mut R,
) -> ChaumPedersen<T> {
    let w = group.random_scalar_any(rng);
    let a = group.g_pow(&w);
    let b = pk.pow(&w);
    let c = sum_challenge(group, pk.element(), total, &a, &b, ctx);
    let s = group.scalar_add(&w, &group.scalar_mul(&c, big_r));
    ChaumPedersen { a, b, c, s }
}

pub fn verify_sum<T: GroupInt>(
    group: &Group<T>,
    pk: &PublicKey<T>,
    total: &Ciphertext<T>,
    proof: &ChaumPedersen<T>,
    ctx: &SumContext<'_>,
) -> bool {
    let c = sum_challenge(group, pk.element(), total, &proof.a, &proof.b, ctx);
    c == proof.c
        && group.g_pow(&proof.s) == group.mul(&proof.a, &group.pow(&total.a, &c))
        && pk.pow(&proof.s) == group.mul(&proof.b, &group.pow(&shifted(group, &total.b, 1), &c))
}

fn dec_challenge<T: GroupInt>(
    group: &Group<T>,
    trustee_pk: &Element<T>,
    ct: &Ciphertext<T>,
    partial: &Element<T>,
    t1: &Element<T>,
    t2: &Element<T>,
    ctx: &DecContext<'_>,
) -> Scalar<T> {
    Transcript::new(group)
        .bytes(ctx.manifest_hash)
        .index(ctx.candidate)
        .index(ctx.trustee)
        .int(&trustee_pk.0)
        .int(&ct.a.0)
        .int(&ct.b.0)
        .int(&partial.0)
        .int(&t1.0)
        .int(&t2.0)
        .challenge(tags::DEC)
}

/// Secret-derived nonce so identical inputs give identical proofs.
fn derived_nonce<T: GroupInt>(group: &Group<T>, secret: &Scalar<T>, statement: &[&[u8]]) -> Scalar<T> {
    let secret_bytes = group.encode(&secret.0);
    let mut fields: Vec<&[u8]> = vec![b"e2ev/nonce", &secret_bytes];
    fields.extend_from_slice(statement);
    let mut rng = ChaCha20Rng::from_seed(framed_sha256(&fields));
    group.random_scalar_any(&mut rng)
}

/// Proves `log_g(pk_i) = log_a(partial)`.
pub fn prove_decryption<T: GroupInt>(
    group: &Group<T>,
    share: &TrusteeShare<T>,
    ct: &Ciphertext<T>,
    partial: &Element<T>,
    ctx: &DecContext<'_>,
) -> ChaumPedersen<T> {
    let pk_i = share.public_key(group);
    let w = derived_nonce(
        group,
        &share.sk,
        &[
            ctx.manifest_hash,
            &ctx.candidate.to_be_bytes(),
            &ctx.trustee.to_be_bytes(),
            &group.encode(&ct.a.0),
            &group.encode(&ct.b.0),
        ],
    );
    let a = group.g_pow(&w);
    let b = group.pow(&ct.a, &w);
    let c = dec_challenge(group, &pk_i, ct, partial, &a, &b, ctx);
    let s = group.scalar_add(&w, &group.scalar_mul(&c, &share.sk));
    ChaumPedersen { a, b, c, s }
}

pub fn verify_decryption_proof<T: GroupInt>(
    group: &Group<T>,
    trustee_pk: &Element<T>,
    ct: &Ciphertext<T>,
    partial: &Element<T>,
    proof: &ChaumPedersen<T>,
    ctx: &DecContext<'_>,
) -> bool {
    let c = dec_challenge(group, trustee_pk, ct, partial, &proof.a, &proof.b, ctx);
    c == proof.c
        && group.g_pow(&proof.s) == group.mul(&proof.a, &group.pow(trustee_pk, &c))
        && group.pow(&ct.a, &proof.s) == group.mul(&proof.b, &group.pow(partial, &c))
}

fn sig_challenge<T: GroupInt>(group: &Group<T>, x: &Element<T>, r: &Element<T>, msg: &[u8]) -> Scalar<T> {
    Transcript::new(group)
        .int(&x.0)
        .int(&r.0)
        .bytes(msg)
        .challenge(tags::SIG)
}

pub fn sign<T: GroupInt, R: RngCore + ?Sized>(
    group: &Group<T>,
    key: &KeyPair<T>,
    msg: &[u8],
    rng: &mut R,
) -> Signature<T> {
    let k = group.random_scalar(rng);
    let r = group.g_pow(&k);
    let c = sig_challenge(group, &key.pk, &r, msg);
    let s = group.scalar_add(&k, &group.scalar_mul(&c, &key.sk));
    Signature { r, s }
}

pub fn verify_signature<T: GroupInt>(group: &Group<T>, x: &Element<T>, msg: &[u8], sig: &Signature<T>) -> bool {
    let c = sig_challenge(group, x, &sig.r, msg);
    group.g_pow(&sig.s) == group.mul(&sig.r, &group.pow(x, &c))
}

impl<T: GroupInt> BitProof<T> {
    pub fn to_doc(&self, group: &Group<T>) -> BitProofDoc {
        let h = |x: &T| group.hex(x);
        BitProofDoc {
            a0: h(&self.a0.0),
            b0: h(&self.b0.0),
            a1: h(&self.a1.0),
            b1: h(&self.b1.0),
            c0: h(&self.c0.0),
            c1: h(&self.c1.0),
            s0: h(&self.s0.0),
            s1: h(&self.s1.0),
        }
    }

    /// Decodes with range checks only; see [`Group::decode_residue`].
    pub fn from_doc(group: &Group<T>, d: &BitProofDoc) -> Result<Self, (&'static str, DecodeError)> {
        let e = |name: &'static str, s: &str| group.decode_residue(s).map_err(|err| (name, err));
        let sc = |name: &'static str, s: &str| group.decode_scalar(s).map_err(|err| (name, err));
        Ok(BitProof {
            a0: e("a0", &d.a0)?,
            b0: e("b0", &d.b0)?,
            a1: e("a1", &d.a1)?,
            b1: e("b1", &d.b1)?,
            c0: sc("c0", &d.c0)?,
            c1: sc("c1", &d.c1)?,
            s0: sc("s0", &d.s0)?,
            s1: sc("s1", &d.s1)?,
        })
    }
}

impl<T: GroupInt> ChaumPedersen<T> {
    pub fn to_doc(&self, group: &Group<T>) -> ChaumPedersenDoc {
        ChaumPedersenDoc {
            a: group.hex(&self.a.0),
            b: group.hex(&self.b.0),
            c: group.hex(&self.c.0),
            s: group.hex(&self.s.0),
        }
    }

    pub fn from_doc(group: &Group<T>, d: &ChaumPedersenDoc) -> Result<Self, (&'static str, DecodeError)> {
        Ok(ChaumPedersen {
            a: group.decode_residue(&d.a).map_err(|e| ("a", e))?,
            b: group.decode_residue(&d.b).map_err(|e| ("b", e))?,
            c: group.decode_scalar(&d.c).map_err(|e| ("c", e))?,
            s: group.decode_scalar(&d.s).map_err(|e| ("s", e))?,
        })
    }
}

impl<T: GroupInt> Signature<T> {
    pub fn to_doc(&self, group: &Group<T>) -> SignatureDoc {
        SignatureDoc {
            r: group.hex(&self.r.0),
            s: group.hex(&self.s.0),
        }
    }

    pub fn from_doc(group: &Group<T>, d: &SignatureDoc) -> Result<Self, DecodeError> {
        Ok(Signature {
            r: group.decode_residue(&d.r)?,
            s: group.decode_scalar(&d.s)?,
        })
    }
}
