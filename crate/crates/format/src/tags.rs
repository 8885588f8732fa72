//! Domain-tag registry for Fiat–Shamir challenges and keyed hashes.
//!
//! Every challenge is `domain_hash(tag, fields) mod q`, where the fields are
//! listed below in order. Group elements and scalars are fixed-width
//! big-endian (width = byte length of `p`), indices are 4-byte big-endian.
//!
//! | tag            | fields                                                                 |
//! |----------------|------------------------------------------------------------------------|
//! | `e2ev/bit/v1`  | manifest_hash, ballot nonce, candidate index, pk, a, b, a0, b0, a1, b1  |
//! | `e2ev/sum/v1`  | manifest_hash, ballot nonce, pk, A, B, commit_g, commit_pk              |
//! | `e2ev/dec/v1`  | manifest_hash, candidate index, trustee index, pk_i, a, b, partial, commit_g, commit_a |
//! | `e2ev/sig/v1`  | signer key X, commitment R, message                                     |
//! | `e2ev/code/v1` | code key, ballot hash (keyed hash, not reduced mod q)                   |

pub const BIT: &str = "e2ev/bit/v1";
pub const SUM: &str = "e2ev/sum/v1";
pub const DEC: &str = "e2ev/dec/v1";
pub const SIG: &str = "e2ev/sig/v1";
pub const CODE: &str = "e2ev/code/v1";

/// The complete registry; any other tag is refused.
pub const REGISTRY: [&str; 5] = [BIT, SUM, DEC, SIG, CODE];

pub fn is_registered(tag: &str) -> bool {
    REGISTRY.contains(&tag)
}
