//! End-to-end verifiable election toolkit.
//!
//! Exponential ElGamal over a prime-order subgroup of a safe-prime group,
//! with non-interactive proofs for ballot well-formedness and decryption,
//! a hash-chained bulletin board, cast-or-challenge voting devices, a
//! homomorphic tally, an in-process verifier, dispute adjudication and a
//! Monte Carlo simulator for detection rates.
//!
//! All arithmetic is generic over [`arith::GroupInt`], implemented for
//! `u64` (groups up to 32 bits) and [`num_bigint::BigUint`]. The aliases
//! below fix the backend for the two usual cases.

pub mod arith;
pub mod ballot;
pub mod board;
pub mod challenge;
pub mod device;
pub mod dispute;
pub mod dlog;
pub mod elgamal;
pub mod group;
pub mod manifest;
pub mod package;
pub mod proofs;
pub mod receipt;
pub mod sim;
pub mod tally;
pub mod verifier;

pub use arith::GroupInt;
pub use num_bigint::BigUint;

/// Test and toy groups on machine words.
pub type Group32 = group::Group<u64>;
/// The 2048-bit production group, or any group given as big integers.
pub type GroupBig = group::Group<BigUint>;
pub type Manifest32 = manifest::Manifest<u64>;
pub type ManifestBig = manifest::Manifest<BigUint>;
pub type Board32 = board::Board<u64>;
pub type BoardBig = board::Board<BigUint>;
pub type Device32 = device::Device<u64>;
pub type DeviceBig = device::Device<BigUint>;
