//! Serialization constants and wire formats for the e2ev election toolkit.
//!
//! This crate is deliberately free of group arithmetic. It pins down every
//! byte that two independent implementations must agree on:
//!
//! * the fixed-width hex codec for group elements, scalars and digests,
//! * the domain-tag registry and the tag-length-prefixed hash framing,
//! * the exact byte layouts hashed into board entries, manifests, ballots and
//!   signed messages,
//! * the JSON documents stored on the bulletin board and exchanged as files,
//! * the verification report schema and the fixed order of its checks.
//!
//! Anything that needs modular arithmetic (proof equations, decryption,
//! exponent recovery) lives in the implementations that consume this crate.

pub mod doc;
pub mod hexfmt;
pub mod kind;
pub mod layout;
pub mod params;
pub mod report;
pub mod tags;

pub use hexfmt::{decode_fixed, encode_fixed, HexError};
pub use kind::EntryKind;
pub use layout::{domain_hash, entry_hash, framed_sha256};

/// Hash algorithm identifier recorded in every manifest.
pub const HASH_ALG: &str = "sha-256";

/// Length in bytes of every digest on the board.
pub const DIGEST_LEN: usize = 32;

/// Length in bytes of the random nonce carried by each encrypted ballot.
pub const BALLOT_NONCE_LEN: usize = 16;

/// Length in bytes of the return-code key published in the Close entry.
pub const CODE_KEY_LEN: usize = 32;

/// Number of letters in a return code.
pub const RETURN_CODE_LEN: usize = 2;

/// `prev_hash` of the genesis (seq 0) entry.
pub const GENESIS_PREV_HASH: [u8; DIGEST_LEN] = [0u8; DIGEST_LEN];

/// Board file name inside an election workspace.
pub const BOARD_FILE: &str = "board.ndjson";

/// Manifest file name inside an election workspace.
pub const MANIFEST_FILE: &str = "manifest.json";
