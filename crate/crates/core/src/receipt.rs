//! Voter receipts and two-letter return codes.

use e2ev_format::doc::ReceiptDoc;
use e2ev_format::hexfmt::{decode_digest, encode};
use e2ev_format::layout::{domain_hash, receipt_message};
use e2ev_format::{tags, CODE_KEY_LEN, RETURN_CODE_LEN};
use rand::RngCore;

use crate::arith::GroupInt;
use crate::group::{Group, KeyPair};
use crate::proofs::{self, Signature};

/// Number of distinct return codes.
pub const CODE_SPACE: u64 = 26u64.pow(RETURN_CODE_LEN as u32);

/// Keyed hash of the ballot hash, reduced to two letters `A`–`Z`.
pub fn issue_return_code(code_key: &[u8; CODE_KEY_LEN], ballot_hash: &[u8; 32]) -> String {
    let h = domain_hash(tags::CODE, &[code_key, ballot_hash]);
    let v = u64::from_be_bytes(h[..8].try_into().expect("8 bytes")) % CODE_SPACE;
    code_from_index(v)
}

/// The code with index `v` in `0..676`, most significant letter first.
pub fn code_from_index(v: u64) -> String {
    debug_assert!(v < CODE_SPACE);
    [(v / 26) as u8, (v % 26) as u8]
        .iter()
        .map(|d| (b'A' + d) as char)
        .collect()
}

pub fn is_well_formed_code(code: &str) -> bool {
    code.len() == RETURN_CODE_LEN && code.bytes().all(|b| b.is_ascii_uppercase())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Receipt<T> {
    pub ballot_hash: [u8; 32],
    pub signature: Signature<T>,
    pub return_code: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed receipt: {0}")]
pub struct MalformedReceipt(pub &'static str);

impl<T: GroupInt> Receipt<T> {
    /// Issues a receipt signed with the device key.
    pub fn issue<R: RngCore + ?Sized>(
        group: &Group<T>,
        device: &KeyPair<T>,
        code_key: &[u8; CODE_KEY_LEN],
        ballot_hash: [u8; 32],
        rng: &mut R,
    ) -> Self {
        let return_code = issue_return_code(code_key, &ballot_hash);
        let signature = proofs::sign(group, device, &receipt_message(&ballot_hash, &return_code), rng);
        Receipt {
            ballot_hash,
            signature,
            return_code,
        }
    }

    pub fn to_doc(&self, group: &Group<T>) -> ReceiptDoc {
        ReceiptDoc {
            ballot_hash: encode(&self.ballot_hash),
            signature: self.signature.to_doc(group),
            return_code: self.return_code.clone(),
        }
    }

    pub fn from_doc(group: &Group<T>, doc: &ReceiptDoc) -> Result<Self, MalformedReceipt> {
        let ballot_hash = decode_digest(&doc.ballot_hash).map_err(|_| MalformedReceipt("ballot_hash"))?;
        let signature = Signature::from_doc(group, &doc.signature).map_err(|_| MalformedReceipt("signature"))?;
        if !is_well_formed_code(&doc.return_code) {
            return Err(MalformedReceipt("return_code"));
        }
        Ok(Receipt {
            ballot_hash,
            signature,
            return_code: doc.return_code.clone(),
        })
    }

    pub fn signature_valid(&self, group: &Group<T>, device_pk: &crate::group::Element<T>) -> bool {
        proofs::verify_signature(
            group,
            device_pk,
            &receipt_message(&self.ballot_hash, &self.return_code),
            &self.signature,
        )
    }
}
