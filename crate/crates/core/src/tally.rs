//! Homomorphic aggregation and provable decryption of the cast ballots.

use e2ev_format::doc::{canonical, BallotDoc, CandidateTallyDoc, ShareDoc, TallyDoc};
use e2ev_format::EntryKind;

use crate::arith::GroupInt;
use crate::ballot::{verify_ballot, Rejection};
use crate::board::{Appended, Board, BoardError, Snapshot};
use crate::dlog::recover_exponent;
use crate::elgamal::{combine_shares, decrypt_share, homomorphic_add, Ciphertext};
use crate::group::TrusteeShare;
use crate::manifest::Manifest;
use crate::proofs::DecContext;

#[derive(Debug, thiserror::Error)]
pub enum TallyError {
    #[error("cast ballot at seq {seq} is invalid: {rejection}")]
    InvalidBallot { seq: u64, rejection: Rejection },
    #[error("cast ballot at seq {0} does not decode")]
    Undecodable(u64),
    #[error("expected {expected} trustee shares, found {found}")]
    MissingShares { expected: usize, found: usize },
    #[error("share {0} does not match trustee key {0}")]
    WrongShare(usize),
    #[error("candidate {candidate}: no count in 0..={bound}")]
    NotFound { candidate: usize, bound: u64 },
    #[error(transparent)]
    Board(#[from] BoardError),
}

/// Per-candidate products of all cast ciphertexts, in board order, and the
/// number of cast ballots.
pub fn aggregate<T: GroupInt>(
    manifest: &Manifest<T>,
    snapshot: &Snapshot,
) -> Result<(Vec<Ciphertext<T>>, u64), TallyError> {
    let group = manifest.group();
    let mut totals = vec![Ciphertext::zero(group); manifest.n_candidates()];
    let mut cast = 0u64;
    for e in snapshot.of_kind(EntryKind::CastBallot) {
        let doc: BallotDoc = serde_json::from_str(&e.payload).map_err(|_| TallyError::Undecodable(e.seq))?;
        let ballot =
            verify_ballot(manifest, &doc).map_err(|rejection| TallyError::InvalidBallot { seq: e.seq, rejection })?;
        for (t, ct) in totals.iter_mut().zip(&ballot.ciphertexts) {
            *t = homomorphic_add(group, t, ct);
        }
        cast += 1;
    }
    Ok((totals, cast))
}

/// Decrypts each aggregate with every trustee share and recovers the counts.
/// `shares[i]` must be trustee `i`'s.
pub fn decrypt_tally<T: GroupInt>(
    manifest: &Manifest<T>,
    aggregates: &[Ciphertext<T>],
    total_cast: u64,
    shares: &[TrusteeShare<T>],
) -> Result<TallyDoc, TallyError> {
    let group = manifest.group();
    let pks = manifest.trustee_pks();
    if shares.len() != pks.len() {
        return Err(TallyError::MissingShares {
            expected: pks.len(),
            found: shares.len(),
        });
    }
    for (i, (s, pk)) in shares.iter().zip(pks).enumerate() {
        if s.index as usize != i || &s.public_key(group) != pk {
            return Err(TallyError::WrongShare(i));
        }
    }
    let mut candidates = Vec::with_capacity(aggregates.len());
    for (j, ct) in aggregates.iter().enumerate() {
        let mut partials = Vec::with_capacity(shares.len());
        let mut share_docs = Vec::with_capacity(shares.len());
        for s in shares {
            let ctx = DecContext {
                manifest_hash: manifest.hash(),
                candidate: j as u32,
                trustee: s.index,
            };
            let (partial, proof) = decrypt_share(group, s, ct, &ctx);
            share_docs.push(ShareDoc {
                trustee: s.index,
                partial: group.hex(partial.value()),
                proof: proof.to_doc(group),
            });
            partials.push(partial);
        }
        let gm = combine_shares(group, ct, &partials, pks.len()).expect("one partial per trustee");
        let count = recover_exponent(group, &gm, total_cast).ok_or(TallyError::NotFound {
            candidate: j,
            bound: total_cast,
        })?;
        candidates.push(CandidateTallyDoc {
            aggregate: ct.to_doc(group),
            shares: share_docs,
            count,
        });
    }
    Ok(TallyDoc { candidates, total_cast })
}

/// Aggregates, decrypts and posts the tally artifact.
pub fn tally_board<T: GroupInt>(
    board: &mut Board<T>,
    shares: &[TrusteeShare<T>],
) -> Result<(TallyDoc, Appended), TallyError> {
    let manifest = board.manifest().clone();
    let (aggregates, cast) = aggregate(&manifest, board.snapshot())?;
    let doc = decrypt_tally(&manifest, &aggregates, cast, shares)?;
    let appended = board.append(EntryKind::TallyArtifact, &canonical(&doc))?;
    Ok((doc, appended))
}
