//! The election manifest and election setup.

use std::sync::Arc;

use e2ev_format::doc::{canonical, ManifestDoc};
use e2ev_format::hexfmt::encode;
use e2ev_format::{layout, HASH_ALG};
use rand::RngCore;

use crate::arith::GroupInt;
use crate::group::{
    combine_public_keys, keygen, DecodeError, Element, Group, GroupError, KeyPair, KeygenError, PublicKey, TrusteeShare,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ManifestError {
    #[error("manifest JSON: {0}")]
    Json(String),
    #[error("unsupported hash algorithm {0:?}")]
    HashAlg(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("manifest names a different group")]
    GroupMismatch,
    #[error("need at least 2 candidates, found {0}")]
    TooFewCandidates(usize),
    #[error("need at least one trustee key")]
    NoTrustees,
    #[error("{field}: {err}")]
    Key { field: String, err: DecodeError },
    #[error("election_pk is not the product of the trustee keys")]
    KeyProduct,
    #[error("manifest_hash mismatch: expected {expected}, found {found}")]
    Hash { expected: String, found: String },
}

/// A validated manifest together with decoded keys.
#[derive(Debug, Clone)]
pub struct Manifest<T> {
    doc: ManifestDoc,
    canonical: String,
    hash: [u8; 32],
    group: Arc<Group<T>>,
    election_pk: PublicKey<T>,
    trustee_pks: Vec<Element<T>>,
    device_pk: Element<T>,
    authority_pk: Element<T>,
}

impl<T: GroupInt> Manifest<T> {
    /// Assembles and hashes a new manifest.
    pub fn build(
        group: Arc<Group<T>>,
        election_id: &str,
        candidates: &[String],
        trustee_pks: Vec<Element<T>>,
        device_pk: Element<T>,
        authority_pk: Element<T>,
    ) -> Result<Self, ManifestError> {
        if candidates.len() < 2 {
            return Err(ManifestError::TooFewCandidates(candidates.len()));
        }
        if trustee_pks.is_empty() {
            return Err(ManifestError::NoTrustees);
        }
        let election_pk = combine_public_keys(&group, &trustee_pks);
        let mut doc = ManifestDoc {
            election_id: election_id.to_owned(),
            candidates: candidates.to_vec(),
            group: group.to_doc(),
            election_pk: group.hex(election_pk.value()),
            trustee_pks: trustee_pks.iter().map(|k| group.hex(k.value())).collect(),
            device_pk: group.hex(device_pk.value()),
            authority_pk: group.hex(authority_pk.value()),
            hash_alg: HASH_ALG.to_owned(),
            manifest_hash: String::new(),
        };
        let hash = layout::manifest_hash(&doc, group.width()).expect("fields were encoded at group width");
        doc.manifest_hash = encode(&hash);
        Ok(Manifest {
            canonical: canonical(&doc),
            doc,
            hash,
            election_pk: PublicKey::new(&group, election_pk),
            trustee_pks,
            device_pk,
            authority_pk,
            group,
        })
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, ManifestError> {
        let doc: ManifestDoc = serde_json::from_slice(bytes).map_err(|e| ManifestError::Json(e.to_string()))?;
        Self::from_doc(doc)
    }

    /// Validates an untrusted manifest document.
    pub fn from_doc(doc: ManifestDoc) -> Result<Self, ManifestError> {
        if doc.hash_alg != HASH_ALG {
            return Err(ManifestError::HashAlg(doc.hash_alg));
        }
        let group = Arc::new(Group::from_doc(&doc.group)?);
        Self::from_doc_in(doc, group)
    }

    /// Like [`Manifest::from_doc`] but reuses an already validated group,
    /// which must equal the one the document names.
    pub fn from_doc_in(doc: ManifestDoc, group: Arc<Group<T>>) -> Result<Self, ManifestError> {
        if doc.hash_alg != HASH_ALG {
            return Err(ManifestError::HashAlg(doc.hash_alg));
        }
        if doc.group != group.to_doc() {
            return Err(ManifestError::GroupMismatch);
        }
        if doc.candidates.len() < 2 {
            return Err(ManifestError::TooFewCandidates(doc.candidates.len()));
        }
        if doc.trustee_pks.is_empty() {
            return Err(ManifestError::NoTrustees);
        }
        let key = |field: String, s: &str| group.decode_element(s).map_err(|err| ManifestError::Key { field, err });
        let election_pk = key("election_pk".into(), &doc.election_pk)?;
        let trustee_pks = doc
            .trustee_pks
            .iter()
            .enumerate()
            .map(|(i, s)| key(format!("trustee_pks[{i}]"), s))
            .collect::<Result<Vec<_>, _>>()?;
        let device_pk = key("device_pk".into(), &doc.device_pk)?;
        let authority_pk = key("authority_pk".into(), &doc.authority_pk)?;
        if combine_public_keys(&group, &trustee_pks) != election_pk {
            return Err(ManifestError::KeyProduct);
        }
        let hash = layout::manifest_hash(&doc, group.width()).expect("fields decoded at group width");
        if encode(&hash) != doc.manifest_hash {
            return Err(ManifestError::Hash {
                expected: encode(&hash),
                found: doc.manifest_hash,
            });
        }
        Ok(Manifest {
            canonical: canonical(&doc),
            doc,
            hash,
            election_pk: PublicKey::new(&group, election_pk),
            trustee_pks,
            device_pk,
            authority_pk,
            group,
        })
    }

    pub fn doc(&self) -> &ManifestDoc {
        &self.doc
    }

    /// The exact bytes stored as the board's first payload and as
    /// `manifest.json`.
    pub fn canonical_json(&self) -> &str {
        &self.canonical
    }

    pub fn hash(&self) -> &[u8; 32] {
        &self.hash
    }

    pub fn group(&self) -> &Arc<Group<T>> {
        &self.group
    }

    pub fn election_pk(&self) -> &PublicKey<T> {
        &self.election_pk
    }

    pub fn trustee_pks(&self) -> &[Element<T>] {
        &self.trustee_pks
    }

    pub fn device_pk(&self) -> &Element<T> {
        &self.device_pk
    }

    pub fn authority_pk(&self) -> &Element<T> {
        &self.authority_pk
    }

    pub fn candidates(&self) -> &[String] {
        &self.doc.candidates
    }

    pub fn n_candidates(&self) -> usize {
        self.doc.candidates.len()
    }

    /// Index of a candidate given by name or by decimal index.
    pub fn candidate_index(&self, name_or_index: &str) -> Option<u32> {
        self.doc
            .candidates
            .iter()
            .position(|c| c == name_or_index)
            .map(|i| i as u32)
            .or_else(|| {
                name_or_index
                    .parse::<u32>()
                    .ok()
                    .filter(|&i| (i as usize) < self.n_candidates())
            })
    }
}

/// Secret material produced at setup. None of it is ever published.
#[derive(Debug, Clone)]
pub struct ElectionSecrets<T> {
    pub trustees: Vec<TrusteeShare<T>>,
    pub device: KeyPair<T>,
    pub authority: KeyPair<T>,
    /// Key for return codes; published in the Close entry.
    pub code_key: [u8; 32],
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SetupError {
    #[error(transparent)]
    Keygen(#[from] KeygenError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
}

pub fn setup_election<T: GroupInt, R: RngCore + ?Sized>(
    group: Arc<Group<T>>,
    election_id: &str,
    candidates: &[String],
    n_trustees: u32,
    rng: &mut R,
) -> Result<(Manifest<T>, ElectionSecrets<T>), SetupError> {
    let (_, trustees) = keygen(&group, n_trustees, rng)?;
    let device = KeyPair::generate(&group, rng);
    let authority = KeyPair::generate(&group, rng);
    let mut code_key = [0u8; 32];
    rng.fill_bytes(&mut code_key);
    let trustee_pks = trustees.iter().map(|t| t.public_key(&group)).collect();
    let manifest = Manifest::build(
        group,
        election_id,
        candidates,
        trustee_pks,
        device.pk.clone(),
        authority.pk.clone(),
    )?;
    Ok((
        manifest,
        ElectionSecrets {
            trustees,
            device,
            authority,
            code_key,
        },
    ))
}
