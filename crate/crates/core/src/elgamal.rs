//! Exponential ElGamal over the order-q subgroup.

use e2ev_format::doc::CiphertextDoc;

use crate::arith::GroupInt;
use crate::group::{DecodeError, Element, Group, PublicKey, Scalar, TrusteeShare};
use crate::proofs::{self, ChaumPedersen, DecContext};

/// `(a, b) = (g^r, g^m · pk^r)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ciphertext<T> {
    pub a: Element<T>,
    pub b: Element<T>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CryptoError {
    #[error("plaintext {0} is not a bit")]
    NotABit(u64),
    #[error("randomness must lie in [1, q-1]")]
    ZeroRandomness,
    #[error("expected {expected} decryption shares, found {found}")]
    MissingShare { expected: usize, found: usize },
    #[error("decryption share of trustee {0} does not verify")]
    InvalidShare(u32),
}

impl<T: GroupInt> Ciphertext<T> {
    /// `Enc(0)` with zero randomness: the identity for [`homomorphic_add`].
    pub fn zero(group: &Group<T>) -> Self {
        Ciphertext {
            a: group.identity(),
            b: group.identity(),
        }
    }

    pub fn to_doc(&self, group: &Group<T>) -> CiphertextDoc {
        CiphertextDoc {
            a: group.hex(&self.a.0),
            b: group.hex(&self.b.0),
        }
    }

    /// Decodes both components and checks subgroup membership.
    pub fn from_doc(group: &Group<T>, doc: &CiphertextDoc) -> Result<Self, DecodeError> {
        Ok(Ciphertext {
            a: group.decode_element(&doc.a)?,
            b: group.decode_element(&doc.b)?,
        })
    }
}

/// Encrypts a bit. Deterministic in `(m, r)`.
pub fn encrypt_bit<T: GroupInt>(
    group: &Group<T>,
    pk: &PublicKey<T>,
    m: u64,
    r: &Scalar<T>,
) -> Result<Ciphertext<T>, CryptoError> {
    if m > 1 {
        return Err(CryptoError::NotABit(m));
    }
    if r.0.is_zero() {
        return Err(CryptoError::ZeroRandomness);
    }
    Ok(encrypt_unchecked(group, pk, m, r))
}

/// Encryption of an arbitrary small exponent with arbitrary randomness.
/// Used to re-encrypt claimed openings and to build adversarial test inputs.
pub fn encrypt_unchecked<T: GroupInt>(group: &Group<T>, pk: &PublicKey<T>, m: u64, r: &Scalar<T>) -> Ciphertext<T> {
    let a = group.g_pow(r);
    let b = if m == 0 {
        pk.pow(r)
    } else {
        group.mul(&group.g_pow_u64(m), &pk.pow(r))
    };
    Ciphertext { a, b }
}

/// Componentwise product; decrypts to `m1 + m2`.
pub fn homomorphic_add<T: GroupInt>(group: &Group<T>, c1: &Ciphertext<T>, c2: &Ciphertext<T>) -> Ciphertext<T> {
    Ciphertext {
        a: group.mul(&c1.a, &c2.a),
        b: group.mul(&c1.b, &c2.b),
    }
}

/// Partial decryption `a^sk_i` with a proof that it uses the trustee's key.
pub fn decrypt_share<T: GroupInt>(
    group: &Group<T>,
    share: &TrusteeShare<T>,
    ct: &Ciphertext<T>,
    ctx: &DecContext<'_>,
) -> (Element<T>, ChaumPedersen<T>) {
    let partial = group.pow(&ct.a, &share.sk);
    let proof = proofs::prove_decryption(group, share, ct, &partial, ctx);
    (partial, proof)
}

pub fn verify_decryption<T: GroupInt>(
    group: &Group<T>,
    trustee_pk: &Element<T>,
    ct: &Ciphertext<T>,
    partial: &Element<T>,
    proof: &ChaumPedersen<T>,
    ctx: &DecContext<'_>,
) -> bool {
    proofs::verify_decryption_proof(group, trustee_pk, ct, partial, proof, ctx)
}

/// `b · (Π partials)^-1 = g^m`. Refuses unless exactly one partial per
/// trustee is supplied.
pub fn combine_shares<T: GroupInt>(
    group: &Group<T>,
    ct: &Ciphertext<T>,
    partials: &[Element<T>],
    n_trustees: usize,
) -> Result<Element<T>, CryptoError> {
    if partials.len() != n_trustees || n_trustees == 0 {
        return Err(CryptoError::MissingShare {
            expected: n_trustees,
            found: partials.len(),
        });
    }
    let prod = partials.iter().fold(group.identity(), |acc, p| group.mul(&acc, p));
    Ok(group.mul(&ct.b, &group.inv(&prod)))
}

/// Verifies every share's proof, then combines. `shares[i]` must belong to
/// trustee `i`.
pub fn combine_verified<T: GroupInt>(
    group: &Group<T>,
    ct: &Ciphertext<T>,
    trustee_pks: &[Element<T>],
    shares: &[(Element<T>, ChaumPedersen<T>)],
    manifest_hash: &[u8; 32],
    candidate: u32,
) -> Result<Element<T>, CryptoError> {
    if shares.len() != trustee_pks.len() {
        return Err(CryptoError::MissingShare {
            expected: trustee_pks.len(),
            found: shares.len(),
        });
    }
    for (i, ((partial, proof), pk)) in shares.iter().zip(trustee_pks).enumerate() {
        let ctx = DecContext {
            manifest_hash,
            candidate,
            trustee: i as u32,
        };
        if !verify_decryption(group, pk, ct, partial, proof, &ctx) {
            return Err(CryptoError::InvalidShare(i as u32));
        }
    }
    let partials: Vec<Element<T>> = shares.iter().map(|(p, _)| p.clone()).collect();
    combine_shares(group, ct, &partials, trustee_pks.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dlog::recover_exponent;
    use crate::group::keygen_from_secrets;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    const MH: [u8; 32] = [7u8; 32];

    fn ctx(candidate: u32, trustee: u32) -> DecContext<'static> {
        DecContext {
            manifest_hash: &MH,
            candidate,
            trustee,
        }
    }

    fn test_setup() -> (Group<u64>, PublicKey<u64>, TrusteeShare<u64>) {
        let g = Group::<u64>::test();
        let (pk, shares) = keygen_from_secrets(&g, vec![3]).unwrap();
        let pk = PublicKey::new(&g, pk);
        (g, pk, shares.into_iter().next().unwrap())
    }

    fn decrypt(g: &Group<u64>, shares: &[TrusteeShare<u64>], ct: &Ciphertext<u64>) -> Element<u64> {
        let partials: Vec<_> = shares
            .iter()
            .map(|s| decrypt_share(g, s, ct, &ctx(0, s.index)).0)
            .collect();
        combine_shares(g, ct, &partials, shares.len()).unwrap()
    }

    // Hand oracle in Z_23: 2^2 = 4, 2^1 * 8^2 = 128 = 13; 2^3 = 8, 8^3 = 512 = 6.
    #[test]
    fn hand_computed_test_group_vectors() {
        let (g, pk, share) = test_setup();
        let c1 = encrypt_bit(&g, &pk, 1, &Scalar(2)).unwrap();
        assert_eq!((c1.a.0, c1.b.0), (4, 13));
        let c0 = encrypt_bit(&g, &pk, 0, &Scalar(3)).unwrap();
        assert_eq!((c0.a.0, c0.b.0), (8, 6));
        let sum = homomorphic_add(&g, &c1, &c0);
        assert_eq!((sum.a.0, sum.b.0), (9, 9));
        // 9^3 = 729 = 16; 16^-1 = 13; 9 * 13 = 117 = 2 = g^1.
        assert_eq!(decrypt(&g, std::slice::from_ref(&share), &sum).0, 2);
        assert_eq!(decrypt(&g, &[share], &c1).0, 2);
    }

    #[test]
    fn encrypt_rejects_non_bits() {
        let (g, pk, _) = test_setup();
        assert_eq!(encrypt_bit(&g, &pk, 2, &Scalar(1)), Err(CryptoError::NotABit(2)));
        assert_eq!(encrypt_bit(&g, &pk, 1, &Scalar(0)), Err(CryptoError::ZeroRandomness));
    }

    #[test]
    fn combine_refuses_missing_and_invalid_shares() {
        let g = Group::<u64>::toy();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let (pk, shares) = crate::group::keygen(&g, 3, &mut rng).unwrap();
        let pk = PublicKey::new(&g, pk);
        let ct = encrypt_bit(&g, &pk, 1, &g.random_scalar(&mut rng)).unwrap();
        let pks: Vec<_> = shares.iter().map(|s| s.public_key(&g)).collect();
        let mut dec: Vec<_> = shares
            .iter()
            .map(|s| decrypt_share(&g, s, &ct, &ctx(0, s.index)))
            .collect();
        assert_eq!(combine_verified(&g, &ct, &pks, &dec, &MH, 0).unwrap(), g.generator());
        assert!(matches!(
            combine_verified(&g, &ct, &pks, &dec[..2], &MH, 0),
            Err(CryptoError::MissingShare { expected: 3, found: 2 })
        ));
        dec[1].0 = g.mul(&dec[1].0, &g.generator());
        assert_eq!(
            combine_verified(&g, &ct, &pks, &dec, &MH, 0),
            Err(CryptoError::InvalidShare(1))
        );
    }

    #[test]
    fn sums_of_ones_decrypt_to_their_count() {
        let g = Group::<u64>::toy();
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let (pk, shares) = crate::group::keygen(&g, 2, &mut rng).unwrap();
        let pk = PublicKey::new(&g, pk);
        let mut acc = Ciphertext::zero(&g);
        for k in 1..=20u64 {
            let c = encrypt_bit(&g, &pk, 1, &g.random_scalar(&mut rng)).unwrap();
            acc = homomorphic_add(&g, &acc, &c);
            let m = decrypt(&g, &shares, &acc);
            // Brute-force oracle: the first exponent whose power matches.
            let brute = (0..=20u64).find(|e| g.g_pow_u64(*e) == m);
            assert_eq!(brute, Some(k));
            assert_eq!(recover_exponent(&g, &m, 20), Some(k));
        }
    }

    #[test]
    fn homomorphism_is_exhaustive_on_the_test_group() {
        let (g, pk, share) = test_setup();
        for m1 in 0..=1u64 {
            for m2 in 0..=1u64 {
                for r1 in 1..11u64 {
                    for r2 in 1..11u64 {
                        let c1 = encrypt_bit(&g, &pk, m1, &Scalar(r1)).unwrap();
                        let c2 = encrypt_bit(&g, &pk, m2, &Scalar(r2)).unwrap();
                        let s = homomorphic_add(&g, &c1, &c2);
                        let m = decrypt(&g, std::slice::from_ref(&share), &s);
                        assert_eq!(recover_exponent(&g, &m, 2), Some(m1 + m2));
                        let unchanged = homomorphic_add(&g, &c1, &encrypt_bit(&g, &pk, 0, &Scalar(r2)).unwrap());
                        assert_eq!(decrypt(&g, std::slice::from_ref(&share), &unchanged), g.g_pow_u64(m1));
                    }
                }
            }
        }
    }

    #[test]
    fn randomization() {
        let g = Group::<u64>::toy();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (pk, _) = crate::group::keygen(&g, 1, &mut rng).unwrap();
        let pk = PublicKey::new(&g, pk);
        let r = g.random_scalar(&mut rng);
        let r2 = g.scalar_add(&r, &g.scalar_from_u64(1));
        assert_eq!(encrypt_bit(&g, &pk, 1, &r), encrypt_bit(&g, &pk, 1, &r));
        assert_ne!(encrypt_bit(&g, &pk, 1, &r), encrypt_bit(&g, &pk, 1, &r2));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn round_trip(seed in any::<u64>(), m in 0u64..=1, trustees in 1u32..4) {
            let g = Group::<u64>::toy();
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let (pk, shares) = crate::group::keygen(&g, trustees, &mut rng).unwrap();
            let pk = PublicKey::new(&g, pk);
            let ct = encrypt_bit(&g, &pk, m, &g.random_scalar(&mut rng)).unwrap();
            prop_assert_eq!(decrypt(&g, &shares, &ct), g.g_pow_u64(m));
        }
    }
}
