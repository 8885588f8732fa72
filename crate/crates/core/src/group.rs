//! The order-q subgroup of Z_p^* for a safe prime p = 2q + 1.

use std::sync::Arc;

use e2ev_format::doc::GroupDoc;
use e2ev_format::hexfmt::{decode_fixed, encode_fixed, width_of_modulus, HexError};
use e2ev_format::params;
use rand::RngCore;

use crate::arith::{is_probable_prime, jacobi, FixedBase, GroupInt};

/// A member of the order-q subgroup.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element<T>(pub(crate) T);

/// An integer in `[0, q)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar<T>(pub(crate) T);

impl<T> Element<T> {
    pub fn value(&self) -> &T {
        &self.0
    }
}

impl<T> Scalar<T> {
    pub fn value(&self) -> &T {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupParams<T> {
    pub p: T,
    pub q: T,
    pub g: T,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("group parameter encoding: {0}")]
    Encoding(#[from] HexError),
    #[error("modulus of {bits} bits exceeds this integer backend")]
    Unsupported { bits: u64 },
    #[error("p is not 2q + 1")]
    NotSafePrimeForm,
    #[error("p or q is not prime")]
    NotPrime,
    #[error("g does not generate the order-q subgroup")]
    BadGenerator,
}

/// Why a hex field failed to decode as a group value.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("not canonical fixed-width hex")]
    Encoding,
    #[error("value out of range")]
    OutOfRange,
    #[error("not a member of the order-q subgroup")]
    NotAMember,
}

impl From<HexError> for DecodeError {
    fn from(_: HexError) -> Self {
        DecodeError::Encoding
    }
}

#[derive(Debug)]
pub struct Group<T> {
    params: GroupParams<T>,
    width: usize,
    q_minus_1: T,
    g_table: FixedBase<T>,
    g_inv: Element<T>,
    pinned: bool,
}

impl<T: GroupInt> Group<T> {
    /// Validates `params` and precomputes generator tables.
    pub fn new(params: GroupParams<T>) -> Result<Self, GroupError> {
        let GroupParams { p, q, g } = &params;
        if let Some(max) = T::MAX_MODULUS_BITS {
            if p.bits() > max {
                return Err(GroupError::Unsupported { bits: p.bits() });
            }
        }
        let two = T::from_u8(2).expect("small");
        if q.is_zero() || *p != q.clone() * two + T::one() {
            return Err(GroupError::NotSafePrimeForm);
        }
        let width = (p.bits() as usize).div_ceil(8);
        let doc = GroupDoc {
            p: hex_fixed(p, width),
            q: hex_fixed(q, width),
            g: hex_fixed(g, width),
        };
        let pinned = params::is_pinned(&doc);
        if !pinned && !(is_probable_prime(q) && is_probable_prime(p)) {
            return Err(GroupError::NotPrime);
        }
        if *g <= T::one() || g >= p || !g.pow_mod(q, p).is_one() {
            return Err(GroupError::BadGenerator);
        }
        let q_minus_1 = q.clone() - T::one();
        let g_table = FixedBase::new(g, p, q.bits());
        let g_inv = Element(g_table.pow(&q_minus_1));
        Ok(Group {
            params,
            width,
            q_minus_1,
            g_table,
            g_inv,
            pinned,
        })
    }

    pub fn from_doc(doc: &GroupDoc) -> Result<Self, GroupError> {
        let width = width_of_modulus(&doc.p)?;
        let int = |s: &str| -> Result<T, GroupError> {
            let bytes = decode_fixed(s, width)?;
            T::from_be_bytes(&bytes).ok_or(GroupError::Unsupported { bits: width as u64 * 8 })
        };
        Group::new(GroupParams {
            p: int(&doc.p)?,
            q: int(&doc.q)?,
            g: int(&doc.g)?,
        })
    }

    /// p = 23, q = 11, g = 2.
    pub fn test() -> Self {
        Self::from_doc(&params::test_group()).expect("pinned test group is valid")
    }

    /// The 32-bit group used for exhaustive tests and simulation.
    pub fn toy() -> Self {
        Self::from_doc(&params::toy_group()).expect("pinned toy group is valid")
    }

    pub fn to_doc(&self) -> GroupDoc {
        GroupDoc {
            p: self.hex(&self.params.p),
            q: self.hex(&self.params.q),
            g: self.hex(&self.params.g),
        }
    }

    pub fn params(&self) -> &GroupParams<T> {
        &self.params
    }

    pub fn p(&self) -> &T {
        &self.params.p
    }

    pub fn q(&self) -> &T {
        &self.params.q
    }

    pub fn is_pinned(&self) -> bool {
        self.pinned
    }

    /// Byte width of every encoded element and scalar.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn generator(&self) -> Element<T> {
        Element(self.params.g.clone())
    }

    pub fn identity(&self) -> Element<T> {
        Element(T::one())
    }

    /// Membership by Euler's criterion: for a safe prime the order-q
    /// subgroup is exactly the quadratic residues, so `x^q = 1` iff the
    /// Jacobi symbol `(x / p)` is 1.
    pub fn is_member(&self, x: &T) -> bool {
        !x.is_zero() && x < &self.params.p && jacobi(x, &self.params.p) == 1
    }

    pub fn element(&self, x: T) -> Result<Element<T>, DecodeError> {
        if x >= self.params.p {
            Err(DecodeError::OutOfRange)
        } else if !self.is_member(&x) {
            Err(DecodeError::NotAMember)
        } else {
            Ok(Element(x))
        }
    }

    pub fn scalar(&self, x: T) -> Result<Scalar<T>, DecodeError> {
        if x >= self.params.q {
            Err(DecodeError::OutOfRange)
        } else {
            Ok(Scalar(x))
        }
    }

    pub fn scalar_from_u64(&self, v: u64) -> Scalar<T> {
        Scalar(T::from_u64(v).expect("u64 fits every backend") % self.params.q.clone())
    }

    pub fn g_pow(&self, e: &Scalar<T>) -> Element<T> {
        Element(self.g_table.pow(&e.0))
    }

    /// `g^m` for a small plaintext exponent.
    pub fn g_pow_u64(&self, m: u64) -> Element<T> {
        self.g_pow(&self.scalar_from_u64(m))
    }

    pub fn g_inv(&self) -> &Element<T> {
        &self.g_inv
    }

    pub fn pow(&self, x: &Element<T>, e: &Scalar<T>) -> Element<T> {
        Element(x.0.pow_mod(&e.0, &self.params.p))
    }

    pub fn mul(&self, x: &Element<T>, y: &Element<T>) -> Element<T> {
        Element(x.0.mul_mod(&y.0, &self.params.p))
    }

    pub fn inv(&self, x: &Element<T>) -> Element<T> {
        Element(x.0.pow_mod(&self.q_minus_1, &self.params.p))
    }

    /// `x^-e`, computed as `x^(q-e)` to avoid a modular inverse.
    pub fn pow_neg(&self, x: &Element<T>, e: &Scalar<T>) -> Element<T> {
        self.pow(x, &self.scalar_neg(e))
    }

    pub fn scalar_add(&self, a: &Scalar<T>, b: &Scalar<T>) -> Scalar<T> {
        Scalar((a.0.clone() + b.0.clone()) % self.params.q.clone())
    }

    pub fn scalar_sub(&self, a: &Scalar<T>, b: &Scalar<T>) -> Scalar<T> {
        Scalar((a.0.clone() + self.params.q.clone() - b.0.clone()) % self.params.q.clone())
    }

    pub fn scalar_mul(&self, a: &Scalar<T>, b: &Scalar<T>) -> Scalar<T> {
        Scalar(a.0.mul_mod(&b.0, &self.params.q))
    }

    pub fn scalar_neg(&self, a: &Scalar<T>) -> Scalar<T> {
        Scalar((self.params.q.clone() - a.0.clone()) % self.params.q.clone())
    }

    pub fn scalar_zero(&self) -> Scalar<T> {
        Scalar(T::zero())
    }

    /// Uniform in `[0, q)`.
    pub fn random_scalar_any<R: RngCore + ?Sized>(&self, rng: &mut R) -> Scalar<T> {
        Scalar(random_below(&self.params.q, rng))
    }

    /// Uniform in `[1, q)`.
    pub fn random_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Scalar<T> {
        loop {
            let s = self.random_scalar_any(rng);
            if !s.0.is_zero() {
                return s;
            }
        }
    }

    /// Fixed-width big-endian bytes.
    pub fn encode(&self, x: &T) -> Vec<u8> {
        let raw = x.to_be_bytes();
        let mut out = vec![0u8; self.width - raw.len()];
        out.extend_from_slice(&raw);
        out
    }

    pub fn hex(&self, x: &T) -> String {
        hex_fixed(x, self.width)
    }

    fn decode_int(&self, s: &str) -> Result<T, DecodeError> {
        let bytes = decode_fixed(s, self.width)?;
        T::from_be_bytes(&bytes).ok_or(DecodeError::OutOfRange)
    }

    /// Decodes and checks subgroup membership.
    pub fn decode_element(&self, s: &str) -> Result<Element<T>, DecodeError> {
        self.element(self.decode_int(s)?)
    }

    /// Decodes a value that only has to be below p. Used for proof
    /// commitments, whose membership follows from the verification equation.
    pub fn decode_residue(&self, s: &str) -> Result<Element<T>, DecodeError> {
        let x = self.decode_int(s)?;
        if x >= self.params.p {
            Err(DecodeError::OutOfRange)
        } else {
            Ok(Element(x))
        }
    }

    pub fn decode_scalar(&self, s: &str) -> Result<Scalar<T>, DecodeError> {
        self.scalar(self.decode_int(s)?)
    }
}

impl Group<num_bigint::BigUint> {
    /// The 2048-bit production group.
    pub fn production() -> Self {
        Self::from_doc(&params::production_group()).expect("pinned production group is valid")
    }
}

fn hex_fixed<T: GroupInt>(x: &T, width: usize) -> String {
    encode_fixed(&x.to_be_bytes(), width).expect("value fits the group width")
}

pub(crate) fn random_below<T: GroupInt, R: RngCore + ?Sized>(bound: &T, rng: &mut R) -> T {
    let bits = bound.bits();
    let len = (bits as usize).div_ceil(8);
    let top_mask = if bits.is_multiple_of(8) {
        0xff
    } else {
        (1u8 << (bits % 8)) - 1
    };
    let mut buf = vec![0u8; len];
    loop {
        rng.fill_bytes(&mut buf);
        buf[0] &= top_mask;
        let v = T::from_be_bytes(&buf).expect("below the bound's width");
        if &v < bound {
            return v;
        }
    }
}

/// A public key with a precomputed exponentiation table.
#[derive(Clone, Debug)]
pub struct PublicKey<T> {
    element: Element<T>,
    table: Arc<FixedBase<T>>,
}

impl<T: GroupInt> PublicKey<T> {
    pub fn new(group: &Group<T>, element: Element<T>) -> Self {
        let table = Arc::new(FixedBase::new(&element.0, group.p(), group.q().bits()));
        PublicKey { element, table }
    }

    pub fn element(&self) -> &Element<T> {
        &self.element
    }

    pub fn pow(&self, e: &Scalar<T>) -> Element<T> {
        Element(self.table.pow(&e.0))
    }
}

#[derive(Clone, Debug)]
pub struct KeyPair<T> {
    pub sk: Scalar<T>,
    pub pk: Element<T>,
}

impl<T: GroupInt> KeyPair<T> {
    pub fn generate<R: RngCore + ?Sized>(group: &Group<T>, rng: &mut R) -> Self {
        Self::from_secret(group, group.random_scalar(rng))
    }

    pub fn from_secret(group: &Group<T>, sk: Scalar<T>) -> Self {
        let pk = group.g_pow(&sk);
        KeyPair { sk, pk }
    }
}

/// One trustee's additive share of the election secret key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrusteeShare<T> {
    pub index: u32,
    pub sk: Scalar<T>,
}

impl<T: GroupInt> TrusteeShare<T> {
    pub fn public_key(&self, group: &Group<T>) -> Element<T> {
        group.g_pow(&self.sk)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KeygenError {
    #[error("at least one trustee is required")]
    NoTrustees,
    #[error("trustee secret {0} is outside [1, q-1]")]
    BadSecret(u32),
}

/// Additive n-of-n key generation: `pk = Π g^sk_i`.
pub fn keygen<T: GroupInt, R: RngCore + ?Sized>(
    group: &Group<T>,
    n_trustees: u32,
    rng: &mut R,
) -> Result<(Element<T>, Vec<TrusteeShare<T>>), KeygenError> {
    let secrets: Vec<T> = (0..n_trustees).map(|_| group.random_scalar(rng).0).collect();
    keygen_from_secrets(group, secrets)
}

/// Key generation with caller-chosen shares.
pub fn keygen_from_secrets<T: GroupInt>(
    group: &Group<T>,
    secrets: Vec<T>,
) -> Result<(Element<T>, Vec<TrusteeShare<T>>), KeygenError> {
    if secrets.is_empty() {
        return Err(KeygenError::NoTrustees);
    }
    let mut pk = group.identity();
    let mut shares = Vec::with_capacity(secrets.len());
    for (i, s) in secrets.into_iter().enumerate() {
        let index = i as u32;
        if s.is_zero() || &s >= group.q() {
            return Err(KeygenError::BadSecret(index));
        }
        let share = TrusteeShare { index, sk: Scalar(s) };
        pk = group.mul(&pk, &share.public_key(group));
        shares.push(share);
    }
    Ok((pk, shares))
}

/// Product of trustee public keys.
pub fn combine_public_keys<T: GroupInt>(group: &Group<T>, keys: &[Element<T>]) -> Element<T> {
    keys.iter().fold(group.identity(), |acc, k| group.mul(&acc, k))
}
