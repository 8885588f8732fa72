//! Group arithmetic on `BigUint`, written against the wire format only.

use e2ev_format::doc::GroupDoc;
use e2ev_format::hexfmt::{decode_fixed, encode_fixed, width_of_modulus};
use e2ev_format::{domain_hash, params};
use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Why a hex field was refused.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bad {
    /// Not fixed-width lowercase hex.
    Encoding,
    /// Decoded, but outside the required range or subgroup.
    Value,
}

#[derive(Clone, Debug)]
pub struct Group {
    pub p: BigUint,
    pub q: BigUint,
    pub g: BigUint,
    pub width: usize,
    g_inv: BigUint,
}

fn miller_rabin(n: &BigUint) -> bool {
    let two = BigUint::from(2u8);
    let three = BigUint::from(3u8);
    if *n < two {
        return false;
    }
    if *n == two || *n == three {
        return true;
    }
    if !n.bit(0) {
        return false;
    }
    let n1 = n - 1u8;
    let s = n1.trailing_zeros().expect("n - 1 is nonzero");
    let d = &n1 >> s;
    let span = n - &three;
    let n_bytes = n.to_bytes_be();
    'rounds: for i in 0..params::MILLER_RABIN_ROUNDS {
        let seed = params::miller_rabin_base_seed(&n_bytes, i);
        let a = BigUint::from_bytes_be(&seed) % &span + &two;
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = &x * &x % n;
            if x == n1 {
                continue 'rounds;
            }
        }
        return false;
    }
    true
}

impl Group {
    /// `None` unless `p = 2q + 1` with both prime and `g` of order `q`.
    pub fn from_doc(doc: &GroupDoc) -> Option<Group> {
        let width = width_of_modulus(&doc.p).ok()?;
        let int = |s: &str| decode_fixed(s, width).ok().map(|b| BigUint::from_bytes_be(&b));
        let (p, q, g) = (int(&doc.p)?, int(&doc.q)?, int(&doc.g)?);
        if q.is_zero() || p != &q * 2u8 + 1u8 {
            return None;
        }
        if !params::is_pinned(doc) && !(miller_rabin(&q) && miller_rabin(&p)) {
            return None;
        }
        if g <= BigUint::one() || g >= p || !g.modpow(&q, &p).is_one() {
            return None;
        }
        let g_inv = g.modpow(&(&p - 2u8), &p);
        Some(Group { p, q, g, width, g_inv })
    }

    fn int(&self, s: &str) -> Result<BigUint, Bad> {
        decode_fixed(s, self.width)
            .map(|b| BigUint::from_bytes_be(&b))
            .map_err(|_| Bad::Encoding)
    }

    /// A member of the order-`q` subgroup, by Euler's criterion.
    pub fn member(&self, s: &str) -> Result<BigUint, Bad> {
        let x = self.int(s)?;
        if !self.is_member(&x) {
            return Err(Bad::Value);
        }
        Ok(x)
    }

    pub fn is_member(&self, x: &BigUint) -> bool {
        !x.is_zero() && *x < self.p && self.pow(x, &self.q).is_one()
    }

    /// Any residue below `p`.
    pub fn residue(&self, s: &str) -> Result<BigUint, Bad> {
        let x = self.int(s)?;
        if x >= self.p {
            return Err(Bad::Value);
        }
        Ok(x)
    }

    pub fn scalar(&self, s: &str) -> Result<BigUint, Bad> {
        let x = self.int(s)?;
        if x >= self.q {
            return Err(Bad::Value);
        }
        Ok(x)
    }

    pub fn bytes(&self, x: &BigUint) -> Vec<u8> {
        let raw = if x.is_zero() { Vec::new() } else { x.to_bytes_be() };
        let mut out = vec![0u8; self.width - raw.len()];
        out.extend_from_slice(&raw);
        out
    }

    pub fn hex(&self, x: &BigUint) -> String {
        encode_fixed(&x.to_bytes_be(), self.width).expect("value below p")
    }

    pub fn pow(&self, x: &BigUint, e: &BigUint) -> BigUint {
        x.modpow(e, &self.p)
    }

    pub fn mul(&self, x: &BigUint, y: &BigUint) -> BigUint {
        x * y % &self.p
    }

    pub fn g_pow(&self, e: &BigUint) -> BigUint {
        self.g.modpow(e, &self.p)
    }

    /// `x · g^-1`.
    pub fn unshift(&self, x: &BigUint) -> BigUint {
        self.mul(x, &self.g_inv)
    }

    /// Modular inverse of a nonzero residue.
    pub fn inv(&self, x: &BigUint) -> BigUint {
        x.modpow(&(&self.p - 2u8), &self.p)
    }

    /// Fiat–Shamir challenge: the domain hash read big-endian, mod `q`.
    pub fn challenge(&self, tag: &str, fields: &[&[u8]]) -> BigUint {
        BigUint::from_bytes_be(&domain_hash(tag, fields)) % &self.q
    }

    /// The least `m` in `0..=max` with `g^m = y`.
    pub fn dlog(&self, y: &BigUint, max: u64) -> Option<u64> {
        let mut acc = BigUint::one();
        for m in 0..=max {
            if acc == *y {
                return Some(m);
            }
            acc = self.mul(&acc, &self.g);
        }
        None
    }
}
