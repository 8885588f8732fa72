//! Integer backends for modular arithmetic.
//!
//! Group code is generic over [`GroupInt`]. Two backends exist: `u64` for
//! moduli below 2^32 (products fit in a machine word, which keeps the
//! simulator fast) and [`BigUint`] for anything larger.

use std::fmt::Debug;
use std::hash::Hash;

use num_bigint::BigUint;
use num_traits::{FromPrimitive, Num, ToPrimitive, Unsigned, Zero};

pub trait GroupInt:
    Clone + Debug + Eq + Ord + Hash + Send + Sync + 'static + Num + Unsigned + FromPrimitive + ToPrimitive
{
    /// Largest modulus size in bits this backend can reduce without overflow.
    const MAX_MODULUS_BITS: Option<u64>;

    fn mul_mod(&self, rhs: &Self, m: &Self) -> Self;

    fn pow_mod(&self, exp: &Self, m: &Self) -> Self {
        let mut acc = Self::one();
        for i in (0..exp.bits()).rev() {
            acc = acc.mul_mod(&acc, m);
            if exp.bit(i) {
                acc = acc.mul_mod(self, m);
            }
        }
        acc % m.clone()
    }

    fn bits(&self) -> u64;
    fn bit(&self, i: u64) -> bool;
    fn trailing_zeros(&self) -> u64;
    fn shr(&self, n: u64) -> Self;
    fn low_u64(&self) -> u64;

    /// Minimal big-endian magnitude (empty for zero).
    fn to_be_bytes(&self) -> Vec<u8>;
    /// `None` if the value does not fit the backend.
    fn from_be_bytes(bytes: &[u8]) -> Option<Self>;

    /// `bytes` as a big-endian integer, reduced mod `m`.
    fn reduce_be_bytes(bytes: &[u8], m: &Self) -> Self {
        let radix = Self::from_u32(256).expect("256 fits every backend");
        let mut acc = Self::zero();
        for &b in bytes {
            acc = (acc * radix.clone() + Self::from_u8(b).expect("byte fits")) % m.clone();
        }
        acc
    }

    /// The exponent split into `count` little-endian digits of `w` bits.
    fn window_digits(&self, w: u32, count: usize) -> Vec<usize> {
        (0..count)
            .map(|i| {
                (0..w).fold(0usize, |d, j| {
                    d | (usize::from(self.bit(i as u64 * u64::from(w) + u64::from(j))) << j)
                })
            })
            .collect()
    }
}

/// Montgomery arithmetic with `R = 2^32` for odd moduli below `2^32`.
struct Montgomery32 {
    m: u64,
    /// `-m^-1 mod 2^32`.
    m_neg_inv: u32,
}

impl Montgomery32 {
    fn new(m: u64) -> Self {
        debug_assert!(m & 1 == 1 && m < 1 << 32);
        let m32 = m as u32;
        let mut inv = 1u32;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u32.wrapping_sub(m32.wrapping_mul(inv)));
        }
        Montgomery32 {
            m,
            m_neg_inv: inv.wrapping_neg(),
        }
    }

    #[inline]
    fn redc(&self, t: u64) -> u64 {
        let u = (t as u32).wrapping_mul(self.m_neg_inv);
        let r = ((u128::from(t) + u128::from(u) * u128::from(self.m)) >> 32) as u64;
        if r >= self.m {
            r - self.m
        } else {
            r
        }
    }

    fn pow(&self, base: u64, mut e: u64) -> u64 {
        let mut b = ((base % self.m) << 32) % self.m;
        let mut acc = (1u64 << 32) % self.m;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.redc(acc * b);
            }
            b = self.redc(b * b);
            e >>= 1;
        }
        self.redc(acc)
    }
}

impl GroupInt for u64 {
    const MAX_MODULUS_BITS: Option<u64> = Some(32);

    #[inline]
    fn mul_mod(&self, rhs: &Self, m: &Self) -> Self {
        (self * rhs) % m
    }

    fn pow_mod(&self, exp: &Self, m: &Self) -> Self {
        if m & 1 == 1 && *m > 1 {
            return Montgomery32::new(*m).pow(*self, *exp);
        }
        let mut base = self % m;
        let mut e = *exp;
        let mut acc = 1 % m;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % m;
            }
            base = base * base % m;
            e >>= 1;
        }
        acc
    }

    fn bits(&self) -> u64 {
        u64::from(64 - self.leading_zeros())
    }

    fn bit(&self, i: u64) -> bool {
        i < 64 && (self >> i) & 1 == 1
    }

    fn trailing_zeros(&self) -> u64 {
        u64::from(u64::trailing_zeros(*self))
    }

    fn shr(&self, n: u64) -> Self {
        if n >= 64 {
            0
        } else {
            self >> n
        }
    }

    fn low_u64(&self) -> u64 {
        *self
    }

    fn to_be_bytes(&self) -> Vec<u8> {
        let raw = u64::to_be_bytes(*self);
        let start = raw.iter().position(|&b| b != 0).unwrap_or(8);
        raw[start..].to_vec()
    }

    fn from_be_bytes(bytes: &[u8]) -> Option<Self> {
        let start = bytes.iter().position(|&b| b != 0).unwrap_or(bytes.len());
        let significant = &bytes[start..];
        if significant.len() > 8 {
            return None;
        }
        Some(significant.iter().fold(0u64, |acc, &b| (acc << 8) | u64::from(b)))
    }

    fn window_digits(&self, w: u32, count: usize) -> Vec<usize> {
        let mask = (1u64 << w) - 1;
        (0..count)
            .map(|i| {
                let shift = i as u64 * u64::from(w);
                if shift >= 64 {
                    0
                } else {
                    ((self >> shift) & mask) as usize
                }
            })
            .collect()
    }
}

impl GroupInt for BigUint {
    const MAX_MODULUS_BITS: Option<u64> = None;

    fn mul_mod(&self, rhs: &Self, m: &Self) -> Self {
        (self * rhs) % m
    }

    fn pow_mod(&self, exp: &Self, m: &Self) -> Self {
        self.modpow(exp, m)
    }

    fn bits(&self) -> u64 {
        BigUint::bits(self)
    }

    fn bit(&self, i: u64) -> bool {
        BigUint::bit(self, i)
    }

    fn trailing_zeros(&self) -> u64 {
        BigUint::trailing_zeros(self).unwrap_or(0)
    }

    fn shr(&self, n: u64) -> Self {
        self >> n
    }

    fn low_u64(&self) -> u64 {
        self.iter_u64_digits().next().unwrap_or(0)
    }

    fn to_be_bytes(&self) -> Vec<u8> {
        if self.is_zero() {
            Vec::new()
        } else {
            self.to_bytes_be()
        }
    }

    fn from_be_bytes(bytes: &[u8]) -> Option<Self> {
        Some(BigUint::from_bytes_be(bytes))
    }

    fn reduce_be_bytes(bytes: &[u8], m: &Self) -> Self {
        BigUint::from_bytes_be(bytes) % m
    }

    fn window_digits(&self, w: u32, count: usize) -> Vec<usize> {
        let limbs: Vec<u64> = self.iter_u64_digits().collect();
        let mask = (1u64 << w) - 1;
        (0..count)
            .map(|i| {
                let bit = i * w as usize;
                let (limb, off) = (bit / 64, bit % 64);
                let lo = limbs.get(limb).copied().unwrap_or(0) >> off;
                let hi = if off + w as usize > 64 {
                    limbs.get(limb + 1).copied().unwrap_or(0) << (64 - off)
                } else {
                    0
                };
                ((lo | hi) & mask) as usize
            })
            .collect()
    }
}

/// Jacobi symbol `(a / n)` for odd `n`.
pub fn jacobi<T: GroupInt>(a: &T, n: &T) -> i8 {
    let mut a = a.clone() % n.clone();
    let mut n = n.clone();
    let mut t = 1i8;
    while !a.is_zero() {
        let z = a.trailing_zeros();
        a = a.shr(z);
        if z % 2 == 1 && matches!(n.low_u64() % 8, 3 | 5) {
            t = -t;
        }
        std::mem::swap(&mut a, &mut n);
        if a.low_u64() % 4 == 3 && n.low_u64() % 4 == 3 {
            t = -t;
        }
        a = a % n.clone();
    }
    if n.is_one() {
        t
    } else {
        0
    }
}

/// Miller–Rabin with the deterministic base schedule of
/// [`e2ev_format::params::miller_rabin_base_seed`].
pub fn is_probable_prime<T: GroupInt>(n: &T) -> bool {
    let two = T::from_u8(2).expect("small");
    let three = T::from_u8(3).expect("small");
    if *n < two {
        return false;
    }
    if *n == two || *n == three {
        return true;
    }
    if !n.bit(0) {
        return false;
    }
    let n_minus_1 = n.clone() - T::one();
    let s = n_minus_1.trailing_zeros();
    let d = n_minus_1.shr(s);
    let span = n.clone() - three;
    let n_bytes = n.to_be_bytes();
    'bases: for i in 0..e2ev_format::params::MILLER_RABIN_ROUNDS {
        let seed = e2ev_format::params::miller_rabin_base_seed(&n_bytes, i);
        let a = T::reduce_be_bytes(&seed, &span) + two.clone();
        let mut x = a.pow_mod(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.mul_mod(&x, n);
            if x == n_minus_1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Comb table for exponentiation with a fixed base: `table[i][d]` holds
/// `base^(d * 2^(w*i))`, so an exponent costs one multiplication per window.
#[derive(Clone, Debug)]
pub struct FixedBase<T> {
    base: T,
    modulus: T,
    window: u32,
    table: Vec<Vec<T>>,
}

impl<T: GroupInt> FixedBase<T> {
    /// Table for exponents of up to `exp_bits` bits.
    pub fn new(base: &T, modulus: &T, exp_bits: u64) -> Self {
        let window = if exp_bits <= 64 { 8 } else { 6 };
        let windows = exp_bits.div_ceil(u64::from(window)) as usize;
        let mut table = Vec::with_capacity(windows);
        let mut row_base = base.clone() % modulus.clone();
        for _ in 0..windows {
            let mut row = Vec::with_capacity(1 << window);
            row.push(T::one());
            for d in 1..(1usize << window) {
                let next = row[d - 1].mul_mod(&row_base, modulus);
                row.push(next);
            }
            row_base = row[(1 << window) - 1].mul_mod(&row_base, modulus);
            table.push(row);
        }
        FixedBase {
            base: base.clone(),
            modulus: modulus.clone(),
            window,
            table,
        }
    }

    pub fn base(&self) -> &T {
        &self.base
    }

    pub fn pow(&self, exp: &T) -> T {
        if exp.bits() > self.table.len() as u64 * u64::from(self.window) {
            return self.base.pow_mod(exp, &self.modulus);
        }
        let digits = exp.window_digits(self.window, self.table.len());
        let mut acc = T::one();
        for (row, d) in self.table.iter().zip(digits) {
            if d != 0 {
                acc = acc.mul_mod(&row[d], &self.modulus);
            }
        }
        acc % self.modulus.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_primes_match_trial_division() {
        let trial = |n: u64| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d));
        for n in 0u64..2000 {
            assert_eq!(is_probable_prime(&n), trial(n), "n = {n}");
            assert_eq!(is_probable_prime(&BigUint::from(n)), trial(n), "n = {n}");
        }
    }

    #[test]
    fn carmichael_numbers_are_composite() {
        for n in [561u64, 1105, 1729, 2465, 2821, 6601, 8911, 3215031751] {
            assert!(!is_probable_prime(&n));
        }
    }

    #[test]
    fn jacobi_matches_euler_criterion_mod_23() {
        for a in 1u64..23 {
            let euler = a.pow_mod(&11, &23);
            let expected = if euler == 1 { 1 } else { -1 };
            assert_eq!(jacobi(&a, &23u64), expected, "a = {a}");
        }
        assert_eq!(jacobi(&0u64, &23u64), 0);
    }

    proptest! {
        #[test]
        fn backends_agree(a in 0u64..0xffff_ff2f, e in any::<u32>()) {
            let p = 0xffff_ff2fu64;
            let big = BigUint::from(a).modpow(&BigUint::from(e), &BigUint::from(p));
            prop_assert_eq!(BigUint::from(a.pow_mod(&u64::from(e), &p)), big.clone());
            let generic = <BigUint as GroupInt>::pow_mod(&BigUint::from(a), &BigUint::from(e), &BigUint::from(p));
            prop_assert_eq!(generic, big);
        }

        #[test]
        fn u64_pow_matches_bigint_for_any_modulus(a in any::<u32>(), e in any::<u64>(), m in 1u64..=u64::from(u32::MAX)) {
            let big = BigUint::from(a).modpow(&BigUint::from(e), &BigUint::from(m));
            prop_assert_eq!(BigUint::from(u64::from(a).pow_mod(&e, &m)), big);
        }

        #[test]
        fn fixed_base_matches_modpow(e in any::<u64>(), base in 2u64..0xffff_ff2f) {
            let p = 0xffff_ff2fu64;
            let table = FixedBase::new(&base, &p, 64);
            prop_assert_eq!(table.pow(&e), base.pow_mod(&e, &p));
            let big_table = FixedBase::new(&BigUint::from(base), &BigUint::from(p), 70);
            prop_assert_eq!(big_table.pow(&BigUint::from(e)), BigUint::from(base.pow_mod(&e, &p)));
        }

        #[test]
        fn jacobi_backends_agree(a in any::<u32>(), n in (1u64..u64::from(u32::MAX)).prop_map(|n| n | 1)) {
            let a = u64::from(a);
            prop_assert_eq!(jacobi(&a, &n), jacobi(&BigUint::from(a), &BigUint::from(n)));
        }

        #[test]
        fn byte_codec_round_trips(v in any::<u64>()) {
            let bytes = GroupInt::to_be_bytes(&v);
            prop_assert_eq!(<u64 as GroupInt>::from_be_bytes(&bytes), Some(v));
            prop_assert_eq!(GroupInt::to_be_bytes(&BigUint::from(v)), bytes);
        }
    }
}
