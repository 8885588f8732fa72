//! Pinned group parameters (hex, fixed width).

use crate::doc::GroupDoc;

/// Hand-checkable group: p = 23, q = 11, g = 2.
pub const TEST_P: &str = "17";
pub const TEST_Q: &str = "0b";
pub const TEST_G: &str = "02";

/// Largest safe prime below 2^32: p = 4294967087, q = 2147483543, g = 2.
pub const TOY_P: &str = "ffffff2f";
pub const TOY_Q: &str = "7fffff97";
pub const TOY_G: &str = "00000002";

/// 2048-bit MODP safe prime (RFC 3526 group 14), q = (p-1)/2, g = 2.
/// p ≡ 7 (mod 8), so 2 is a quadratic residue and generates the order-q subgroup.
pub const PRODUCTION_P: &str = concat!(
    "ffffffffffffffffc90fdaa22168c234c4c6628b80dc1cd129024e088a67cc74",
    "020bbea63b139b22514a08798e3404ddef9519b3cd3a431b302b0a6df25f1437",
    "4fe1356d6d51c245e485b576625e7ec6f44c42e9a637ed6b0bff5cb6f406b7ed",
    "ee386bfb5a899fa5ae9f24117c4b1fe649286651ece45b3dc2007cb8a163bf05",
    "98da48361c55d39a69163fa8fd24cf5f83655d23dca3ad961c62f356208552bb",
    "9ed529077096966d670c354e4abc9804f1746c08ca18217c32905e462e36ce3b",
    "e39e772c180e86039b2783a2ec07a28fb5c55df06f4c52c9de2bcbf695581718",
    "3995497cea956ae515d2261898fa051015728e5a8aacaa68ffffffffffffffff",
);
pub const PRODUCTION_Q: &str = concat!(
    "7fffffffffffffffe487ed5110b4611a62633145c06e0e68948127044533e63a",
    "0105df531d89cd9128a5043cc71a026ef7ca8cd9e69d218d98158536f92f8a1b",
    "a7f09ab6b6a8e122f242dabb312f3f637a262174d31bf6b585ffae5b7a035bf6",
    "f71c35fdad44cfd2d74f9208be258ff324943328f6722d9ee1003e5c50b1df82",
    "cc6d241b0e2ae9cd348b1fd47e9267afc1b2ae91ee51d6cb0e3179ab1042a95d",
    "cf6a9483b84b4b36b3861aa7255e4c0278ba3604650c10be19482f23171b671d",
    "f1cf3b960c074301cd93c1d17603d147dae2aef837a62964ef15e5fb4aac0b8c",
    "1ccaa4be754ab5728ae9130c4c7d02880ab9472d455655347fffffffffffffff",
);

fn production_g() -> String {
    let mut g = "0".repeat(PRODUCTION_P.len() - 2);
    g.push_str("02");
    g
}

pub fn test_group() -> GroupDoc {
    GroupDoc {
        p: TEST_P.into(),
        q: TEST_Q.into(),
        g: TEST_G.into(),
    }
}

pub fn toy_group() -> GroupDoc {
    GroupDoc {
        p: TOY_P.into(),
        q: TOY_Q.into(),
        g: TOY_G.into(),
    }
}

pub fn production_group() -> GroupDoc {
    GroupDoc {
        p: PRODUCTION_P.into(),
        q: PRODUCTION_Q.into(),
        g: production_g(),
    }
}

/// Number of Miller–Rabin rounds applied to unpinned group parameters.
pub const MILLER_RABIN_ROUNDS: u32 = 32;

/// Seed for Miller–Rabin base `i` when testing `n` (minimal big-endian bytes).
///
/// The base is `2 + (seed as a big-endian integer) mod (n - 3)`, so every
/// conforming implementation tests the same bases and reaches the same
/// verdict on adversarial inputs.
pub fn miller_rabin_base_seed(n: &[u8], i: u32) -> [u8; 32] {
    crate::layout::framed_sha256(&[b"e2ev/mr-base", n, &i.to_be_bytes()])
}

/// True for the three pinned parameter sets, whose primality is established
/// offline and need not be re-tested on every load.
pub fn is_pinned(group: &GroupDoc) -> bool {
    [test_group(), toy_group(), production_group()].contains(group)
}
