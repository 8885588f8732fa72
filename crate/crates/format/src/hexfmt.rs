//! Fixed-width, lowercase, big-endian hex.
//!
//! Decoding is strict: exactly `2 * width` characters from `[0-9a-f]`.
//! Upper-case digits are rejected so every value has one encoding.

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HexError {
    #[error("expected {expected} hex characters, found {found}")]
    Length { expected: usize, found: usize },
    #[error("invalid hex character {0:?}")]
    Char(char),
    #[error("value needs {needed} bytes but the field is {width} bytes wide")]
    Overflow { needed: usize, width: usize },
}

const DIGITS: &[u8; 16] = b"0123456789abcdef";

/// Encodes `bytes` as lowercase hex with no padding.
pub fn encode(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        out.push(DIGITS[(b >> 4) as usize] as char);
        out.push(DIGITS[(b & 0x0f) as usize] as char);
    }
    out
}

/// Left-pads a minimal big-endian magnitude to `width` bytes and hex-encodes it.
pub fn encode_fixed(magnitude: &[u8], width: usize) -> Result<String, HexError> {
    let trimmed = trim_leading_zeros(magnitude);
    if trimmed.len() > width {
        return Err(HexError::Overflow {
            needed: trimmed.len(),
            width,
        });
    }
    let mut padded = vec![0u8; width - trimmed.len()];
    padded.extend_from_slice(trimmed);
    Ok(encode(&padded))
}

/// Decodes exactly `width` bytes of lowercase hex.
pub fn decode_fixed(s: &str, width: usize) -> Result<Vec<u8>, HexError> {
    let raw = s.as_bytes();
    if raw.len() != width * 2 {
        return Err(HexError::Length {
            expected: width * 2,
            found: raw.len(),
        });
    }
    raw.chunks_exact(2)
        .map(|pair| Ok((nibble(pair[0])? << 4) | nibble(pair[1])?))
        .collect()
}

/// Decodes a 32-byte digest.
pub fn decode_digest(s: &str) -> Result<[u8; 32], HexError> {
    let v = decode_fixed(s, 32)?;
    let mut out = [0u8; 32];
    out.copy_from_slice(&v);
    Ok(out)
}

fn nibble(c: u8) -> Result<u8, HexError> {
    match c {
        b'0'..=b'9' => Ok(c - b'0'),
        b'a'..=b'f' => Ok(c - b'a' + 10),
        _ => Err(HexError::Char(c as char)),
    }
}

fn trim_leading_zeros(bytes: &[u8]) -> &[u8] {
    let start = bytes.iter().position(|&b| b != 0).unwrap_or(bytes.len());
    &bytes[start..]
}

/// Byte width of fixed-width fields for a modulus given in hex.
///
/// The modulus itself is written without a leading zero byte, so its own
/// encoding defines the width.
pub fn width_of_modulus(p_hex: &str) -> Result<usize, HexError> {
    if p_hex.is_empty() || !p_hex.len().is_multiple_of(2) {
        return Err(HexError::Length {
            expected: p_hex.len() + 1,
            found: p_hex.len(),
        });
    }
    let width = p_hex.len() / 2;
    let bytes = decode_fixed(p_hex, width)?;
    if bytes[0] == 0 {
        return Err(HexError::Overflow {
            needed: width - 1,
            width,
        });
    }
    Ok(width)
}
