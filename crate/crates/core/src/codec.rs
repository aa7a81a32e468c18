//! Canonical binary encoding of point tables and the FNV-1a digest built on it.
//!
//! Layout (all little-endian):
//!
//! | bytes      | content                         |
//! |------------|---------------------------------|
//! | 4          | magic `CKZ1`                    |
//! | 8          | `n` as u64                      |
//! | 8          | `d` as u64                      |
//! | 1          | `has_weights` (0 or 1)          |
//! | 8·n·d      | coordinates as f64, row-major   |
//! | 8·n        | weights as f64 (if has_weights) |

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"CKZ1";
const HEADER_LEN: usize = 4 + 8 + 8 + 1;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Decoded contents of a `CKZ1` buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub n: usize,
    pub d: usize,
    pub coords: Vec<f64>,
    pub weights: Option<Vec<f64>>,
}

pub fn encode(n: usize, d: usize, coords: &[f64], weights: Option<&[f64]>) -> Vec<u8> {
    assert_eq!(coords.len(), n * d, "coordinate buffer does not match n*d");
    if let Some(w) = weights {
        assert_eq!(w.len(), n, "weight buffer does not match n");
    }
    let extra = weights.map_or(0, |w| w.len());
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * (coords.len() + extra));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(d as u64).to_le_bytes());
    out.push(u8::from(weights.is_some()));
    for v in coords {
        out.extend_from_slice(&v.to_le_bytes());
    }
    if let Some(w) = weights {
        for v in w {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode(bytes: &[u8]) -> Result<RawTable> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(Error::InvalidInput("missing CKZ1 header".into()));
    }
    let read_u64 = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let n = usize::try_from(read_u64(4)).map_err(|_| Error::InvalidInput("n too large".into()))?;
    let d = usize::try_from(read_u64(12)).map_err(|_| Error::InvalidInput("d too large".into()))?;
    let has_weights = match bytes[20] {
        0 => false,
        1 => true,
        other => {
            return Err(Error::InvalidInput(format!("has_weights byte must be 0 or 1, got {other}")))
        }
    };
    let values = n
        .checked_mul(d)
        .and_then(|nd| nd.checked_add(if has_weights { n } else { 0 }))
        .ok_or_else(|| Error::InvalidInput("table size overflows".into()))?;
    let expected = values
        .checked_mul(8)
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::InvalidInput("table size overflows".into()))?;
    if bytes.len() != expected {
        return Err(Error::InvalidInput(format!(
            "expected {expected} bytes for n={n}, d={d}, got {}",
            bytes.len()
        )));
    }
    let mut floats = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let coords: Vec<f64> = floats.by_ref().take(n * d).collect();
    let weights = has_weights.then(|| floats.collect());
    Ok(RawTable { n, d, coords, weights })
}
