//! Bit-string helpers shared by every layer.
//!
//! Bit strings are `Vec<bool>` with index 0 as the most significant bit.
//! Small labels (function inputs, images, Hadamard outcomes) are carried as
//! `u32` with the same MSB-first convention.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitsError {
    #[error("invalid bit character {0:?} (expected '0' or '1')")]
    InvalidChar(char),
    #[error("bit string too wide for a {width}-bit label")]
    TooWide { width: usize },
}

/// Parses a string of `0`/`1` characters. Underscores and whitespace are skipped.
pub fn parse_bits(s: &str) -> Result<Vec<bool>, BitsError> {
    s.chars()
        .filter(|c| !c.is_whitespace() && *c != '_')
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(BitsError::InvalidChar(other)),
        })
        .collect()
}

pub fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

pub fn xor(a: &[bool], b: &[bool]) -> Vec<bool> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

pub fn weight(bits: &[bool]) -> usize {
    bits.iter().filter(|&&b| b).count()
}

/// Inner product mod 2 of two labels.
pub fn dot(a: u32, b: u32) -> bool {
    (a & b).count_ones() % 2 == 1
}

pub fn to_u32(bits: &[bool]) -> Result<u32, BitsError> {
    if bits.len() > 32 {
        return Err(BitsError::TooWide { width: bits.len() });
    }
    Ok(bits.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32))
}

pub fn from_u32(value: u32, width: usize) -> Vec<bool> {
    (0..width).rev().map(|i| (value >> i) & 1 == 1).collect()
}

/// Packs bits MSB-first into bytes, zero padding the final byte.
pub fn pack(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i)))
        })
        .collect()
}

/// Inverse of [`pack`]; `len` may be shorter than `8 * bytes.len()`.
pub fn unpack(bytes: &[u8], len: usize) -> Vec<bool> {
    (0..len)
        .map(|i| bytes.get(i / 8).is_some_and(|byte| (byte >> (7 - i % 8)) & 1 == 1))
        .collect()
}

pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    unpack(bytes, bytes.len() * 8)
}

/// Accumulates variable-width fields into a packed MSB-first bit stream.
#[derive(Debug, Default, Clone)]
pub struct BitWriter {
    bits: Vec<bool>,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push_bit(&mut self, bit: bool) {
        self.bits.push(bit);
    }

    pub fn push_bits(&mut self, bits: &[bool]) {
        self.bits.extend_from_slice(bits);
    }

    pub fn push_uint(&mut self, value: u32, width: usize) {
        self.bits.extend(from_u32(value, width));
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    pub fn into_bytes(self) -> Vec<u8> {
        pack(&self.bits)
    }
}
