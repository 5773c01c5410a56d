//! Random oracle instantiated with SHAKE-256.
//!
//! Input encoding: `tag_len (1 byte) ∥ tag ∥ payload`.

use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

pub const TAG_H: &str = "CD-H";
pub const TAG_T: &str = "CD-T";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RandomOracle {
    domain_tag: String,
    output_len: usize,
}

impl RandomOracle {
    /// Panics if the tag is longer than 255 bytes.
    pub fn new(domain_tag: impl Into<String>, output_len: usize) -> Self {
        let domain_tag = domain_tag.into();
        assert!(domain_tag.len() <= u8::MAX as usize, "domain tag too long");
        Self { domain_tag, output_len }
    }

    pub fn domain_tag(&self) -> &str {
        &self.domain_tag
    }

    pub fn output_len(&self) -> usize {
        self.output_len
    }

    pub fn hash(&self, input: &[u8]) -> Vec<u8> {
        let mut out = vec![0u8; self.output_len];
        self.reader(input).read(&mut out);
        out
    }

    /// Streaming access to the same output, for callers that need more bytes
    /// than `output_len` (rejection sampling, pads).
    pub fn reader(&self, input: &[u8]) -> impl XofReader {
        let mut h = Shake256::default();
        h.update(&[self.domain_tag.len() as u8]);
        h.update(self.domain_tag.as_bytes());
        h.update(input);
        h.finalize_xof()
    }
}

pub fn ro_hash(oracle: &RandomOracle, input: &[u8]) -> Vec<u8> {
    oracle.hash(input)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_exact_length() {
        let h = RandomOracle::new(TAG_H, 37);
        assert_eq!(h.hash(b"abc"), h.hash(b"abc"));
        assert_eq!(h.hash(b"abc").len(), 37);
        assert_eq!(RandomOracle::new(TAG_H, 0).hash(b"abc"), Vec::<u8>::new());
    }

    #[test]
    fn one_bit_change_changes_output() {
        let h = RandomOracle::new(TAG_H, 16);
        for bit in 0..24 {
            let mut x = *b"xyz";
            x[bit / 8] ^= 1 << (bit % 8);
            assert_ne!(h.hash(&x), h.hash(b"xyz"));
        }
    }

    #[test]
    fn domain_separation() {
        let h = RandomOracle::new(TAG_H, 16);
        let t = RandomOracle::new(TAG_T, 16);
        assert_ne!(h.hash(b"m"), t.hash(b"m"));
        // tag/payload boundary is unambiguous: ("CD-H", "x") vs ("CD-", "Hx")
        assert_ne!(h.hash(b"x"), RandomOracle::new("CD-", 16).hash(b"Hx"));
    }

    #[test]
    fn matches_plain_shake_on_encoded_input() {
        let mut h = Shake256::default();
        h.update(b"\x04CD-Hpayload");
        let mut expected = [0u8; 20];
        h.finalize_xof().read(&mut expected);
        assert_eq!(RandomOracle::new(TAG_H, 20).hash(b"payload"), expected);
    }

    #[test]
    fn longer_output_extends_shorter() {
        let short = RandomOracle::new(TAG_T, 8).hash(b"q");
        let long = RandomOracle::new(TAG_T, 32).hash(b"q");
        assert_eq!(&long[..8], &short[..]);
    }
}
