//! Symmetric helpers: raw XOR pads and a keyed stream scheme.
//!
//! The stream scheme is `nonce ∥ m ⊕ SHAKE("CD-SKE", key ∥ nonce)` with a
//! fresh 16-byte nonce; it stands in for the symmetric base scheme under the
//! secret-key RNCE.

use rand::Rng;

use super::oracle::RandomOracle;
use super::PkeError;

pub const SYM_KEY_LEN: usize = 32;
pub const NONCE_LEN: usize = 16;
const TAG: &str = "CD-SKE";

pub fn otp_xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    assert_eq!(a.len(), b.len(), "pad length mismatch");
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

pub fn sym_keygen<R: Rng + ?Sized>(rng: &mut R) -> [u8; SYM_KEY_LEN] {
    let mut key = [0u8; SYM_KEY_LEN];
    rng.fill_bytes(&mut key);
    key
}

fn stream(key: &[u8], nonce: &[u8], len: usize) -> Vec<u8> {
    let mut input = Vec::with_capacity(key.len() + nonce.len());
    input.extend_from_slice(key);
    input.extend_from_slice(nonce);
    RandomOracle::new(TAG, len).hash(&input)
}

pub fn sym_enc<R: Rng + ?Sized>(key: &[u8], m: &[u8], rng: &mut R) -> Result<Vec<u8>, PkeError> {
    if key.len() != SYM_KEY_LEN {
        return Err(PkeError::MalformedKey);
    }
    let mut nonce = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce);
    let mut out = nonce.to_vec();
    out.extend(otp_xor(m, &stream(key, &nonce, m.len())));
    Ok(out)
}

pub fn sym_dec(key: &[u8], ct: &[u8]) -> Result<Vec<u8>, PkeError> {
    if key.len() != SYM_KEY_LEN {
        return Err(PkeError::MalformedKey);
    }
    if ct.len() < NONCE_LEN {
        return Err(PkeError::MalformedCiphertext);
    }
    let (nonce, body) = ct.split_at(NONCE_LEN);
    Ok(otp_xor(body, &stream(key, nonce, body.len())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn round_trip_and_freshness() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let key = sym_keygen(&mut rng);
        let a = sym_enc(&key, b"hello", &mut rng).unwrap();
        let b = sym_enc(&key, b"hello", &mut rng).unwrap();
        assert_ne!(a, b);
        assert_eq!(sym_dec(&key, &a).unwrap(), b"hello");
        assert_eq!(sym_dec(&key, &b).unwrap(), b"hello");
        assert_eq!(sym_dec(&key, &a[..3]), Err(PkeError::MalformedCiphertext));
    }

    #[test]
    fn xor_pad() {
        assert_eq!(otp_xor(&[0b1100], &[0b1010]), vec![0b0110]);
    }
}
