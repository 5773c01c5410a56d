//! INSECURE deterministic stand-in for a PKE.
//!
//! The public key and the secret key are the same 32-byte pad key, and
//! encryption is `m ⊕ SHAKE("CDP-STUB", key)`. Anyone holding the public key
//! can decrypt. It exists for golden vectors and exhaustive tests only.

use rand::Rng;

use super::oracle::RandomOracle;
use super::sym::otp_xor;

pub const KEY_LEN: usize = 32;
const TAG: &str = "CDP-STUB";

pub fn keygen<R: Rng + ?Sized>(rng: &mut R) -> [u8; KEY_LEN] {
    let mut key = [0u8; KEY_LEN];
    rng.fill_bytes(&mut key);
    key
}

pub fn apply_pad(key: &[u8], m: &[u8]) -> Vec<u8> {
    otp_xor(m, &RandomOracle::new(TAG, m.len()).hash(key))
}
