//! Receiver non-committing encryption by double encryption.
//!
//! Every plaintext bit gets its own slot holding two base key pairs. The
//! honest secret key keeps one of them (index `z_i`); the auxiliary trapdoor
//! keeps both plus a second index string `z*` used to fake ciphertexts.
//!
//! With a public-key base the encryption key is public. With the symmetric
//! base it is a secret encryption key (`ek`) and the decryption key is `dk`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{kind, Canonical, CodecError, Decoder, Encoder};
use crate::primitives::{self, sym, PkeError, SchemeId};

/// Engineering cap on the plaintext length in bits.
pub const MAX_SLOTS: usize = 4096;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RnceError {
    #[error("plaintext length {0} outside 1..={MAX_SLOTS}")]
    BadLength(usize),
    #[error("slot count mismatch: expected {expected}, found {found}")]
    SlotMismatch { expected: usize, found: usize },
    #[error("base scheme mismatch between key and ciphertext")]
    BaseMismatch,
    #[error("slot {0} decrypted to a non-bit value")]
    NotABit(usize),
    #[error(transparent)]
    Base(#[from] PkeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RnceBase {
    Public {
        scheme: SchemeId,
        lambda: u32,
    },
    /// Symmetric stream scheme; yields the secret-key variant.
    Secret,
}

impl RnceBase {
    fn keygen<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(Vec<u8>, Vec<u8>), RnceError> {
        match *self {
            RnceBase::Public { scheme, lambda } => {
                let kp = primitives::pke_keygen(scheme, lambda, rng)?;
                Ok((kp.public_key, kp.secret_key))
            }
            RnceBase::Secret => {
                let k = sym::sym_keygen(rng).to_vec();
                Ok((k.clone(), k))
            }
        }
    }

    fn enc<R: Rng + ?Sized>(&self, key: &[u8], bit: bool, rng: &mut R) -> Result<Vec<u8>, RnceError> {
        Ok(match self {
            RnceBase::Public { .. } => primitives::pke_enc(key, &[bit as u8], rng)?,
            RnceBase::Secret => sym::sym_enc(key, &[bit as u8], rng)?,
        })
    }

    fn dec(&self, key: &[u8], ct: &[u8], slot: usize) -> Result<bool, RnceError> {
        let m = match self {
            RnceBase::Public { .. } => primitives::pke_dec(key, ct)?,
            RnceBase::Secret => sym::sym_dec(key, ct)?,
        };
        match m.as_slice() {
            [0] => Ok(false),
            [1] => Ok(true),
            _ => Err(RnceError::NotABit(slot)),
        }
    }

    fn encode_into(&self, enc: &mut Encoder) {
        match *self {
            RnceBase::Public { scheme, lambda } => {
                enc.put_u8(1);
                enc.put_u8(scheme.byte());
                enc.put_u16(lambda as u16);
            }
            RnceBase::Secret => enc.put_u8(2),
        }
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        match dec.u8()? {
            1 => {
                let scheme = SchemeId::from_byte(dec.u8()?).map_err(|e| CodecError::invalid(e.to_string()))?;
                Ok(RnceBase::Public {
                    scheme,
                    lambda: dec.u16()? as u32,
                })
            }
            2 => Ok(RnceBase::Secret),
            other => Err(CodecError::invalid(format!("rnce base tag {other}"))),
        }
    }
}

/// Encryption key: both base keys of every slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RncePublicKey {
    pub base: RnceBase,
    pub slots: Vec<[Vec<u8>; 2]>,
}

/// Decryption key: `(z_i, sk_{i,z_i})` per slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RnceSecretKey {
    pub base: RnceBase,
    pub slots: Vec<(bool, Vec<u8>)>,
}

/// Trapdoor `(sk_{i,0}, sk_{i,1})` for every slot plus `z*`. SECRET.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RnceAux {
    pub base: RnceBase,
    pub secret_keys: Vec<[Vec<u8>; 2]>,
    pub z_star: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RnceCiphertext {
    pub base: RnceBase,
    pub slots: Vec<[Vec<u8>; 2]>,
}

impl RncePublicKey {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

impl RnceSecretKey {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn index_bits(&self) -> Vec<bool> {
        self.slots.iter().map(|(z, _)| *z).collect()
    }
}

impl RnceCiphertext {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Byte length of every component, slot by slot.
    pub fn shape(&self) -> Vec<[usize; 2]> {
        self.slots.iter().map(|[a, b]| [a.len(), b.len()]).collect()
    }
}

fn check_len(len: usize) -> Result<(), RnceError> {
    if (1..=MAX_SLOTS).contains(&len) {
        Ok(())
    } else {
        Err(RnceError::BadLength(len))
    }
}

fn check_slots(expected: usize, found: usize) -> Result<(), RnceError> {
    if expected == found {
        Ok(())
    } else {
        Err(RnceError::SlotMismatch { expected, found })
    }
}

pub fn rnce_keygen<R: Rng + ?Sized>(
    base: RnceBase,
    len: usize,
    rng: &mut R,
) -> Result<(RncePublicKey, RnceSecretKey, RnceAux), RnceError> {
    check_len(len)?;
    let mut pk_slots = Vec::with_capacity(len);
    let mut sk_slots = Vec::with_capacity(len);
    let mut aux_keys = Vec::with_capacity(len);
    for _ in 0..len {
        let (pk0, sk0) = base.keygen(rng)?;
        let (pk1, sk1) = base.keygen(rng)?;
        pk_slots.push([pk0, pk1]);
        aux_keys.push([sk0, sk1]);
    }
    let z: Vec<bool> = (0..len).map(|_| rng.gen()).collect();
    let z_star: Vec<bool> = (0..len).map(|_| rng.gen()).collect();
    for (zi, keys) in z.iter().zip(&aux_keys) {
        sk_slots.push((*zi, keys[*zi as usize].clone()));
    }
    Ok((
        RncePublicKey { base, slots: pk_slots },
        RnceSecretKey { base, slots: sk_slots },
        RnceAux {
            base,
            secret_keys: aux_keys,
            z_star,
        },
    ))
}

pub fn rnce_enc<R: Rng + ?Sized>(pk: &RncePublicKey, m: &[bool], rng: &mut R) -> Result<RnceCiphertext, RnceError> {
    check_slots(pk.len(), m.len())?;
    let slots = pk
        .slots
        .iter()
        .zip(m)
        .map(|([k0, k1], &bit)| Ok([pk.base.enc(k0, bit, rng)?, pk.base.enc(k1, bit, rng)?]))
        .collect::<Result<_, RnceError>>()?;
    Ok(RnceCiphertext { base: pk.base, slots })
}

pub fn rnce_dec(sk: &RnceSecretKey, ct: &RnceCiphertext) -> Result<Vec<bool>, RnceError> {
    check_slots(sk.len(), ct.len())?;
    if sk.base != ct.base {
        return Err(RnceError::BaseMismatch);
    }
    sk.slots
        .iter()
        .zip(&ct.slots)
        .enumerate()
        .map(|(i, ((z, key), comps))| sk.base.dec(key, &comps[*z as usize], i))
        .collect()
}

/// Fake ciphertext: component `z*_i` encrypts 0, component `1 − z*_i` encrypts 1.
pub fn rnce_fake<R: Rng + ?Sized>(
    pk: &RncePublicKey,
    _sk: &RnceSecretKey,
    aux: &RnceAux,
    rng: &mut R,
) -> Result<RnceCiphertext, RnceError> {
    check_slots(pk.len(), aux.z_star.len())?;
    let slots = pk
        .slots
        .iter()
        .zip(&aux.z_star)
        .map(|([k0, k1], &zs)| {
            // component b carries b ⊕ z*
            Ok([pk.base.enc(k0, zs, rng)?, pk.base.enc(k1, !zs, rng)?])
        })
        .collect::<Result<_, RnceError>>()?;
    Ok(RnceCiphertext { base: pk.base, slots })
}

/// Secret key opening a fake ciphertext to `m*`: slot `i` gets index `z*_i ⊕ m*_i`.
pub fn rnce_reveal(
    pk: &RncePublicKey,
    _sk: &RnceSecretKey,
    aux: &RnceAux,
    fake_ct: &RnceCiphertext,
    m_star: &[bool],
) -> Result<RnceSecretKey, RnceError> {
    check_slots(pk.len(), m_star.len())?;
    check_slots(pk.len(), fake_ct.len())?;
    check_slots(pk.len(), aux.secret_keys.len())?;
    let slots = aux
        .secret_keys
        .iter()
        .zip(&aux.z_star)
        .zip(m_star)
        .map(|((keys, &zs), &mi)| {
            let idx = zs ^ mi;
            (idx, keys[idx as usize].clone())
        })
        .collect();
    Ok(RnceSecretKey { base: aux.base, slots })
}

fn put_pairs(enc: &mut Encoder, pairs: &[[Vec<u8>; 2]]) {
    enc.put_u32(pairs.len() as u32);
    for [a, b] in pairs {
        enc.put_bytes(a);
        enc.put_bytes(b);
    }
}

fn get_pairs(dec: &mut Decoder<'_>) -> Result<Vec<[Vec<u8>; 2]>, CodecError> {
    let n = dec.u32()? as usize;
    if n > MAX_SLOTS {
        return Err(CodecError::invalid("too many slots"));
    }
    (0..n)
        .map(|_| Ok([dec.bytes()?.to_vec(), dec.bytes()?.to_vec()]))
        .collect()
}

impl Canonical for RncePublicKey {
    const KIND: u8 = kind::RNCE_PUBLIC_KEY;

    fn encode_into(&self, enc: &mut Encoder) {
        self.base.encode_into(enc);
        put_pairs(enc, &self.slots);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            base: RnceBase::decode_from(dec)?,
            slots: get_pairs(dec)?,
        })
    }
}

impl Canonical for RnceCiphertext {
    const KIND: u8 = kind::RNCE_CIPHERTEXT;

    fn encode_into(&self, enc: &mut Encoder) {
        self.base.encode_into(enc);
        put_pairs(enc, &self.slots);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            base: RnceBase::decode_from(dec)?,
            slots: get_pairs(dec)?,
        })
    }
}

impl Canonical for RnceSecretKey {
    const KIND: u8 = kind::RNCE_SECRET_KEY;

    fn encode_into(&self, enc: &mut Encoder) {
        self.base.encode_into(enc);
        enc.put_u32(self.slots.len() as u32);
        for (z, key) in &self.slots {
            enc.put_bool(*z);
            enc.put_bytes(key);
        }
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let base = RnceBase::decode_from(dec)?;
        let n = dec.u32()? as usize;
        if n > MAX_SLOTS {
            return Err(CodecError::invalid("too many slots"));
        }
        let slots = (0..n)
            .map(|_| Ok((dec.bool()?, dec.bytes()?.to_vec())))
            .collect::<Result<_, CodecError>>()?;
        Ok(Self { base, slots })
    }
}

impl Canonical for RnceAux {
    const KIND: u8 = kind::RNCE_AUX;

    fn encode_into(&self, enc: &mut Encoder) {
        self.base.encode_into(enc);
        put_pairs(enc, &self.secret_keys);
        enc.put_bits(&self.z_star);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let base = RnceBase::decode_from(dec)?;
        let secret_keys = get_pairs(dec)?;
        let z_star = dec.bits()?;
        if z_star.len() != secret_keys.len() {
            return Err(CodecError::invalid("z* length"));
        }
        Ok(Self {
            base,
            secret_keys,
            z_star,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::from_u32;
    use crate::codec::{canonical_decode, canonical_encode};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    const STUB: RnceBase = RnceBase::Public {
        scheme: SchemeId::TestStub,
        lambda: 128,
    };
    const REGEV: RnceBase = RnceBase::Public {
        scheme: SchemeId::RegevRef,
        lambda: 128,
    };

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    /// Reads the plaintext bit of one component with its matching base key.
    fn component_bit(aux: &RnceAux, ct: &RnceCiphertext, slot: usize, b: usize) -> bool {
        aux.base
            .dec(&aux.secret_keys[slot][b], &ct.slots[slot][b], slot)
            .unwrap()
    }

    #[test]
    fn keygen_structure_and_determinism() {
        let (pk, sk, aux) = rnce_keygen(STUB, 8, &mut rng(1)).unwrap();
        assert_eq!(pk.slots.len() * 2, 16);
        for (i, (z, key)) in sk.slots.iter().enumerate() {
            assert_eq!(key, &aux.secret_keys[i][*z as usize]);
        }
        let again = rnce_keygen(STUB, 8, &mut rng(1)).unwrap();
        assert_eq!(again, (pk, sk, aux));
        let (_, sk1, aux1) = rnce_keygen(STUB, 1, &mut rng(2)).unwrap();
        let (_, sk2, aux2) = rnce_keygen(STUB, 1, &mut rng(2)).unwrap();
        assert_eq!((sk1.index_bits(), aux1.z_star), (sk2.index_bits(), aux2.z_star));
        assert_eq!(rnce_keygen(STUB, 0, &mut rng(0)).unwrap_err(), RnceError::BadLength(0));
    }

    #[test]
    fn encryption_duplicates_each_bit() {
        let (pk, _, aux) = rnce_keygen(STUB, 2, &mut rng(3)).unwrap();
        let ct = rnce_enc(&pk, &[true, false], &mut rng(4)).unwrap();
        for b in 0..2 {
            assert!(component_bit(&aux, &ct, 0, b));
            assert!(!component_bit(&aux, &ct, 1, b));
        }
        let (pk1, _, aux1) = rnce_keygen(STUB, 1, &mut rng(5)).unwrap();
        let ct = rnce_enc(&pk1, &[false], &mut rng(5)).unwrap();
        assert!(!component_bit(&aux1, &ct, 0, 0) && !component_bit(&aux1, &ct, 0, 1));
    }

    #[test]
    fn exhaustive_correctness_small() {
        for len in 1..=3 {
            let (pk, sk, _) = rnce_keygen(STUB, len, &mut rng(len as u64)).unwrap();
            for v in 0..1u32 << len {
                let m = from_u32(v, len);
                let ct = rnce_enc(&pk, &m, &mut rng(v as u64)).unwrap();
                assert_eq!(rnce_dec(&sk, &ct).unwrap(), m);
            }
        }
    }

    #[test]
    fn regev_and_secret_bases() {
        let (pk, sk, _) = rnce_keygen(REGEV, 3, &mut rng(6)).unwrap();
        let mut r = rng(7);
        let a = rnce_enc(&pk, &[true, false, true], &mut r).unwrap();
        let b = rnce_enc(&pk, &[true, false, true], &mut r).unwrap();
        assert_ne!(a, b);
        assert_eq!(rnce_dec(&sk, &a).unwrap(), vec![true, false, true]);
        let (ek, dk, _) = rnce_keygen(RnceBase::Secret, 4, &mut rng(8)).unwrap();
        for v in 0..16 {
            let m = from_u32(v, 4);
            assert_eq!(rnce_dec(&dk, &rnce_enc(&ek, &m, &mut r).unwrap()).unwrap(), m);
        }
    }

    #[test]
    fn fake_layout() {
        for seed in 0..16 {
            let (pk, sk, aux) = rnce_keygen(STUB, 1, &mut rng(seed)).unwrap();
            let fake = rnce_fake(&pk, &sk, &aux, &mut rng(seed)).unwrap();
            let zs = aux.z_star[0];
            // component b decrypts to b ⊕ z*
            assert_eq!(component_bit(&aux, &fake, 0, 0), zs);
            assert_eq!(component_bit(&aux, &fake, 0, 1), !zs);
            // component z* carries 0
            assert!(!component_bit(&aux, &fake, 0, zs as usize));
        }
    }

    #[test]
    fn reveal_opens_fake_to_every_message() {
        for base in [STUB, RnceBase::Secret] {
            for len in 1..=3 {
                let (pk, sk, aux) = rnce_keygen(base, len, &mut rng(20 + len as u64)).unwrap();
                let fake = rnce_fake(&pk, &sk, &aux, &mut rng(30)).unwrap();
                for v in 0..1u32 << len {
                    let m_star = from_u32(v, len);
                    let revealed = rnce_reveal(&pk, &sk, &aux, &fake, &m_star).unwrap();
                    assert_eq!(rnce_dec(&revealed, &fake).unwrap(), m_star);
                    for (i, (idx, _)) in revealed.slots.iter().enumerate() {
                        assert_eq!(*idx, aux.z_star[i] ^ m_star[i]);
                    }
                }
                let zero = rnce_reveal(&pk, &sk, &aux, &fake, &vec![false; len]).unwrap();
                assert_eq!(zero.index_bits(), aux.z_star);
            }
        }
    }

    #[test]
    fn honest_key_opens_fake_when_indices_line_up() {
        let (pk, sk, aux) = rnce_keygen(STUB, 3, &mut rng(40)).unwrap();
        let fake = rnce_fake(&pk, &sk, &aux, &mut rng(41)).unwrap();
        let m_star: Vec<bool> = sk.index_bits().iter().zip(&aux.z_star).map(|(z, s)| z ^ s).collect();
        assert_eq!(rnce_dec(&sk, &fake).unwrap(), m_star);
    }

    #[test]
    fn fake_and_honest_have_same_shape() {
        for base in [STUB, REGEV, RnceBase::Secret] {
            let (pk, sk, aux) = rnce_keygen(base, 3, &mut rng(50)).unwrap();
            let honest = rnce_enc(&pk, &[true, true, false], &mut rng(51)).unwrap();
            let fake = rnce_fake(&pk, &sk, &aux, &mut rng(52)).unwrap();
            assert_eq!(honest.shape(), fake.shape());
            assert_eq!(honest.to_canonical_bytes().len(), fake.to_canonical_bytes().len());
        }
    }

    #[test]
    fn errors() {
        let (pk, sk, _) = rnce_keygen(STUB, 2, &mut rng(60)).unwrap();
        assert_eq!(
            rnce_enc(&pk, &[true], &mut rng(0)).unwrap_err(),
            RnceError::SlotMismatch { expected: 2, found: 1 }
        );
        let (pk3, _, _) = rnce_keygen(STUB, 3, &mut rng(61)).unwrap();
        let ct3 = rnce_enc(&pk3, &[true; 3], &mut rng(0)).unwrap();
        assert!(matches!(rnce_dec(&sk, &ct3), Err(RnceError::SlotMismatch { .. })));
    }

    #[test]
    fn codec_round_trips() {
        let (pk, sk, aux) = rnce_keygen(STUB, 3, &mut rng(70)).unwrap();
        let ct = rnce_enc(&pk, &[false, true, true], &mut rng(71)).unwrap();
        assert_eq!(canonical_decode::<RncePublicKey>(&canonical_encode(&pk)).unwrap(), pk);
        assert_eq!(canonical_decode::<RnceSecretKey>(&canonical_encode(&sk)).unwrap(), sk);
        assert_eq!(canonical_decode::<RnceAux>(&canonical_encode(&aux)).unwrap(), aux);
        assert_eq!(canonical_decode::<RnceCiphertext>(&canonical_encode(&ct)).unwrap(), ct);
    }
}
