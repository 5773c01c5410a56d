//! Classical base layer: PKE, random oracle, symmetric helpers.
//!
//! Keys and ciphertexts are opaque byte strings laid out as
//! `"CDP1" | scheme_id | role | fields`, with big-endian length-prefixed
//! fields.

pub mod oracle;
pub mod regev;
pub mod stub;
pub mod sym;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits;
use crate::codec::{CodecError, Decoder, Encoder};
use regev::RegevParams;

pub use oracle::{ro_hash, RandomOracle};

pub const PKE_MAGIC: &[u8; 4] = b"CDP1";
/// Plaintext cap for the lattice scheme, which encrypts bit by bit.
pub const REGEV_MAX_PLAINTEXT: usize = 64;
pub const STUB_MAX_PLAINTEXT: usize = 1 << 16;

const ROLE_PUBLIC: u8 = b'P';
const ROLE_SECRET: u8 = b'S';
const ROLE_CIPHERTEXT: u8 = b'C';

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PkeError {
    #[error("unsupported scheme id {0}")]
    UnsupportedScheme(u8),
    #[error("unsupported security level {0}")]
    UnsupportedLevel(u32),
    #[error("plaintext of {len} bytes exceeds the {max}-byte bound")]
    PlaintextTooLong { len: usize, max: usize },
    #[error("malformed key")]
    MalformedKey,
    #[error("malformed ciphertext")]
    MalformedCiphertext,
    #[error("key and ciphertext belong to different schemes or levels")]
    SchemeMismatch,
}

impl From<CodecError> for PkeError {
    fn from(_: CodecError) -> Self {
        PkeError::MalformedCiphertext
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeId {
    RegevRef = 1,
    /// Insecure: the public key decrypts.
    TestStub = 2,
}

impl SchemeId {
    pub fn from_byte(b: u8) -> Result<Self, PkeError> {
        match b {
            1 => Ok(Self::RegevRef),
            2 => Ok(Self::TestStub),
            other => Err(PkeError::UnsupportedScheme(other)),
        }
    }

    pub fn byte(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SecurityLevel {
    L128,
    L192,
}

impl SecurityLevel {
    pub fn from_lambda(lambda: u32) -> Result<Self, PkeError> {
        match lambda {
            128 => Ok(Self::L128),
            192 => Ok(Self::L192),
            other => Err(PkeError::UnsupportedLevel(other)),
        }
    }

    pub fn lambda(self) -> u32 {
        match self {
            Self::L128 => 128,
            Self::L192 => 192,
        }
    }

    pub fn regev_params(self) -> RegevParams {
        match self {
            Self::L128 => regev::LEVEL_128,
            Self::L192 => regev::LEVEL_192,
        }
    }

    fn byte(self) -> u8 {
        match self {
            Self::L128 => 1,
            Self::L192 => 2,
        }
    }

    fn from_byte(b: u8) -> Result<Self, PkeError> {
        match b {
            1 => Ok(Self::L128),
            2 => Ok(Self::L192),
            _ => Err(PkeError::MalformedKey),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PkeKeyPair {
    pub public_key: Vec<u8>,
    pub secret_key: Vec<u8>,
    pub scheme_id: SchemeId,
}

fn header(enc: &mut Encoder, scheme: SchemeId, role: u8) {
    enc.put_raw(PKE_MAGIC);
    enc.put_u8(scheme.byte());
    enc.put_u8(role);
}

fn read_header(dec: &mut Decoder<'_>, role: u8, err: PkeError) -> Result<SchemeId, PkeError> {
    let magic = dec.take(4).map_err(|_| err.clone())?;
    if magic != PKE_MAGIC {
        return Err(err);
    }
    let scheme = SchemeId::from_byte(dec.u8().map_err(|_| err.clone())?)?;
    if dec.u8().map_err(|_| err.clone())? != role {
        return Err(err);
    }
    Ok(scheme)
}

fn put_residues(enc: &mut Encoder, v: &[u16]) {
    let mut raw = Vec::with_capacity(v.len() * 2);
    for x in v {
        raw.extend_from_slice(&x.to_be_bytes());
    }
    enc.put_bytes(&raw);
}

fn get_residues(dec: &mut Decoder<'_>, expected: usize, q: u32) -> Result<Vec<u16>, CodecError> {
    let raw = dec.bytes()?;
    if raw.len() != expected * 2 {
        return Err(CodecError::invalid("residue vector length"));
    }
    let v: Vec<u16> = raw.chunks(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect();
    if v.iter().any(|&x| x as u32 >= q) {
        return Err(CodecError::invalid("residue out of range"));
    }
    Ok(v)
}

pub fn pke_keygen<R: Rng + ?Sized>(scheme: SchemeId, lambda: u32, rng: &mut R) -> Result<PkeKeyPair, PkeError> {
    match scheme {
        SchemeId::TestStub => {
            let key = stub::keygen(rng);
            let encode = |role| {
                let mut enc = Encoder::new();
                header(&mut enc, scheme, role);
                enc.put_bytes(&key);
                enc.finish()
            };
            Ok(PkeKeyPair {
                public_key: encode(ROLE_PUBLIC),
                secret_key: encode(ROLE_SECRET),
                scheme_id: scheme,
            })
        }
        SchemeId::RegevRef => {
            let level = SecurityLevel::from_lambda(lambda)?;
            let (pk, sk) = regev::keygen(&level.regev_params(), rng);
            let mut pe = Encoder::new();
            header(&mut pe, scheme, ROLE_PUBLIC);
            pe.put_u8(level.byte());
            pe.put_bytes(&pk.seed);
            put_residues(&mut pe, &pk.b);
            let mut se = Encoder::new();
            header(&mut se, scheme, ROLE_SECRET);
            se.put_u8(level.byte());
            put_residues(&mut se, &sk.s);
            Ok(PkeKeyPair {
                public_key: pe.finish(),
                secret_key: se.finish(),
                scheme_id: scheme,
            })
        }
    }
}

fn decode_regev_pk(dec: &mut Decoder<'_>) -> Result<(SecurityLevel, regev::PublicKey), PkeError> {
    let bad = |_| PkeError::MalformedKey;
    let level = SecurityLevel::from_byte(dec.u8().map_err(bad)?)?;
    let params = level.regev_params();
    let seed: [u8; regev::SEED_LEN] = dec
        .bytes()
        .map_err(bad)?
        .try_into()
        .map_err(|_| PkeError::MalformedKey)?;
    let b = get_residues(dec, params.m, params.q).map_err(bad)?;
    Ok((level, regev::PublicKey { seed, b }))
}

fn decode_regev_sk(dec: &mut Decoder<'_>) -> Result<(SecurityLevel, regev::SecretKey), PkeError> {
    let bad = |_| PkeError::MalformedKey;
    let level = SecurityLevel::from_byte(dec.u8().map_err(bad)?)?;
    let params = level.regev_params();
    let s = get_residues(dec, params.n, params.q).map_err(bad)?;
    Ok((level, regev::SecretKey { s }))
}

fn stub_key(dec: &mut Decoder<'_>) -> Result<Vec<u8>, PkeError> {
    let key = dec.bytes().map_err(|_| PkeError::MalformedKey)?;
    if key.len() != stub::KEY_LEN {
        return Err(PkeError::MalformedKey);
    }
    Ok(key.to_vec())
}

/// Scheme of an encoded key or ciphertext.
pub fn scheme_of(bytes: &[u8]) -> Result<SchemeId, PkeError> {
    if bytes.len() < 6 || &bytes[..4] != PKE_MAGIC {
        return Err(PkeError::MalformedKey);
    }
    SchemeId::from_byte(bytes[4])
}

pub fn pke_enc<R: Rng + ?Sized>(pk: &[u8], m: &[u8], rng: &mut R) -> Result<Vec<u8>, PkeError> {
    let mut dec = Decoder::new(pk);
    let scheme = read_header(&mut dec, ROLE_PUBLIC, PkeError::MalformedKey)?;
    let mut out = Encoder::new();
    header(&mut out, scheme, ROLE_CIPHERTEXT);
    match scheme {
        SchemeId::TestStub => {
            let key = stub_key(&mut dec)?;
            dec.finish().map_err(|_| PkeError::MalformedKey)?;
            if m.len() > STUB_MAX_PLAINTEXT {
                return Err(PkeError::PlaintextTooLong {
                    len: m.len(),
                    max: STUB_MAX_PLAINTEXT,
                });
            }
            out.put_bytes(&stub::apply_pad(&key, m));
        }
        SchemeId::RegevRef => {
            let (level, key) = decode_regev_pk(&mut dec)?;
            dec.finish().map_err(|_| PkeError::MalformedKey)?;
            if m.len() > REGEV_MAX_PLAINTEXT {
                return Err(PkeError::PlaintextTooLong {
                    len: m.len(),
                    max: REGEV_MAX_PLAINTEXT,
                });
            }
            let params = level.regev_params();
            out.put_u8(level.byte());
            out.put_u32(m.len() as u32);
            for ct in regev::encrypt_bits(&params, &key, &bits::bytes_to_bits(m), rng) {
                put_residues(&mut out, &ct);
            }
        }
    }
    Ok(out.finish())
}

pub fn pke_dec(sk: &[u8], ct: &[u8]) -> Result<Vec<u8>, PkeError> {
    let mut kd = Decoder::new(sk);
    let scheme = read_header(&mut kd, ROLE_SECRET, PkeError::MalformedKey)?;
    let mut cd = Decoder::new(ct);
    if read_header(&mut cd, ROLE_CIPHERTEXT, PkeError::MalformedCiphertext)? != scheme {
        return Err(PkeError::SchemeMismatch);
    }
    let m = match scheme {
        SchemeId::TestStub => {
            let key = stub_key(&mut kd)?;
            stub::apply_pad(&key, cd.bytes()?)
        }
        SchemeId::RegevRef => {
            let (level, key) = decode_regev_sk(&mut kd)?;
            if SecurityLevel::from_byte(cd.u8()?).map_err(|_| PkeError::MalformedCiphertext)? != level {
                return Err(PkeError::SchemeMismatch);
            }
            let params = level.regev_params();
            let len = cd.u32()? as usize;
            if len > REGEV_MAX_PLAINTEXT {
                return Err(PkeError::MalformedCiphertext);
            }
            let mut out = Vec::with_capacity(len * 8);
            for _ in 0..len * 8 {
                let residues = get_residues(&mut cd, params.n + 1, params.q)?;
                out.push(regev::decrypt_bit(&params, &key, &residues));
            }
            bits::pack(&out)
        }
    };
    kd.finish().map_err(|_| PkeError::MalformedKey)?;
    cd.finish()?;
    Ok(m)
}
