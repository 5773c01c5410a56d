//! On-disk containers. Every file is a `CDS1` envelope; the kind byte says
//! what it holds.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use certdel::cc::{CcCiphertext, CcParams, CcPublicKey, CcSecretKey};
use certdel::codec::{self, kind, Canonical, CodecError, Decoder, Encoder};
use certdel::pke_cd::PkeCdCiphertext;

/// A cc public key with the parameters the sender needs.
#[derive(Debug, Clone, PartialEq)]
pub struct CcPublicKeyFile {
    pub params: CcParams,
    pub pk: CcPublicKey,
}

impl Canonical for CcPublicKeyFile {
    const KIND: u8 = kind::CLI_CC_PUBLIC_KEY;

    fn encode_into(&self, enc: &mut Encoder) {
        self.params.encode_into(enc);
        self.pk.encode_into(enc);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let params = CcParams::decode_from(dec)?;
        let pk = CcPublicKey::decode_from(dec)?;
        if pk.n != params.n {
            return Err(CodecError::invalid("key size does not match parameters"));
        }
        Ok(Self { params, pk })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcSecretKeyFile {
    pub params: CcParams,
    pub sk: CcSecretKey,
}

impl Canonical for CcSecretKeyFile {
    const KIND: u8 = kind::CLI_CC_SECRET_KEY;

    fn encode_into(&self, enc: &mut Encoder) {
        self.params.encode_into(enc);
        self.sk.encode_into(enc);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let params = CcParams::decode_from(dec)?;
        let sk = CcSecretKey::decode_from(dec)?;
        if sk.n != params.n {
            return Err(CodecError::invalid("key size does not match parameters"));
        }
        Ok(Self { params, sk })
    }
}

const FLAG_SIMULATION_SECRET: u8 = 0x01;
const FLAG_CONSUMED: u8 = 0x02;

/// A ciphertext that may already have been decrypted or deleted.
///
/// The inner envelope includes the simulated register, which a real
/// holder could not copy, so the file is flagged as a simulation secret.
/// Decrypting or deleting empties it.
#[derive(Debug, Clone, PartialEq)]
pub struct CiphertextFile {
    pub consumed: bool,
    inner: Vec<u8>,
}

pub enum AnyCiphertext {
    Hybrid(PkeCdCiphertext),
    Cc(CcCiphertext),
}

impl CiphertextFile {
    pub fn hybrid(ct: &PkeCdCiphertext) -> Self {
        Self {
            consumed: false,
            inner: codec::canonical_encode(ct),
        }
    }

    pub fn cc(ct: &CcCiphertext) -> Self {
        Self {
            consumed: false,
            inner: codec::canonical_encode(ct),
        }
    }

    /// Takes the ciphertext out and marks the file consumed.
    pub fn take(&mut self) -> Result<AnyCiphertext> {
        if self.consumed {
            bail!("ciphertext was already decrypted or deleted");
        }
        let ct = match codec::peek_kind(&self.inner)? {
            kind::PKECD_CIPHERTEXT => AnyCiphertext::Hybrid(codec::canonical_decode(&self.inner)?),
            kind::CC_CIPHERTEXT => AnyCiphertext::Cc(codec::canonical_decode(&self.inner)?),
            other => bail!("ciphertext file holds unexpected kind 0x{other:02x}"),
        };
        self.consumed = true;
        self.inner.clear();
        Ok(ct)
    }
}

impl Canonical for CiphertextFile {
    const KIND: u8 = kind::CLI_CIPHERTEXT_FILE;

    fn encode_into(&self, enc: &mut Encoder) {
        let mut flags = 0;
        if !self.inner.is_empty() {
            flags |= FLAG_SIMULATION_SECRET;
        }
        if self.consumed {
            flags |= FLAG_CONSUMED;
        }
        enc.put_u8(flags);
        enc.put_bytes(&self.inner);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let flags = dec.u8()?;
        if flags & !(FLAG_SIMULATION_SECRET | FLAG_CONSUMED) != 0 {
            return Err(CodecError::invalid("unknown ciphertext flags"));
        }
        let inner = dec.bytes()?.to_vec();
        let consumed = flags & FLAG_CONSUMED != 0;
        if consumed != inner.is_empty() || (flags & FLAG_SIMULATION_SECRET != 0) == inner.is_empty() {
            return Err(CodecError::invalid("ciphertext flags disagree with contents"));
        }
        Ok(Self { consumed, inner })
    }
}

pub fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

pub fn kind_of(path: &Path) -> Result<(u8, Vec<u8>)> {
    let bytes = read(path)?;
    let k = codec::peek_kind(&bytes).with_context(|| format!("decoding {}", path.display()))?;
    Ok((k, bytes))
}

pub fn load<T: Canonical>(path: &Path) -> Result<T> {
    codec::canonical_decode(&read(path)?).with_context(|| format!("decoding {}", path.display()))
}

pub fn store<T: Canonical>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, codec::canonical_encode(value)).with_context(|| format!("writing {}", path.display()))
}

/// `prefix` with `ext` appended, keeping any existing extension.
pub fn with_ext(prefix: &Path, ext: &str) -> std::path::PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    s.into()
}
