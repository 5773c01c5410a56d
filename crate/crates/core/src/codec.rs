//! Canonical binary encoding.
//!
//! All multi-byte integers are big-endian; variable-length fields carry a
//! `u32` length prefix. Files wrap a payload in an envelope:
//! `"CDS1" | version | kind | payload`.

use thiserror::Error;

use crate::bits;

pub const FILE_MAGIC: &[u8; 4] = b"CDS1";
pub const FILE_VERSION: u8 = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("truncated input: needed {needed} more bytes at offset {offset}")]
    Truncated { offset: usize, needed: usize },
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported version {0}")]
    UnsupportedVersion(u8),
    #[error("unexpected kind {found:#04x} (expected {expected:#04x})")]
    WrongKind { expected: u8, found: u8 },
    #[error("{0} trailing bytes after payload")]
    TrailingBytes(usize),
    #[error("invalid field: {0}")]
    Invalid(String),
}

impl CodecError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Self::Invalid(msg.into())
    }
}

#[derive(Debug, Default, Clone)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put_u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn put_u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn put_u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn put_u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    pub fn put_f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_bits().to_be_bytes());
    }

    pub fn put_bool(&mut self, v: bool) {
        self.buf.push(v as u8);
    }

    pub fn put_raw(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
    }

    /// Length-prefixed byte field.
    pub fn put_bytes(&mut self, bytes: &[u8]) {
        self.put_u32(bytes.len() as u32);
        self.buf.extend_from_slice(bytes);
    }

    /// Bit-count prefix followed by the packed bits.
    pub fn put_bits(&mut self, bits: &[bool]) {
        self.put_u32(bits.len() as u32);
        self.buf.extend_from_slice(&bits::pack(bits));
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        let remaining = self.buf.len() - self.pos;
        if n > remaining {
            return Err(CodecError::Truncated {
                offset: self.pos,
                needed: n - remaining,
            });
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16, CodecError> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32, CodecError> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64, CodecError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn f64(&mut self) -> Result<f64, CodecError> {
        Ok(f64::from_bits(self.u64()?))
    }

    pub fn bool(&mut self) -> Result<bool, CodecError> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(CodecError::invalid(format!("boolean byte {other}"))),
        }
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], CodecError> {
        let len = self.u32()? as usize;
        self.take(len)
    }

    pub fn bits(&mut self) -> Result<Vec<bool>, CodecError> {
        let len = self.u32()? as usize;
        let packed = self.take(len.div_ceil(8))?;
        Ok(bits::unpack(packed, len))
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub fn finish(self) -> Result<(), CodecError> {
        match self.remaining() {
            0 => Ok(()),
            n => Err(CodecError::TrailingBytes(n)),
        }
    }
}

/// A value with a canonical byte encoding.
pub trait Canonical: Sized {
    /// Envelope kind byte used when the value is written to a file.
    const KIND: u8;

    fn encode_into(&self, enc: &mut Encoder);

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError>;

    fn to_canonical_bytes(&self) -> Vec<u8> {
        let mut enc = Encoder::new();
        self.encode_into(&mut enc);
        enc.finish()
    }

    fn from_canonical_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        let mut dec = Decoder::new(bytes);
        let v = Self::decode_from(&mut dec)?;
        dec.finish()?;
        Ok(v)
    }
}

/// Wraps a value in the versioned file envelope.
pub fn canonical_encode<T: Canonical>(value: &T) -> Vec<u8> {
    let mut enc = Encoder::new();
    enc.put_raw(FILE_MAGIC);
    enc.put_u8(FILE_VERSION);
    enc.put_u8(T::KIND);
    value.encode_into(&mut enc);
    enc.finish()
}

pub fn canonical_decode<T: Canonical>(bytes: &[u8]) -> Result<T, CodecError> {
    let mut dec = Decoder::new(bytes);
    if dec.take(4).map_err(|_| CodecError::BadMagic)? != FILE_MAGIC {
        return Err(CodecError::BadMagic);
    }
    let version = dec.u8()?;
    if version != FILE_VERSION {
        return Err(CodecError::UnsupportedVersion(version));
    }
    let kind = dec.u8()?;
    if kind != T::KIND {
        return Err(CodecError::WrongKind {
            expected: T::KIND,
            found: kind,
        });
    }
    let value = T::decode_from(&mut dec)?;
    dec.finish()?;
    Ok(value)
}

/// Reads the kind byte of an envelope without decoding the payload.
pub fn peek_kind(bytes: &[u8]) -> Result<u8, CodecError> {
    if bytes.len() < 6 || &bytes[..4] != FILE_MAGIC {
        return Err(CodecError::BadMagic);
    }
    if bytes[4] != FILE_VERSION {
        return Err(CodecError::UnsupportedVersion(bytes[4]));
    }
    Ok(bytes[5])
}

/// Envelope kind bytes.
pub mod kind {
    pub const QUBIT_REGISTER: u8 = 0x01;
    pub const RNCE_PUBLIC_KEY: u8 = 0x10;
    pub const RNCE_SECRET_KEY: u8 = 0x11;
    pub const RNCE_AUX: u8 = 0x12;
    pub const RNCE_CIPHERTEXT: u8 = 0x13;
    pub const OTSKE_KEY: u8 = 0x20;
    pub const OTSKE_CIPHERTEXT: u8 = 0x21;
    pub const DELETION_CERT: u8 = 0x22;
    pub const PKECD_PUBLIC_KEY: u8 = 0x30;
    pub const PKECD_SECRET_KEY: u8 = 0x31;
    pub const PKECD_CIPHERTEXT: u8 = 0x32;
    pub const SKECD_KEY: u8 = 0x38;
    pub const SKECD_CIPHERTEXT: u8 = 0x39;
    pub const CLAW_FREE_KEY: u8 = 0x40;
    pub const CLAW_FREE_TRAPDOOR: u8 = 0x41;
    pub const CC_PUBLIC_KEY: u8 = 0x50;
    pub const CC_SECRET_KEY: u8 = 0x51;
    pub const CC_VERIFICATION_KEY: u8 = 0x52;
    pub const CC_CERT: u8 = 0x53;
    pub const CC_CIPHERTEXT: u8 = 0x54;
    pub const CC_PARAMS: u8 = 0x55;
    pub const CC_KEYS_MESSAGE: u8 = 0x58;
    pub const CC_IMAGES_MESSAGE: u8 = 0x59;
    pub const CC_CT_MESSAGE: u8 = 0x5a;
    /// Reserved for the command-line file containers.
    pub const CLI_CIPHERTEXT_FILE: u8 = 0x60;
    pub const CLI_CC_PUBLIC_KEY: u8 = 0x61;
    pub const CLI_CC_SECRET_KEY: u8 = 0x62;
}
