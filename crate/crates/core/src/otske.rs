//! One-time secret-key encryption with certified deletion over BB84 states.
//!
//! Key: bases `θ ∈ {0,1}^κ` with exactly `ℓ` zeros, payload `r ∈ {0,1}^κ`.
//! The ciphertext is `|r⟩_θ` plus the classical pad `m ⊕ r|_{θ=0}`.
//! Deleting means measuring every qubit in the Hadamard basis; the
//! certificate is accepted when it matches `r` on the Hadamard positions.
//!
//! No error correction or privacy amplification: the simulator is noiseless.

use rand::seq::index;
use rand::Rng;
use thiserror::Error;

use crate::bits;
use crate::codec::{kind, Canonical, CodecError, Decoder, Encoder};
use crate::game::Remnant;
use crate::qsim::{self, Basis, QsimError, QubitRegister};

pub const MAX_MSG_BITS: usize = 8;
/// Header width of the fixed key encoding (8-bit κ, 8-bit ℓ).
pub const KEY_HEADER_BITS: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum OtskeError {
    #[error("message length {0} outside 1..={MAX_MSG_BITS}")]
    MessageLength(usize),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("ciphertext has {found} qubits, key expects {expected}")]
    QubitCount { expected: usize, found: usize },
    #[error("malformed key: {0}")]
    MalformedKey(String),
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OtskeKey {
    theta: Vec<bool>,
    r: Vec<bool>,
}

impl OtskeKey {
    /// Validates that `θ` and `r` have equal length and `θ` contains between
    /// one and eight zeros.
    pub fn new(theta: Vec<bool>, r: Vec<bool>) -> Result<Self, OtskeError> {
        if theta.len() != r.len() {
            return Err(OtskeError::LengthMismatch {
                expected: theta.len(),
                found: r.len(),
            });
        }
        if theta.len() > qsim::MAX_QUBITS {
            return Err(OtskeError::MalformedKey(format!(
                "κ = {} exceeds {}",
                theta.len(),
                qsim::MAX_QUBITS
            )));
        }
        let zeros = theta.iter().filter(|&&b| !b).count();
        if !(1..=MAX_MSG_BITS).contains(&zeros) {
            return Err(OtskeError::MessageLength(zeros));
        }
        Ok(Self { theta, r })
    }

    pub fn kappa(&self) -> usize {
        self.theta.len()
    }

    pub fn msg_len(&self) -> usize {
        self.theta.iter().filter(|&&b| !b).count()
    }

    pub fn theta(&self) -> &[bool] {
        &self.theta
    }

    pub fn r(&self) -> &[bool] {
        &self.r
    }

    /// Positions encoded in the computational basis, ascending.
    pub fn computational_positions(&self) -> Vec<usize> {
        (0..self.kappa()).filter(|&i| !self.theta[i]).collect()
    }

    /// Positions encoded in the Hadamard basis, ascending.
    pub fn hadamard_positions(&self) -> Vec<usize> {
        (0..self.kappa()).filter(|&i| self.theta[i]).collect()
    }

    /// `r` restricted to the computational positions.
    pub fn pad(&self) -> Vec<bool> {
        self.computational_positions().iter().map(|&i| self.r[i]).collect()
    }

    /// Fixed-width bit encoding: 8-bit κ, 8-bit ℓ, θ, r.
    pub fn to_bits(&self) -> Vec<bool> {
        let mut w = bits::BitWriter::new();
        w.push_uint(self.kappa() as u32, 8);
        w.push_uint(self.msg_len() as u32, 8);
        w.push_bits(&self.theta);
        w.push_bits(&self.r);
        w.into_bits()
    }

    pub fn from_bits(encoded: &[bool]) -> Result<Self, OtskeError> {
        if encoded.len() < KEY_HEADER_BITS {
            return Err(OtskeError::MalformedKey("truncated header".into()));
        }
        let kappa = bits::to_u32(&encoded[..8]).unwrap() as usize;
        let ell = bits::to_u32(&encoded[8..16]).unwrap() as usize;
        if encoded.len() != encoded_len(kappa) {
            return Err(OtskeError::MalformedKey(format!(
                "{} bits for κ = {kappa}",
                encoded.len()
            )));
        }
        let theta = encoded[16..16 + kappa].to_vec();
        let r = encoded[16 + kappa..].to_vec();
        let key = Self::new(theta, r)?;
        if key.msg_len() != ell {
            return Err(OtskeError::MalformedKey("ℓ header disagrees with θ".into()));
        }
        Ok(key)
    }
}

/// Bit length of the encoded key for a given `κ`.
pub fn encoded_len(kappa: usize) -> usize {
    KEY_HEADER_BITS + 2 * kappa
}

#[derive(Debug, Clone, PartialEq)]
pub struct OtskeCiphertext {
    /// SIMULATION-SECRET: the full amplitude table.
    register: QubitRegister,
    pad: Vec<bool>,
}

impl OtskeCiphertext {
    pub fn new(register: QubitRegister, pad: Vec<bool>) -> Self {
        Self { register, pad }
    }

    pub fn register(&self) -> &QubitRegister {
        &self.register
    }

    pub fn pad(&self) -> &[bool] {
        &self.pad
    }

    pub fn into_parts(self) -> (QubitRegister, Vec<bool>) {
        (self.register, self.pad)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeletionCert {
    pub bits: Vec<bool>,
}

pub fn otske_keygen<R: Rng + ?Sized>(msg_len: usize, rng: &mut R) -> Result<OtskeKey, OtskeError> {
    if !(1..=MAX_MSG_BITS).contains(&msg_len) {
        return Err(OtskeError::MessageLength(msg_len));
    }
    let kappa = 2 * msg_len;
    let mut theta = vec![true; kappa];
    for i in index::sample(rng, kappa, msg_len) {
        theta[i] = false;
    }
    let r = (0..kappa).map(|_| rng.gen()).collect();
    OtskeKey::new(theta, r)
}

pub fn otske_enc(key: &OtskeKey, m: &[bool]) -> Result<OtskeCiphertext, OtskeError> {
    if m.len() != key.msg_len() {
        return Err(OtskeError::LengthMismatch {
            expected: key.msg_len(),
            found: m.len(),
        });
    }
    let register = qsim::prepare_bb84(&key.r, &key.theta)?;
    Ok(OtskeCiphertext {
        register,
        pad: bits::xor(m, &key.pad()),
    })
}

fn check_shape(key: &OtskeKey, ct: &OtskeCiphertext) -> Result<(), OtskeError> {
    if ct.register.num_qubits() != key.kappa() {
        return Err(OtskeError::QubitCount {
            expected: key.kappa(),
            found: ct.register.num_qubits(),
        });
    }
    if ct.pad.len() != key.msg_len() {
        return Err(OtskeError::LengthMismatch {
            expected: key.msg_len(),
            found: ct.pad.len(),
        });
    }
    Ok(())
}

/// Measures the computational positions and removes the pad. Consumes `ct`.
pub fn otske_dec<R: Rng + ?Sized>(key: &OtskeKey, ct: OtskeCiphertext, rng: &mut R) -> Result<Vec<bool>, OtskeError> {
    check_shape(key, &ct)?;
    let (record, _) = qsim::measure(ct.register, &key.computational_positions(), Basis::Computational, rng)?;
    Ok(bits::xor(&ct.pad, &record.outcome))
}

/// Measures every qubit in the Hadamard basis.
pub fn otske_del<R: Rng + ?Sized>(
    ct: OtskeCiphertext,
    rng: &mut R,
) -> Result<(DeletionCert, Remnant<OtskeCiphertext>), OtskeError> {
    let positions: Vec<usize> = (0..ct.register.num_qubits()).collect();
    let (record, collapsed) = qsim::measure(ct.register, &positions, Basis::Hadamard, rng)?;
    Ok((
        DeletionCert { bits: record.outcome },
        Remnant(OtskeCiphertext {
            register: collapsed,
            pad: ct.pad,
        }),
    ))
}

/// Accepts iff the certificate agrees with `r` on every Hadamard position.
pub fn otske_vrfy(key: &OtskeKey, cert: &DeletionCert) -> Result<bool, OtskeError> {
    if cert.bits.len() != key.kappa() {
        return Err(OtskeError::LengthMismatch {
            expected: key.kappa(),
            found: cert.bits.len(),
        });
    }
    Ok(key.hadamard_positions().iter().all(|&i| cert.bits[i] == key.r[i]))
}

/// Probability that a certificate uniform on the Hadamard positions is
/// accepted: `2^{-(κ−ℓ)}`.
pub fn forgery_probability(kappa: usize, msg_len: usize) -> f64 {
    0.5f64.powi((kappa - msg_len) as i32)
}

impl Canonical for OtskeKey {
    const KIND: u8 = kind::OTSKE_KEY;

    fn encode_into(&self, enc: &mut Encoder) {
        enc.put_u8(self.kappa() as u8);
        enc.put_u8(self.msg_len() as u8);
        enc.put_bits(&self.theta);
        enc.put_bits(&self.r);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let kappa = dec.u8()? as usize;
        let ell = dec.u8()? as usize;
        let theta = dec.bits()?;
        let r = dec.bits()?;
        if theta.len() != kappa {
            return Err(CodecError::invalid("θ length disagrees with κ"));
        }
        let key = OtskeKey::new(theta, r).map_err(|e| CodecError::invalid(e.to_string()))?;
        if key.msg_len() != ell {
            return Err(CodecError::invalid("ℓ header disagrees with θ"));
        }
        Ok(key)
    }
}

impl Canonical for DeletionCert {
    const KIND: u8 = kind::DELETION_CERT;

    fn encode_into(&self, enc: &mut Encoder) {
        enc.put_bits(&self.bits);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let bits = dec.bits()?;
        if bits.len() > qsim::MAX_QUBITS {
            return Err(CodecError::invalid("certificate too long"));
        }
        Ok(Self { bits })
    }
}

impl Canonical for OtskeCiphertext {
    const KIND: u8 = kind::OTSKE_CIPHERTEXT;

    fn encode_into(&self, enc: &mut Encoder) {
        self.register.encode_into(enc);
        enc.put_bits(&self.pad);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let register = QubitRegister::decode_from(dec)?;
        let pad = dec.bits()?;
        Ok(Self { register, pad })
    }
}
