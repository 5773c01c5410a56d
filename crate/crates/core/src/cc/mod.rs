//! Public-key encryption with certified deletion over classical channels.
//!
//! Encryption is an interactive protocol between a sender holding `pk` and
//! the receiver. The sender picks a hidden half `S` of `4n` instances and
//! hands out injective keys on `S`, claw-free keys elsewhere. The receiver
//! keeps one collapsed register per instance; the message is masked by
//! `H(K, (b_i, x_i)_{i ∈ S})`. Deleting means Hadamard-measuring every
//! register, and only the claw-free instances are checked.

pub mod cut_and_choose;
pub mod experiment;
pub mod protocol;
pub mod wire;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits;
use crate::codec::{kind, Canonical, CodecError, Decoder, Encoder};
use crate::ntcf::{self, ClawFreeKey, ClawFreeTrapdoor, FunctionMode, NtcfError};
use crate::primitives::{self, PkeError, SchemeId, SecurityLevel};
use crate::qsim::{self, Basis, ClawInstanceState, QsimError};
use crate::rnce::{self, RnceAux, RnceBase, RnceCiphertext, RnceError, RncePublicKey, RnceSecretKey};

pub use experiment::{run_cc_experiment, CcAdversary, CcExperimentMode, GameOracle};
pub use protocol::{
    receiver_complete, receiver_respond, sender_finalize, sender_init, CtMessage, Finalized, ImagesMessage,
    KeysMessage, ReceiverState, SenderPhase, SenderState,
};

/// Largest supported instance count `4n`.
pub const MAX_INSTANCES: usize = 64;
/// Largest supported message length in bits.
pub const MAX_MSG_BITS: usize = 4096;

#[derive(Debug, Error, PartialEq)]
pub enum CcError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("message length {found} does not match the expected {expected}")]
    MessageLength { expected: usize, found: usize },
    #[error("protocol message out of order: {0}")]
    Protocol(String),
    #[error("certificate has {found} entries, expected {expected}")]
    CertLength { expected: usize, found: usize },
    #[error("decrypted subset is malformed")]
    BadSubset,
    #[error("decrypted one-way key is malformed")]
    BadKey,
    #[error(transparent)]
    Rnce(#[from] RnceError),
    #[error(transparent)]
    Pke(#[from] PkeError),
    #[error(transparent)]
    Ntcf(#[from] NtcfError),
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcParams {
    /// `4n` instances, `2n` of them checked.
    pub n: usize,
    /// Preimage width of each claw-free instance.
    pub w: usize,
    /// Length of `K` in bits and the security level of the base schemes.
    pub lambda: u32,
    /// Message length `ℓ` in bits.
    pub msg_len: usize,
    pub scheme: SchemeId,
}

impl Default for CcParams {
    fn default() -> Self {
        Self {
            n: 4,
            w: 8,
            lambda: 128,
            msg_len: 8,
            scheme: SchemeId::RegevRef,
        }
    }
}

impl CcParams {
    pub fn instances(&self) -> usize {
        4 * self.n
    }

    pub fn validate(&self) -> Result<(), CcError> {
        if self.n == 0 || 4 * self.n > MAX_INSTANCES {
            return Err(CcError::Params(format!(
                "n = {} needs 1 <= 4n <= {MAX_INSTANCES}",
                self.n
            )));
        }
        if !(ntcf::MIN_WIDTH..=ntcf::MAX_WIDTH).contains(&self.w) {
            return Err(NtcfError::WidthOutOfRange(self.w).into());
        }
        if !(1..=MAX_MSG_BITS).contains(&self.msg_len) {
            return Err(CcError::Params(format!(
                "message length {} outside 1..={MAX_MSG_BITS}",
                self.msg_len
            )));
        }
        SecurityLevel::from_lambda(self.lambda)?;
        Ok(())
    }

    /// Bit length of the encoded tuple `Z`.
    pub fn z_len(&self) -> usize {
        self.lambda as usize + 2 * self.n * (1 + self.w)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CcPublicKey {
    pub n: usize,
    pub nce: RncePublicKey,
    pub ow_pk: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CcSecretKey {
    pub n: usize,
    pub nce: RnceSecretKey,
    pub ow_sk: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CcKeyPair {
    pub pk: CcPublicKey,
    pub sk: CcSecretKey,
    /// RNCE trapdoor, used only by the instrumented experiment modes.
    pub aux: RnceAux,
}

/// One entry of the verification key. SECRET: holds a trapdoor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VkEntry {
    pub index: usize,
    pub trapdoor: ClawFreeTrapdoor,
    pub y: u32,
}

/// `{(td_i, y_i)}` over the claw-free instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CcVerificationKey {
    pub n: usize,
    pub entries: Vec<VkEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertEntry {
    pub e: bool,
    pub d: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CcCert {
    pub entries: Vec<CertEntry>,
}

/// Receiver side of one instance: the public key and the collapsed state.
#[derive(Debug, Clone, PartialEq)]
pub struct CcInstance {
    pub key: ClawFreeKey,
    pub state: ClawInstanceState,
}

/// Everything the receiver holds after a completed encryption.
///
/// The per-instance registers are kept in closed form; `state.register()`
/// materializes the exact vector when a test or the state-vector path needs
/// it.
#[derive(Debug, Clone, PartialEq)]
pub struct CcCiphertext {
    pub instances: Vec<CcInstance>,
    pub nce_ct: RnceCiphertext,
    pub ow_ct: Vec<u8>,
    pub ct_msg: Vec<bool>,
}

/// How deletion measures the registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DeletionPath {
    #[default]
    Analytic,
    /// Applies `J` to the materialized register and measures it.
    StateVector,
}

pub fn cc_keygen<R: Rng + ?Sized>(params: &CcParams, rng: &mut R) -> Result<CcKeyPair, CcError> {
    params.validate()?;
    let base = RnceBase::Public {
        scheme: params.scheme,
        lambda: params.lambda,
    };
    let (nce_pk, nce_sk, aux) = rnce::rnce_keygen(base, params.instances(), rng)?;
    let ow = primitives::pke_keygen(params.scheme, params.lambda, rng)?;
    Ok(CcKeyPair {
        pk: CcPublicKey {
            n: params.n,
            nce: nce_pk,
            ow_pk: ow.public_key,
        },
        sk: CcSecretKey {
            n: params.n,
            nce: nce_sk,
            ow_sk: ow.secret_key,
        },
        aux,
    })
}

/// `S` as a `4n`-bit indicator vector.
pub fn subset_indicator(s: &[usize], instances: usize) -> Vec<bool> {
    let mut v = vec![false; instances];
    for &i in s {
        v[i] = true;
    }
    v
}

pub fn subset_from_indicator(v: &[bool]) -> Vec<usize> {
    v.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()
}

/// Recovers `S'` (ascending) and `K'` from the classical ciphertext parts.
pub fn open_subset_and_key(
    sk: &CcSecretKey,
    nce_ct: &RnceCiphertext,
    ow_ct: &[u8],
) -> Result<(Vec<usize>, Vec<bool>), CcError> {
    let indicator = rnce::rnce_dec(&sk.nce, nce_ct)?;
    let s = subset_from_indicator(&indicator);
    if indicator.len() != 4 * sk.n || s.len() != 2 * sk.n {
        return Err(CcError::BadSubset);
    }
    let k = primitives::pke_dec(&sk.ow_sk, ow_ct)?;
    if k.is_empty() {
        return Err(CcError::BadKey);
    }
    Ok((s, bits::bytes_to_bits(&k)))
}

/// Decrypts by measuring the registers of `S'` in the computational basis.
pub fn cc_dec<R: Rng + ?Sized>(sk: &CcSecretKey, ct: CcCiphertext, rng: &mut R) -> Result<Vec<bool>, CcError> {
    if ct.instances.len() != 4 * sk.n {
        return Err(CcError::Protocol(format!(
            "ciphertext has {} instances",
            ct.instances.len()
        )));
    }
    let (s, k) = open_subset_and_key(sk, &ct.nce_ct, &ct.ow_ct)?;
    let mut preimages = Vec::with_capacity(s.len());
    for &i in &s {
        let inst = &ct.instances[i];
        let w = inst.state.w();
        let positions: Vec<usize> = (0..=w).collect();
        let (record, _) = qsim::measure(inst.state.register(), &positions, Basis::Computational, rng)?;
        let label = bits::to_u32(&record.outcome).expect("at most 13 bits");
        preimages.push((label >> w == 1, label & ((1 << w) - 1)));
    }
    let z = protocol::encode_z(&k, &preimages, ct.instances[0].state.w());
    Ok(bits::xor(&ct.ct_msg, &protocol::hash_z(&z, ct.ct_msg.len())))
}

/// Hadamard-measures every register after applying `J`, consuming them.
///
/// The classical parts of the ciphertext are not affected by deletion; a
/// caller that wants them afterwards keeps its own copy.
pub fn cc_del<R: Rng + ?Sized>(ct: CcCiphertext, rng: &mut R) -> Result<CcCert, CcError> {
    cc_del_with(ct, DeletionPath::Analytic, rng)
}

pub fn cc_del_with<R: Rng + ?Sized>(ct: CcCiphertext, path: DeletionPath, rng: &mut R) -> Result<CcCert, CcError> {
    let mut entries = Vec::with_capacity(ct.instances.len());
    for inst in &ct.instances {
        let j = inst.key.label_map();
        let (e, d) = match path {
            DeletionPath::Analytic => qsim::analytic_hadamard_sample(&inst.state, j, rng),
            DeletionPath::StateVector => {
                let w = inst.state.w();
                let reg = qsim::apply_label_isometry(inst.state.register(), j)?;
                let positions: Vec<usize> = (0..=w).collect();
                let (record, _) = qsim::measure(reg, &positions, Basis::Hadamard, rng)?;
                let label = bits::to_u32(&record.outcome).expect("at most 13 bits");
                (label >> w == 1, label & ((1 << w) - 1))
            }
        };
        entries.push(CertEntry { e, d });
    }
    Ok(CcCert { entries })
}

/// Accepts iff every claw-free instance carries a valid `(e_i, d_i)`.
pub fn cc_vrfy(vk: &CcVerificationKey, cert: &CcCert) -> Result<bool, CcError> {
    if vk.entries.len() != 2 * vk.n {
        return Err(CcError::Params(format!(
            "verification key has {} entries",
            vk.entries.len()
        )));
    }
    if cert.entries.len() != 4 * vk.n {
        return Err(CcError::CertLength {
            expected: 4 * vk.n,
            found: cert.entries.len(),
        });
    }
    Ok(vk.entries.iter().all(|entry| {
        let CertEntry { e, d } = cert.entries[entry.index];
        match (
            ntcf::invert_f(&entry.trapdoor, false, entry.y),
            ntcf::invert_f(&entry.trapdoor, true, entry.y),
        ) {
            (Ok(x0), Ok(x1)) => ntcf::certificate_predicate(entry.trapdoor.label_map(), x0, x1, e, d),
            _ => false,
        }
    }))
}

/// Exact honest acceptance probability `(1 − 2^{-w})^{2n}`.
pub fn honest_acceptance_probability(n: usize, w: usize) -> f64 {
    (1.0 - 0.5f64.powi(w as i32)).powi(2 * n as i32)
}

fn check_n(n: usize) -> Result<(), CodecError> {
    if n == 0 || 4 * n > MAX_INSTANCES {
        return Err(CodecError::invalid(format!("instance parameter n = {n}")));
    }
    Ok(())
}

impl Canonical for CcParams {
    const KIND: u8 = kind::CC_PARAMS;

    fn encode_into(&self, enc: &mut Encoder) {
        enc.put_u8(self.n as u8);
        enc.put_u8(self.w as u8);
        enc.put_u16(self.lambda as u16);
        enc.put_u16(self.msg_len as u16);
        enc.put_u8(self.scheme.byte());
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let params = Self {
            n: dec.u8()? as usize,
            w: dec.u8()? as usize,
            lambda: dec.u16()? as u32,
            msg_len: dec.u16()? as usize,
            scheme: SchemeId::from_byte(dec.u8()?).map_err(|e| CodecError::invalid(e.to_string()))?,
        };
        params.validate().map_err(|e| CodecError::invalid(e.to_string()))?;
        Ok(params)
    }
}

impl Canonical for CcPublicKey {
    const KIND: u8 = kind::CC_PUBLIC_KEY;

    fn encode_into(&self, enc: &mut Encoder) {
        enc.put_u8(self.n as u8);
        self.nce.encode_into(enc);
        enc.put_bytes(&self.ow_pk);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let n = dec.u8()? as usize;
        check_n(n)?;
        let nce = RncePublicKey::decode_from(dec)?;
        if nce.len() != 4 * n {
            return Err(CodecError::invalid("slot count does not match 4n"));
        }
        Ok(Self {
            n,
            nce,
            ow_pk: dec.bytes()?.to_vec(),
        })
    }
}

impl Canonical for CcSecretKey {
    const KIND: u8 = kind::CC_SECRET_KEY;

    fn encode_into(&self, enc: &mut Encoder) {
        enc.put_u8(self.n as u8);
        self.nce.encode_into(enc);
        enc.put_bytes(&self.ow_sk);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let n = dec.u8()? as usize;
        check_n(n)?;
        let nce = RnceSecretKey::decode_from(dec)?;
        if nce.len() != 4 * n {
            return Err(CodecError::invalid("slot count does not match 4n"));
        }
        Ok(Self {
            n,
            nce,
            ow_sk: dec.bytes()?.to_vec(),
        })
    }
}

impl Canonical for CcVerificationKey {
    const KIND: u8 = kind::CC_VERIFICATION_KEY;

    fn encode_into(&self, enc: &mut Encoder) {
        enc.put_u8(self.n as u8);
        enc.put_u16(self.entries.len() as u16);
        for entry in &self.entries {
            enc.put_u8(entry.index as u8);
            entry.trapdoor.encode_into(enc);
            enc.put_u32(entry.y);
        }
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let n = dec.u8()? as usize;
        check_n(n)?;
        let count = dec.u16()? as usize;
        if count != 2 * n {
            return Err(CodecError::invalid("verification key needs 2n entries"));
        }
        let mut entries: Vec<VkEntry> = Vec::with_capacity(count);
        for _ in 0..count {
            let index = dec.u8()? as usize;
            if index >= 4 * n || entries.last().is_some_and(|e| e.index >= index) {
                return Err(CodecError::invalid("verification key indices must ascend within 4n"));
            }
            let trapdoor = ClawFreeTrapdoor::decode_from(dec)?;
            if trapdoor.mode() != FunctionMode::FType {
                return Err(CodecError::invalid("verification key holds an injective trapdoor"));
            }
            entries.push(VkEntry {
                index,
                trapdoor,
                y: dec.u32()?,
            });
        }
        Ok(Self { n, entries })
    }
}

impl Canonical for CcCert {
    const KIND: u8 = kind::CC_CERT;

    fn encode_into(&self, enc: &mut Encoder) {
        enc.put_u16(self.entries.len() as u16);
        for entry in &self.entries {
            enc.put_bool(entry.e);
            enc.put_u16(entry.d as u16);
        }
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let count = dec.u16()? as usize;
        if count > MAX_INSTANCES {
            return Err(CodecError::invalid("too many certificate entries"));
        }
        let entries = (0..count)
            .map(|_| {
                Ok(CertEntry {
                    e: dec.bool()?,
                    d: dec.u16()? as u32,
                })
            })
            .collect::<Result<_, CodecError>>()?;
        Ok(Self { entries })
    }
}

fn encode_state(enc: &mut Encoder, state: &ClawInstanceState) {
    match *state {
        ClawInstanceState::FType { y, x0, x1, .. } => {
            enc.put_u8(0x46);
            enc.put_u32(y);
            enc.put_u32(x0);
            enc.put_u32(x1);
        }
        ClawInstanceState::GType { y, b, x, .. } => {
            enc.put_u8(0x47);
            enc.put_u32(y);
            enc.put_bool(b);
            enc.put_u32(x);
        }
    }
}

fn decode_state(dec: &mut Decoder<'_>, key: &ClawFreeKey) -> Result<ClawInstanceState, CodecError> {
    let w = key.w();
    let state = match dec.u8()? {
        0x46 => ClawInstanceState::FType {
            w,
            y: dec.u32()?,
            x0: dec.u32()?,
            x1: dec.u32()?,
        },
        0x47 => ClawInstanceState::GType {
            w,
            y: dec.u32()?,
            b: dec.bool()?,
            x: dec.u32()?,
        },
        other => return Err(CodecError::invalid(format!("instance state tag {other}"))),
    };
    let consistent = match state {
        ClawInstanceState::FType { y, x0, x1, .. } => {
            key.mode() == FunctionMode::FType && ntcf::chk(key, false, x0, y) && ntcf::chk(key, true, x1, y)
        }
        ClawInstanceState::GType { y, b, x, .. } => key.mode() == FunctionMode::GType && ntcf::chk(key, b, x, y),
    };
    if !consistent {
        return Err(CodecError::invalid("instance state does not match its key"));
    }
    Ok(state)
}

impl Canonical for CcCiphertext {
    const KIND: u8 = kind::CC_CIPHERTEXT;

    fn encode_into(&self, enc: &mut Encoder) {
        enc.put_u16(self.instances.len() as u16);
        for inst in &self.instances {
            inst.key.encode_into(enc);
            encode_state(enc, &inst.state);
        }
        self.nce_ct.encode_into(enc);
        enc.put_bytes(&self.ow_ct);
        enc.put_bits(&self.ct_msg);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let count = dec.u16()? as usize;
        if count == 0 || count > MAX_INSTANCES || count % 4 != 0 {
            return Err(CodecError::invalid("instance count must be 4n"));
        }
        let mut instances = Vec::with_capacity(count);
        for _ in 0..count {
            let key = ClawFreeKey::decode_from(dec)?;
            let state = decode_state(dec, &key)?;
            instances.push(CcInstance { key, state });
        }
        let nce_ct = RnceCiphertext::decode_from(dec)?;
        if nce_ct.len() != count {
            return Err(CodecError::invalid("subset ciphertext length does not match 4n"));
        }
        Ok(Self {
            instances,
            nce_ct,
            ow_ct: dec.bytes()?.to_vec(),
            ct_msg: dec.bits()?,
        })
    }
}
