//! Sender and receiver state machines of the interactive encryption.

use rand::seq::index;
use rand::Rng;

use super::{CcCiphertext, CcError, CcInstance, CcParams, CcPublicKey, CcVerificationKey, VkEntry, MAX_INSTANCES};
use crate::bits::{self, BitWriter};
use crate::codec::{kind, Canonical, CodecError, Decoder, Encoder};
use crate::ntcf::{self, ClawFreeKey, ClawFreeTrapdoor};
use crate::primitives;
use crate::primitives::oracle::{RandomOracle, TAG_H};
use crate::qsim;
use crate::rnce::{self, RnceAux, RnceCiphertext, RnceSecretKey};

/// Sender to receiver: one function key per instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeysMessage {
    pub keys: Vec<ClawFreeKey>,
}

/// Receiver to sender: one image per instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImagesMessage {
    pub ys: Vec<u32>,
}

/// Sender to receiver: the classical part of the ciphertext.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtMessage {
    pub nce_ct: RnceCiphertext,
    pub ow_ct: Vec<u8>,
    pub ct_msg: Vec<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SenderPhase {
    Init,
    AwaitImages,
    Done,
    Aborted,
}

#[derive(Debug, Clone)]
pub struct SenderState {
    phase: SenderPhase,
    params: CcParams,
    pk: CcPublicKey,
    m: Vec<bool>,
    s: Vec<usize>,
    keys: Vec<ClawFreeKey>,
    trapdoors: Vec<ClawFreeTrapdoor>,
    k: Vec<bool>,
    z: Option<Vec<bool>>,
}

impl SenderState {
    pub fn phase(&self) -> SenderPhase {
        self.phase
    }

    pub fn params(&self) -> &CcParams {
        &self.params
    }

    /// The hidden subset, ascending.
    pub fn subset(&self) -> &[usize] {
        &self.s
    }

    pub fn k(&self) -> &[bool] {
        &self.k
    }

    /// Defined only after a successful image check.
    pub fn z(&self) -> Option<&[bool]> {
        self.z.as_deref()
    }

    pub fn keys(&self) -> &[ClawFreeKey] {
        &self.keys
    }
}

pub enum Finalized {
    Sent { vk: CcVerificationKey, ct: CtMessage },
    Aborted { reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiverState {
    instances: Vec<CcInstance>,
}

impl ReceiverState {
    pub fn instances(&self) -> &[CcInstance] {
        &self.instances
    }
}

/// `Z` as a fixed-width bit string: `K`, then `b ∥ x` per element of `S`.
pub fn encode_z(k: &[bool], preimages: &[(bool, u32)], w: usize) -> Vec<bool> {
    let mut out = BitWriter::new();
    out.push_bits(k);
    for &(b, x) in preimages {
        out.push_bit(b);
        out.push_uint(x, w);
    }
    out.into_bits()
}

/// `H(Z)` truncated to `len` bits.
pub fn hash_z(z: &[bool], len: usize) -> Vec<bool> {
    let oracle = RandomOracle::new(TAG_H, len.div_ceil(8));
    bits::unpack(&oracle.hash(&bits::pack(z)), len)
}

fn random_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<bool> {
    (0..len).map(|_| rng.gen()).collect()
}

pub fn sender_init<R: Rng + ?Sized>(
    pk: &CcPublicKey,
    m: &[bool],
    params: &CcParams,
    rng: &mut R,
) -> Result<(SenderState, KeysMessage), CcError> {
    sender_init_with(pk, m, params, None, rng)
}

/// `k` fixes the one-way key in advance, as the hybrid experiments need.
pub(crate) fn sender_init_with<R: Rng + ?Sized>(
    pk: &CcPublicKey,
    m: &[bool],
    params: &CcParams,
    k: Option<Vec<bool>>,
    rng: &mut R,
) -> Result<(SenderState, KeysMessage), CcError> {
    params.validate()?;
    if pk.n != params.n {
        return Err(CcError::Params(format!(
            "public key is for n = {}, parameters say {}",
            pk.n, params.n
        )));
    }
    if m.len() != params.msg_len {
        return Err(CcError::MessageLength {
            expected: params.msg_len,
            found: m.len(),
        });
    }
    let total = params.instances();
    let mut s = index::sample(rng, total, 2 * params.n).into_vec();
    s.sort_unstable();
    let mut keys = Vec::with_capacity(total);
    let mut trapdoors = Vec::with_capacity(total);
    for i in 0..total {
        let (key, td) = if s.binary_search(&i).is_ok() {
            ntcf::gen_g(params.w, rng)?
        } else {
            ntcf::gen_f(params.w, rng)?
        };
        keys.push(key);
        trapdoors.push(td);
    }
    let k = match k {
        Some(k) if k.len() == params.lambda as usize => k,
        Some(k) => return Err(CcError::Params(format!("one-way key has {} bits", k.len()))),
        None => random_bits(params.lambda as usize, rng),
    };
    let msg = KeysMessage { keys: keys.clone() };
    let state = SenderState {
        phase: SenderPhase::AwaitImages,
        params: *params,
        pk: pk.clone(),
        m: m.to_vec(),
        s,
        keys,
        trapdoors,
        k,
        z: None,
    };
    Ok((state, msg))
}

/// Runs the sampler on every key and keeps the collapsed registers.
pub fn receiver_respond<R: Rng + ?Sized>(
    msg: &KeysMessage,
    rng: &mut R,
) -> Result<(ReceiverState, ImagesMessage), CcError> {
    let count = msg.keys.len();
    if count == 0 || count % 4 != 0 || count > MAX_INSTANCES {
        return Err(CcError::Protocol(format!("received {count} keys, expected 4n")));
    }
    let w = msg.keys[0].w();
    if msg.keys.iter().any(|k| k.w() != w) {
        return Err(CcError::Protocol("keys disagree on the preimage width".into()));
    }
    let mut instances = Vec::with_capacity(count);
    let mut ys = Vec::with_capacity(count);
    for key in &msg.keys {
        let (y, state, _) = qsim::prepare_range_superposition(key, rng)?;
        ys.push(y);
        instances.push(CcInstance {
            key: key.clone(),
            state,
        });
    }
    Ok((ReceiverState { instances }, ImagesMessage { ys }))
}

pub fn sender_finalize<R: Rng + ?Sized>(
    state: &mut SenderState,
    msg: &ImagesMessage,
    rng: &mut R,
) -> Result<Finalized, CcError> {
    finalize_with(state, msg, None, rng)
}

/// With `fake` set, the subset ciphertext is an RNCE fake instead of an
/// encryption of `S`.
pub(crate) fn finalize_with<R: Rng + ?Sized>(
    state: &mut SenderState,
    msg: &ImagesMessage,
    fake: Option<(&RnceSecretKey, &RnceAux)>,
    rng: &mut R,
) -> Result<Finalized, CcError> {
    if state.phase != SenderPhase::AwaitImages {
        return Err(CcError::Protocol(format!("finalize called in phase {:?}", state.phase)));
    }
    let total = state.params.instances();
    let abort = |state: &mut SenderState, reason: String| {
        state.phase = SenderPhase::Aborted;
        Ok(Finalized::Aborted { reason })
    };
    if msg.ys.len() != total {
        return abort(state, format!("received {} images, expected {total}", msg.ys.len()));
    }
    if let Some(i) = (0..total).find(|&i| msg.ys[i] >= 1 << state.keys[i].image_width()) {
        return abort(state, format!("image {i} is out of range"));
    }
    let mut preimages = Vec::with_capacity(state.s.len());
    for &i in &state.s {
        let y = msg.ys[i];
        match ntcf::invert_g(&state.trapdoors[i], y) {
            Ok((b, x)) if ntcf::chk(&state.keys[i], b, x, y) => preimages.push((b, x)),
            _ => return abort(state, format!("image check failed on instance {i}")),
        }
    }
    assert!(
        state.s.windows(2).all(|p| p[0] < p[1]),
        "S must be enumerated in ascending order"
    );
    let z = encode_z(&state.k, &preimages, state.params.w);
    debug_assert_eq!(z.len(), state.params.z_len());

    let indicator = super::subset_indicator(&state.s, total);
    let nce_ct = match fake {
        None => rnce::rnce_enc(&state.pk.nce, &indicator, rng)?,
        Some((sk, aux)) => rnce::rnce_fake(&state.pk.nce, sk, aux, rng)?,
    };
    let ow_ct = primitives::pke_enc(&state.pk.ow_pk, &bits::pack(&state.k), rng)?;
    let ct_msg = bits::xor(&state.m, &hash_z(&z, state.params.msg_len));
    let entries = (0..total)
        .filter(|i| state.s.binary_search(i).is_err())
        .map(|i| VkEntry {
            index: i,
            trapdoor: state.trapdoors[i].clone(),
            y: msg.ys[i],
        })
        .collect();
    state.z = Some(z);
    state.phase = SenderPhase::Done;
    Ok(Finalized::Sent {
        vk: CcVerificationKey {
            n: state.params.n,
            entries,
        },
        ct: CtMessage { nce_ct, ow_ct, ct_msg },
    })
}

/// Attaches the sender's final message to the retained registers.
pub fn receiver_complete(state: ReceiverState, msg: CtMessage) -> Result<CcCiphertext, CcError> {
    if msg.nce_ct.len() != state.instances.len() {
        return Err(CcError::Protocol(
            "subset ciphertext does not match the instance count".into(),
        ));
    }
    Ok(CcCiphertext {
        instances: state.instances,
        nce_ct: msg.nce_ct,
        ow_ct: msg.ow_ct,
        ct_msg: msg.ct_msg,
    })
}

impl Canonical for KeysMessage {
    const KIND: u8 = kind::CC_KEYS_MESSAGE;

    fn encode_into(&self, enc: &mut Encoder) {
        enc.put_u16(self.keys.len() as u16);
        for key in &self.keys {
            key.encode_into(enc);
        }
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let count = dec.u16()? as usize;
        if count > MAX_INSTANCES {
            return Err(CodecError::invalid("too many keys"));
        }
        let keys = (0..count)
            .map(|_| ClawFreeKey::decode_from(dec))
            .collect::<Result<_, _>>()?;
        Ok(Self { keys })
    }
}

impl Canonical for ImagesMessage {
    const KIND: u8 = kind::CC_IMAGES_MESSAGE;

    fn encode_into(&self, enc: &mut Encoder) {
        enc.put_u16(self.ys.len() as u16);
        for &y in &self.ys {
            enc.put_u32(y);
        }
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let count = dec.u16()? as usize;
        if count > MAX_INSTANCES {
            return Err(CodecError::invalid("too many images"));
        }
        let ys = (0..count).map(|_| dec.u32()).collect::<Result<_, _>>()?;
        Ok(Self { ys })
    }
}

impl Canonical for CtMessage {
    const KIND: u8 = kind::CC_CT_MESSAGE;

    fn encode_into(&self, enc: &mut Encoder) {
        self.nce_ct.encode_into(enc);
        enc.put_bytes(&self.ow_ct);
        enc.put_bits(&self.ct_msg);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            nce_ct: RnceCiphertext::decode_from(dec)?,
            ow_ct: dec.bytes()?.to_vec(),
            ct_msg: dec.bits()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cc::{cc_keygen, CcKeyPair};
    use crate::ntcf::FunctionMode;
    use crate::primitives::SchemeId;
    use crate::qsim::ClawInstanceState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    fn setup(n: usize, w: usize) -> (CcParams, CcKeyPair) {
        let params = CcParams {
            n,
            w,
            lambda: 128,
            msg_len: 8,
            scheme: SchemeId::TestStub,
        };
        let kp = cc_keygen(&params, &mut rng(99)).unwrap();
        (params, kp)
    }

    #[test]
    fn key_modes_follow_subset() {
        let (params, kp) = setup(3, 4);
        for seed in 0..20 {
            let (state, msg) = sender_init(&kp.pk, &[false; 8], &params, &mut rng(seed)).unwrap();
            assert_eq!(state.subset().len(), 6);
            assert!(state.subset().windows(2).all(|p| p[0] < p[1]));
            for (i, key) in msg.keys.iter().enumerate() {
                let expected = if state.subset().contains(&i) {
                    FunctionMode::GType
                } else {
                    FunctionMode::FType
                };
                assert_eq!(key.mode(), expected);
            }
            assert_eq!(state.k().len(), 128);
            assert!(state.z().is_none());
        }
    }

    #[test]
    fn subset_distribution_n1() {
        let (params, kp) = setup(1, 2);
        let trials = 6000;
        let mut counts = std::collections::HashMap::new();
        let mut r = rng(1);
        for _ in 0..trials {
            let (state, _) = sender_init(&kp.pk, &[false; 8], &params, &mut r).unwrap();
            *counts.entry(state.subset().to_vec()).or_insert(0usize) += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        for c in counts.values() {
            assert!((*c as f64 / trials as f64 - p).abs() < 4.0 * sigma);
        }
    }

    #[test]
    fn receiver_states_match_images() {
        let (params, kp) = setup(2, 3);
        let (state, msg) = sender_init(&kp.pk, &[true; 8], &params, &mut rng(2)).unwrap();
        let (receiver, images) = receiver_respond(&msg, &mut rng(3)).unwrap();
        for (i, inst) in receiver.instances().iter().enumerate() {
            assert_eq!(inst.state.y(), images.ys[i]);
            match inst.state {
                ClawInstanceState::GType { b, x, y, .. } => {
                    assert!(state.subset().contains(&i));
                    assert!(ntcf::chk(&inst.key, b, x, y));
                }
                ClawInstanceState::FType { x0, x1, y, .. } => {
                    assert!(!state.subset().contains(&i));
                    assert!(ntcf::chk(&inst.key, false, x0, y) && ntcf::chk(&inst.key, true, x1, y));
                }
            }
        }
    }

    #[test]
    fn honest_receiver_never_aborts() {
        let (params, kp) = setup(2, 4);
        let mut r = rng(4);
        for _ in 0..1000 {
            let (mut state, msg) = sender_init(&kp.pk, &[false; 8], &params, &mut r).unwrap();
            let (_, images) = receiver_respond(&msg, &mut r).unwrap();
            assert!(matches!(
                sender_finalize(&mut state, &images, &mut r).unwrap(),
                Finalized::Sent { .. }
            ));
            assert_eq!(state.phase(), SenderPhase::Done);
            assert_eq!(state.z().unwrap().len(), params.z_len());
        }
    }

    #[test]
    fn corrupted_images_abort() {
        let (params, kp) = setup(1, 2);
        let (state, msg) = sender_init(&kp.pk, &[false; 8], &params, &mut rng(5)).unwrap();
        let (_, images) = receiver_respond(&msg, &mut rng(6)).unwrap();
        let i = state.subset()[0];
        let mut bad = images.clone();
        bad.ys[i] = 1 << (params.w + 1);
        let mut s = state.clone();
        assert!(matches!(
            sender_finalize(&mut s, &bad, &mut rng(7)).unwrap(),
            Finalized::Aborted { .. }
        ));
        assert_eq!(s.phase(), SenderPhase::Aborted);
        assert!(s.z().is_none());
        // a second finalize is out of order
        assert!(sender_finalize(&mut s, &images, &mut rng(7)).is_err());
        let mut short = images.clone();
        short.ys.pop();
        let mut s = state.clone();
        assert!(matches!(
            sender_finalize(&mut s, &short, &mut rng(7)).unwrap(),
            Finalized::Aborted { .. }
        ));
    }

    #[test]
    fn z_layout() {
        let k = vec![true, false, true];
        let z = encode_z(&k, &[(true, 0b01), (false, 0b10)], 2);
        assert_eq!(bits::format_bits(&z), "101101010");
        assert_eq!(hash_z(&z, 12).len(), 12);
        assert_eq!(hash_z(&z, 12)[..8], hash_z(&z, 8)[..]);
    }

    #[test]
    fn z_golden_n1_w2() {
        let (params, kp) = setup(1, 2);
        let (mut state, msg) = sender_init(&kp.pk, &[false; 8], &params, &mut rng(0)).unwrap();
        let (_, images) = receiver_respond(&msg, &mut rng(1)).unwrap();
        sender_finalize(&mut state, &images, &mut rng(2)).unwrap();
        let z = state.z().unwrap();
        assert_eq!(z.len(), 128 + 6);
        assert_eq!(state.subset(), GOLDEN_S);
        assert_eq!(bits::format_bits(&z[128..]), GOLDEN_Z_TAIL);
        assert_eq!(bits::pack(&z[..16]), GOLDEN_K_PREFIX);
    }

    const GOLDEN_S: &[usize] = &[0, 1];
    const GOLDEN_Z_TAIL: &str = "101001";
    const GOLDEN_K_PREFIX: [u8; 2] = [59, 227];
}
