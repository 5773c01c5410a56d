//! The certified-deletion game for the classical-channel scheme.
//!
//! Besides the real game, three instrumented modes replay the hybrid steps
//! of the security argument with a classical oracle:
//! `Hyb1` answers queries starting with `K` from an independent function
//! until the key is revealed, `Hyb2` additionally fakes the subset
//! ciphertext and reveals a matching key, and `Hyb3` additionally maps `Z`
//! to an independent `r` after the reveal. The challenger always masks the
//! message with the real `H`.

use rand::{Rng, RngCore};
use serde::Serialize;

use super::protocol::{self, finalize_with, sender_init_with, CtMessage, Finalized, ImagesMessage, KeysMessage};
use super::{
    cc_del, cc_vrfy, open_subset_and_key, subset_indicator, CcCert, CcCiphertext, CcError, CcKeyPair, CcParams,
    CcPublicKey, CcSecretKey, CertEntry,
};
use crate::bits;
use crate::game::{CdExperimentResult, GameEvent};
use crate::pke_cd::{default_challenge, guess_from_plaintext};
use crate::primitives::oracle::RandomOracle;
use crate::qsim::ClawInstanceState;
use crate::rnce;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CcExperimentMode {
    Real,
    Hyb1,
    Hyb2,
    Hyb3,
}

impl CcExperimentMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "real" => Some(Self::Real),
            "hyb1" => Some(Self::Hyb1),
            "hyb2" => Some(Self::Hyb2),
            "hyb3" => Some(Self::Hyb3),
            _ => None,
        }
    }
}

/// The adversary's view of `H` in the current phase of the game.
#[derive(Debug, Clone)]
pub struct GameOracle {
    mode: CcExperimentMode,
    msg_len: usize,
    k: Vec<bool>,
    salt: [u8; 32],
    z: Option<Vec<bool>>,
    r: Vec<bool>,
    revealed: bool,
}

impl GameOracle {
    fn new<R: Rng + ?Sized>(mode: CcExperimentMode, msg_len: usize, k: Vec<bool>, rng: &mut R) -> Self {
        Self {
            mode,
            msg_len,
            k,
            salt: rng.gen(),
            z: None,
            r: (0..msg_len).map(|_| rng.gen()).collect(),
            revealed: false,
        }
    }

    pub fn msg_len(&self) -> usize {
        self.msg_len
    }

    pub fn query(&self, input: &[bool]) -> Vec<bool> {
        if !self.revealed && self.mode >= CcExperimentMode::Hyb1 && input.starts_with(&self.k) {
            return self.independent(input);
        }
        if self.revealed && self.mode == CcExperimentMode::Hyb3 && self.z.as_deref() == Some(input) {
            return self.r.clone();
        }
        protocol::hash_z(input, self.msg_len)
    }

    fn independent(&self, input: &[bool]) -> Vec<bool> {
        let mut payload = self.salt.to_vec();
        payload.extend_from_slice(&(input.len() as u32).to_be_bytes());
        payload.extend(bits::pack(input));
        let out = RandomOracle::new("CD-H-PRIME", self.msg_len.div_ceil(8)).hash(&payload);
        bits::unpack(&out, self.msg_len)
    }
}

/// Receiver-side adversary. Every callback sees the oracle for its phase.
pub trait CcAdversary {
    fn name(&self) -> &'static str;

    fn choose(
        &mut self,
        pk: &CcPublicKey,
        params: &CcParams,
        oracle: &GameOracle,
        rng: &mut dyn RngCore,
    ) -> (Vec<bool>, Vec<bool>);

    fn respond(&mut self, keys: &KeysMessage, oracle: &GameOracle, rng: &mut dyn RngCore) -> ImagesMessage;

    /// Receives the sender's final message and returns a certificate.
    fn receive(&mut self, ct: CtMessage, oracle: &GameOracle, rng: &mut dyn RngCore) -> CcCert;

    /// `sk` is `None` after an abort or a rejected certificate.
    fn guess(&mut self, sk: Option<&CcSecretKey>, oracle: &GameOracle, rng: &mut dyn RngCore) -> bool;
}

pub fn run_cc_experiment<R: Rng + ?Sized>(
    keys: &CcKeyPair,
    params: &CcParams,
    adversary: &mut dyn CcAdversary,
    b: bool,
    mode: CcExperimentMode,
    rng: &mut R,
) -> Result<CdExperimentResult, CcError> {
    params.validate()?;
    let mut rng = &mut *rng;
    let k: Vec<bool> = (0..params.lambda).map(|_| rng.gen()).collect();
    let mut oracle = GameOracle::new(mode, params.msg_len, k.clone(), &mut rng);
    let mut transcript = vec![GameEvent::KeysIssued];

    let (m0, m1) = adversary.choose(&keys.pk, params, &oracle, &mut rng);
    if m0.len() != params.msg_len || m1.len() != params.msg_len {
        return Err(CcError::Protocol("challenge messages have the wrong length".into()));
    }
    transcript.push(GameEvent::Challenge {
        m0: bits::format_bits(&m0),
        m1: bits::format_bits(&m1),
    });
    let mb = if b { &m1 } else { &m0 };
    let (mut sender, keys_msg) = sender_init_with(&keys.pk, mb, params, Some(k), &mut rng)?;
    let images = adversary.respond(&keys_msg, &oracle, &mut rng);
    let fake = mode >= CcExperimentMode::Hyb2;
    let finalized = finalize_with(
        &mut sender,
        &images,
        fake.then_some((&keys.sk.nce, &keys.aux)),
        &mut rng,
    )?;
    let (vk, ct) = match finalized {
        Finalized::Sent { vk, ct } => (vk, ct),
        Finalized::Aborted { .. } => {
            transcript.push(GameEvent::Bottom);
            let bit_guess = adversary.guess(None, &oracle, &mut rng);
            transcript.push(GameEvent::Guess { bit: bit_guess });
            return Ok(CdExperimentResult {
                b,
                bit_guess,
                cert_accepted: false,
                transcript,
            });
        }
    };
    let fake_ct = ct.nce_ct.clone();
    transcript.push(GameEvent::CiphertextSent);
    let cert = adversary.receive(ct, &oracle, &mut rng);
    let accepted = cc_vrfy(&vk, &cert).unwrap_or(false);
    transcript.push(GameEvent::CertificateReceived { accepted });

    let revealed;
    let sk = if accepted {
        transcript.push(GameEvent::KeyRevealed);
        oracle.revealed = true;
        oracle.z = sender.z().map(<[bool]>::to_vec);
        if fake {
            let indicator = subset_indicator(sender.subset(), params.instances());
            let nce = rnce::rnce_reveal(&keys.pk.nce, &keys.sk.nce, &keys.aux, &fake_ct, &indicator)?;
            revealed = CcSecretKey {
                n: keys.sk.n,
                nce,
                ow_sk: keys.sk.ow_sk.clone(),
            };
            Some(&revealed)
        } else {
            Some(&keys.sk)
        }
    } else {
        transcript.push(GameEvent::Bottom);
        None
    };
    let bit_guess = adversary.guess(sk, &oracle, &mut rng);
    transcript.push(GameEvent::Guess { bit: bit_guess });
    Ok(CdExperimentResult {
        b,
        bit_guess,
        cert_accepted: accepted,
        transcript,
    })
}

/// What a strategy still holds about one instance after the certificate.
#[derive(Debug, Clone, Copy)]
enum Held {
    /// The register was measured computationally with this outcome.
    Preimage(bool, u32),
    /// The register was Hadamard-measured; a later computational measurement
    /// gives a uniform outcome.
    Deleted,
}

/// Shared bookkeeping of the catalog strategies.
#[derive(Debug, Default)]
struct StrategyState {
    challenge: Option<(Vec<bool>, Vec<bool>)>,
    w: usize,
    receiver: Option<protocol::ReceiverState>,
    classical: Option<CtMessage>,
    held: Vec<Held>,
}

impl StrategyState {
    fn choose(&mut self, params: &CcParams) -> (Vec<bool>, Vec<bool>) {
        let c = default_challenge(params.msg_len);
        self.challenge = Some(c.clone());
        self.w = params.w;
        c
    }

    fn respond(&mut self, keys: &KeysMessage, rng: &mut dyn RngCore) -> ImagesMessage {
        match protocol::receiver_respond(keys, rng) {
            Ok((state, images)) => {
                self.receiver = Some(state);
                images
            }
            Err(_) => ImagesMessage { ys: Vec::new() },
        }
    }

    fn complete(&mut self, ct: CtMessage) -> Option<CcCiphertext> {
        self.classical = Some(ct.clone());
        protocol::receiver_complete(self.receiver.take()?, ct).ok()
    }

    /// Decrypts with whatever is held, sampling a uniform outcome for
    /// deleted registers, and maps the result to a guess.
    fn guess(&mut self, sk: Option<&CcSecretKey>, oracle: &GameOracle, rng: &mut dyn RngCore) -> bool {
        let (m0, m1) = self.challenge.take().expect("choose ran");
        let (Some(sk), Some(ct)) = (sk, self.classical.take()) else {
            return rng.gen();
        };
        let Ok((s, k)) = open_subset_and_key(sk, &ct.nce_ct, &ct.ow_ct) else {
            return rng.gen();
        };
        let w = self.w;
        let preimages: Vec<(bool, u32)> = s
            .iter()
            .map(|&i| match self.held.get(i) {
                Some(Held::Preimage(b, x)) => (*b, *x),
                _ => (rng.gen(), rng.gen_range(0..1u32 << w)),
            })
            .collect();
        let z = protocol::encode_z(&k, &preimages, w);
        let m = bits::xor(&ct.ct_msg, &oracle.query(&z));
        guess_from_plaintext(&m, &m0, &m1, rng)
    }
}

fn computational_outcome(state: &ClawInstanceState, rng: &mut dyn RngCore) -> (bool, u32) {
    match *state {
        ClawInstanceState::GType { b, x, .. } => (b, x),
        ClawInstanceState::FType { x0, x1, .. } => {
            if rng.gen() {
                (true, x1)
            } else {
                (false, x0)
            }
        }
    }
}

fn fabricated_entry(w: usize, rng: &mut dyn RngCore) -> CertEntry {
    CertEntry {
        e: rng.gen(),
        d: rng.gen_range(1..1u32 << w),
    }
}

/// Deletes honestly, then tries to decrypt with the revealed key.
#[derive(Debug, Default)]
pub struct HonestDeleter(StrategyState);

impl CcAdversary for HonestDeleter {
    fn name(&self) -> &'static str {
        "honest-deleter"
    }

    fn choose(
        &mut self,
        _: &CcPublicKey,
        params: &CcParams,
        _: &GameOracle,
        _: &mut dyn RngCore,
    ) -> (Vec<bool>, Vec<bool>) {
        self.0.choose(params)
    }

    fn respond(&mut self, keys: &KeysMessage, _: &GameOracle, rng: &mut dyn RngCore) -> ImagesMessage {
        self.0.respond(keys, rng)
    }

    fn receive(&mut self, ct: CtMessage, _: &GameOracle, rng: &mut dyn RngCore) -> CcCert {
        let Some(full) = self.0.complete(ct) else {
            return CcCert { entries: Vec::new() };
        };
        self.0.held = vec![Held::Deleted; full.instances.len()];
        cc_del(full, rng).unwrap_or(CcCert { entries: Vec::new() })
    }

    fn guess(&mut self, sk: Option<&CcSecretKey>, oracle: &GameOracle, rng: &mut dyn RngCore) -> bool {
        self.0.guess(sk, oracle, rng)
    }
}

/// Measures every register computationally and fabricates the certificate.
#[derive(Debug, Default)]
pub struct KeepPreimages(StrategyState);

impl CcAdversary for KeepPreimages {
    fn name(&self) -> &'static str {
        "keep-preimages"
    }

    fn choose(
        &mut self,
        _: &CcPublicKey,
        params: &CcParams,
        _: &GameOracle,
        _: &mut dyn RngCore,
    ) -> (Vec<bool>, Vec<bool>) {
        self.0.choose(params)
    }

    fn respond(&mut self, keys: &KeysMessage, _: &GameOracle, rng: &mut dyn RngCore) -> ImagesMessage {
        self.0.respond(keys, rng)
    }

    fn receive(&mut self, ct: CtMessage, _: &GameOracle, rng: &mut dyn RngCore) -> CcCert {
        let Some(full) = self.0.complete(ct) else {
            return CcCert { entries: Vec::new() };
        };
        let mut entries = Vec::with_capacity(full.instances.len());
        for inst in &full.instances {
            let (b, x) = computational_outcome(&inst.state, rng);
            self.0.held.push(Held::Preimage(b, x));
            entries.push(fabricated_entry(self.0.w, rng));
        }
        CcCert { entries }
    }

    fn guess(&mut self, sk: Option<&CcSecretKey>, oracle: &GameOracle, rng: &mut dyn RngCore) -> bool {
        self.0.guess(sk, oracle, rng)
    }
}

/// Guesses the checked half: deletes honestly there and keeps preimages on
/// the rest.
#[derive(Debug, Default)]
pub struct GuessSubset(StrategyState);

impl CcAdversary for GuessSubset {
    fn name(&self) -> &'static str {
        "guess-subset"
    }

    fn choose(
        &mut self,
        _: &CcPublicKey,
        params: &CcParams,
        _: &GameOracle,
        _: &mut dyn RngCore,
    ) -> (Vec<bool>, Vec<bool>) {
        self.0.choose(params)
    }

    fn respond(&mut self, keys: &KeysMessage, _: &GameOracle, rng: &mut dyn RngCore) -> ImagesMessage {
        self.0.respond(keys, rng)
    }

    fn receive(&mut self, ct: CtMessage, _: &GameOracle, rng: &mut dyn RngCore) -> CcCert {
        let Some(full) = self.0.complete(ct) else {
            return CcCert { entries: Vec::new() };
        };
        let total = full.instances.len();
        let guess = rand::seq::index::sample(rng, total, total / 2).into_vec();
        let mut entries = Vec::with_capacity(total);
        for (i, inst) in full.instances.iter().enumerate() {
            if guess.contains(&i) {
                let (e, d) = crate::qsim::analytic_hadamard_sample(&inst.state, inst.key.label_map(), rng);
                self.0.held.push(Held::Deleted);
                entries.push(CertEntry { e, d });
            } else {
                let (b, x) = computational_outcome(&inst.state, rng);
                self.0.held.push(Held::Preimage(b, x));
                entries.push(fabricated_entry(self.0.w, rng));
            }
        }
        CcCert { entries }
    }

    fn guess(&mut self, sk: Option<&CcSecretKey>, oracle: &GameOracle, rng: &mut dyn RngCore) -> bool {
        self.0.guess(sk, oracle, rng)
    }
}

/// Exact certificate acceptance probability of a catalog strategy.
pub fn analytic_acceptance_probability(strategy: &str, n: usize, w: usize) -> Option<f64> {
    let honest = 1.0 - 0.5f64.powi(w as i32);
    match strategy {
        "honest-deleter" => Some(super::honest_acceptance_probability(n, w)),
        "keep-preimages" => Some(0.5f64.powi(2 * n as i32)),
        // j of the 2n checked instances fall in the guessed half
        // (hypergeometric); those pass unless d = 0, the rest pass w.p. 1/2
        "guess-subset" => {
            let half = 2 * n;
            let total = binomial(4 * n, half);
            Some(
                (0..=half)
                    .map(|j| {
                        binomial(half, j) * binomial(half, half - j) / total
                            * honest.powi(j as i32)
                            * 0.5f64.powi((half - j) as i32)
                    })
                    .sum(),
            )
        }
        _ => None,
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn strategy_by_name(name: &str) -> Option<Box<dyn CcAdversary + Send>> {
    match name {
        "honest-deleter" => Some(Box::new(HonestDeleter::default())),
        "keep-preimages" => Some(Box::new(KeepPreimages::default())),
        "guess-subset" => Some(Box::new(GuessSubset::default())),
        _ => None,
    }
}

pub const STRATEGIES: &[&str] = &["honest-deleter", "keep-preimages", "guess-subset"];
