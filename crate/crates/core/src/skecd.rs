//! Reusable secret-key encryption with certified deletion.
//!
//! Same hybrid layout as [`crate::pke_cd`], with the secret-key RNCE as the
//! encapsulation layer. The security game grants encryption queries before
//! and after the challenge.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bits;
use crate::codec::{kind, Canonical, CodecError, Decoder, Encoder};
use crate::game::{CdExperimentResult, ExperimentMode, GameEvent, QueryPhase, Remnant};
use crate::otske::{self, DeletionCert, OtskeKey};
use crate::pke_cd::{self, encapsulation_len, guess_from_plaintext, PkeCdCiphertext, PkeCdError};
use crate::rnce::{self, RnceAux, RnceBase, RncePublicKey, RnceSecretKey};

/// Ciphertexts share the hybrid layout.
pub type SkeCdCiphertext = PkeCdCiphertext;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeCdKey {
    pub msg_len: usize,
    pub ek: RncePublicKey,
    pub dk: RnceSecretKey,
    /// Retained for the fake/reveal experiment mode only.
    pub aux: RnceAux,
}

pub fn skecd_keygen<R: Rng + ?Sized>(msg_len: usize, rng: &mut R) -> Result<SkeCdKey, PkeCdError> {
    let (ek, dk, aux) = pke_cd::hybrid_keygen(RnceBase::Secret, msg_len, rng)?;
    Ok(SkeCdKey { msg_len, ek, dk, aux })
}

pub fn skecd_enc<R: Rng + ?Sized>(
    key: &SkeCdKey,
    m: &[bool],
    rng: &mut R,
) -> Result<(OtskeKey, SkeCdCiphertext), PkeCdError> {
    pke_cd::hybrid_enc(&key.ek, key.msg_len, m, rng)
}

pub fn skecd_dec<R: Rng + ?Sized>(key: &SkeCdKey, ct: SkeCdCiphertext, rng: &mut R) -> Result<Vec<bool>, PkeCdError> {
    pke_cd::hybrid_dec(&key.dk, ct, rng)
}

pub fn skecd_del<R: Rng + ?Sized>(
    ct: SkeCdCiphertext,
    rng: &mut R,
) -> Result<(DeletionCert, Remnant<SkeCdCiphertext>), PkeCdError> {
    pke_cd::pkecd_del(ct, rng)
}

pub fn skecd_vrfy(vk: &OtskeKey, cert: &DeletionCert) -> Result<bool, PkeCdError> {
    Ok(otske::otske_vrfy(vk, cert)?)
}

pub trait EncryptionOracle {
    fn msg_len(&self) -> usize;

    fn encrypt(&mut self, m: &[bool]) -> Result<(OtskeKey, SkeCdCiphertext), PkeCdError>;
}

struct ChallengerOracle<'a> {
    key: &'a SkeCdKey,
    rng: ChaCha20Rng,
    phase: QueryPhase,
    log: Vec<GameEvent>,
}

impl EncryptionOracle for ChallengerOracle<'_> {
    fn msg_len(&self) -> usize {
        self.key.msg_len
    }

    fn encrypt(&mut self, m: &[bool]) -> Result<(OtskeKey, SkeCdCiphertext), PkeCdError> {
        self.log.push(GameEvent::EncryptionQuery { phase: self.phase });
        skecd_enc(self.key, m, &mut self.rng)
    }
}

pub trait SkeCdAdversary {
    fn name(&self) -> &'static str;

    fn choose(&mut self, oracle: &mut dyn EncryptionOracle, rng: &mut dyn RngCore) -> (Vec<bool>, Vec<bool>);

    fn receive(
        &mut self,
        ct: SkeCdCiphertext,
        oracle: &mut dyn EncryptionOracle,
        rng: &mut dyn RngCore,
    ) -> DeletionCert;

    /// `key` is `None` when the certificate was rejected.
    fn guess(&mut self, key: Option<&SkeCdKey>, oracle: &mut dyn EncryptionOracle, rng: &mut dyn RngCore) -> bool;
}

pub fn run_skecd_experiment<R: Rng + ?Sized>(
    key: &SkeCdKey,
    adversary: &mut dyn SkeCdAdversary,
    b: bool,
    mode: ExperimentMode,
    rng: &mut R,
) -> Result<CdExperimentResult, PkeCdError> {
    let mut rng = &mut *rng;
    let mut oracle = ChallengerOracle {
        key,
        rng: ChaCha20Rng::from_rng(&mut rng).expect("infallible source"),
        phase: QueryPhase::BeforeChallenge,
        log: vec![GameEvent::KeysIssued],
    };
    let (m0, m1) = adversary.choose(&mut oracle, &mut rng);
    if m0.len() != key.msg_len || m1.len() != key.msg_len {
        return Err(PkeCdError::Protocol("challenge messages have the wrong length".into()));
    }
    oracle.log.push(GameEvent::Challenge {
        m0: bits::format_bits(&m0),
        m1: bits::format_bits(&m1),
    });
    let mb = if b { &m1 } else { &m0 };
    let (vk, ct) = match mode {
        ExperimentMode::Real => skecd_enc(key, mb, &mut rng)?,
        ExperimentMode::FakeReveal => {
            let ske_key = otske::otske_keygen(key.msg_len, &mut rng)?;
            let nce_ct = rnce::rnce_fake(&key.ek, &key.dk, &key.aux, &mut rng)?;
            let ske_ct = otske::otske_enc(&ske_key, mb)?;
            (ske_key, PkeCdCiphertext { nce_ct, ske_ct })
        }
    };
    let fake_ct = (mode == ExperimentMode::FakeReveal).then(|| ct.nce_ct.clone());
    oracle.log.push(GameEvent::CiphertextSent);
    oracle.phase = QueryPhase::AfterChallenge;
    let cert = adversary.receive(ct, &mut oracle, &mut rng);
    let accepted = otske::otske_vrfy(&vk, &cert).unwrap_or(false);
    oracle.log.push(GameEvent::CertificateReceived { accepted });
    oracle.phase = QueryPhase::AfterVerdict;
    let revealed;
    let released = if !accepted {
        oracle.log.push(GameEvent::Bottom);
        None
    } else {
        oracle.log.push(GameEvent::KeyRevealed);
        match fake_ct {
            None => Some(key),
            Some(fake) => {
                let dk = rnce::rnce_reveal(&key.ek, &key.dk, &key.aux, &fake, &vk.to_bits())?;
                revealed = SkeCdKey { dk, ..key.clone() };
                Some(&revealed)
            }
        }
    };
    let bit_guess = adversary.guess(released, &mut oracle, &mut rng);
    let mut transcript = oracle.log;
    transcript.push(GameEvent::Guess { bit: bit_guess });
    Ok(CdExperimentResult {
        b,
        bit_guess,
        cert_accepted: accepted,
        transcript,
    })
}

/// Queries the oracle once in every phase, deletes honestly, and decrypts the
/// remnant with whatever key is released.
#[derive(Debug, Default)]
pub struct HonestDeleter {
    challenge: Option<(Vec<bool>, Vec<bool>)>,
    remnant: Option<SkeCdCiphertext>,
}

impl SkeCdAdversary for HonestDeleter {
    fn name(&self) -> &'static str {
        "honest-deleter"
    }

    fn choose(&mut self, oracle: &mut dyn EncryptionOracle, _: &mut dyn RngCore) -> (Vec<bool>, Vec<bool>) {
        let c = pke_cd::default_challenge(oracle.msg_len());
        let _ = oracle.encrypt(&c.0);
        self.challenge = Some(c.clone());
        c
    }

    fn receive(
        &mut self,
        ct: SkeCdCiphertext,
        oracle: &mut dyn EncryptionOracle,
        rng: &mut dyn RngCore,
    ) -> DeletionCert {
        let m = vec![false; oracle.msg_len()];
        let _ = oracle.encrypt(&m);
        let (cert, rem) = skecd_del(ct, rng).expect("well-formed challenge");
        self.remnant = Some(rem.into_remnant());
        cert
    }

    fn guess(&mut self, key: Option<&SkeCdKey>, oracle: &mut dyn EncryptionOracle, rng: &mut dyn RngCore) -> bool {
        let (m0, m1) = self.challenge.take().expect("choose ran");
        let _ = oracle.encrypt(&m1);
        match (key, self.remnant.take()) {
            (Some(key), Some(rem)) => match skecd_dec(key, rem, rng) {
                Ok(m) => guess_from_plaintext(&m, &m0, &m1, rng),
                Err(_) => rng.gen(),
            },
            _ => rng.gen(),
        }
    }
}

/// Submits a random certificate and keeps the ciphertext intact.
#[derive(Debug, Default)]
pub struct KeepAndDecrypt {
    challenge: Option<(Vec<bool>, Vec<bool>)>,
    kept: Option<SkeCdCiphertext>,
}

impl SkeCdAdversary for KeepAndDecrypt {
    fn name(&self) -> &'static str {
        "keep-and-decrypt"
    }

    fn choose(&mut self, oracle: &mut dyn EncryptionOracle, _: &mut dyn RngCore) -> (Vec<bool>, Vec<bool>) {
        let c = pke_cd::default_challenge(oracle.msg_len());
        self.challenge = Some(c.clone());
        c
    }

    fn receive(&mut self, ct: SkeCdCiphertext, _: &mut dyn EncryptionOracle, rng: &mut dyn RngCore) -> DeletionCert {
        let kappa = ct.ske_ct.register().num_qubits();
        self.kept = Some(ct);
        DeletionCert {
            bits: (0..kappa).map(|_| rng.gen()).collect(),
        }
    }

    fn guess(&mut self, key: Option<&SkeCdKey>, _: &mut dyn EncryptionOracle, rng: &mut dyn RngCore) -> bool {
        let (m0, m1) = self.challenge.take().expect("choose ran");
        match (key, self.kept.take()) {
            (Some(key), Some(ct)) => match skecd_dec(key, ct, rng) {
                Ok(m) => guess_from_plaintext(&m, &m0, &m1, rng),
                Err(_) => rng.gen(),
            },
            _ => rng.gen(),
        }
    }
}

pub fn strategy_by_name(name: &str) -> Option<Box<dyn SkeCdAdversary + Send>> {
    match name {
        "honest-deleter" => Some(Box::new(HonestDeleter::default())),
        "keep-and-decrypt" => Some(Box::new(KeepAndDecrypt::default())),
        _ => None,
    }
}

pub const STRATEGIES: &[&str] = &["honest-deleter", "keep-and-decrypt"];

/// SECRET: the whole key, including the fake/reveal trapdoor.
impl Canonical for SkeCdKey {
    const KIND: u8 = kind::SKECD_KEY;

    fn encode_into(&self, enc: &mut Encoder) {
        enc.put_u8(self.msg_len as u8);
        self.ek.encode_into(enc);
        self.dk.encode_into(enc);
        self.aux.encode_into(enc);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let msg_len = dec.u8()? as usize;
        let ek = RncePublicKey::decode_from(dec)?;
        let dk = RnceSecretKey::decode_from(dec)?;
        let aux = RnceAux::decode_from(dec)?;
        let slots = encapsulation_len(msg_len);
        if ek.len() != slots || dk.len() != slots || aux.z_star.len() != slots {
            return Err(CodecError::invalid("slot count does not match message length"));
        }
        Ok(Self { msg_len, ek, dk, aux })
    }
}
