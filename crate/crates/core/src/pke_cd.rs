//! Public-key encryption with certified deletion, hybrid construction.
//!
//! A fresh one-time key encrypts the message over BB84 states; the key itself
//! is encapsulated under RNCE. The verification key is the one-time key.

use rand::{Rng, RngCore};
use thiserror::Error;

use crate::bits;
use crate::codec::{kind, Canonical, CodecError, Decoder, Encoder};
use crate::game::{CdExperimentResult, ExperimentMode, GameEvent, Remnant};
use crate::otske::{self, DeletionCert, OtskeCiphertext, OtskeError, OtskeKey};
use crate::primitives::SchemeId;
use crate::rnce::{self, RnceAux, RnceBase, RnceCiphertext, RnceError, RncePublicKey, RnceSecretKey};

#[derive(Debug, Error, PartialEq)]
pub enum PkeCdError {
    #[error("message length {found} does not match the key's {expected}")]
    MessageLength { expected: usize, found: usize },
    #[error("encapsulated key is malformed: {0}")]
    BadEncapsulation(String),
    #[error("adversary violated the game: {0}")]
    Protocol(String),
    #[error(transparent)]
    Rnce(#[from] RnceError),
    #[error(transparent)]
    Otske(#[from] OtskeError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PkeCdPublicKey {
    pub msg_len: usize,
    pub nce: RncePublicKey,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PkeCdSecretKey {
    pub msg_len: usize,
    pub nce: RnceSecretKey,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PkeCdKeyPair {
    pub pk: PkeCdPublicKey,
    pub sk: PkeCdSecretKey,
    /// Retained for the fake/reveal experiment mode only.
    pub aux: RnceAux,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PkeCdCiphertext {
    pub nce_ct: RnceCiphertext,
    pub ske_ct: OtskeCiphertext,
}

/// RNCE slot count for a given message length.
pub fn encapsulation_len(msg_len: usize) -> usize {
    otske::encoded_len(2 * msg_len)
}

/// Shared key generation for the public and the secret-key variants.
pub(crate) fn hybrid_keygen<R: Rng + ?Sized>(
    base: RnceBase,
    msg_len: usize,
    rng: &mut R,
) -> Result<(RncePublicKey, RnceSecretKey, RnceAux), PkeCdError> {
    if !(1..=otske::MAX_MSG_BITS).contains(&msg_len) {
        return Err(OtskeError::MessageLength(msg_len).into());
    }
    Ok(rnce::rnce_keygen(base, encapsulation_len(msg_len), rng)?)
}

pub(crate) fn hybrid_enc<R: Rng + ?Sized>(
    nce_pk: &RncePublicKey,
    msg_len: usize,
    m: &[bool],
    rng: &mut R,
) -> Result<(OtskeKey, PkeCdCiphertext), PkeCdError> {
    if m.len() != msg_len {
        return Err(PkeCdError::MessageLength {
            expected: msg_len,
            found: m.len(),
        });
    }
    let ske_key = otske::otske_keygen(msg_len, rng)?;
    let nce_ct = rnce::rnce_enc(nce_pk, &ske_key.to_bits(), rng)?;
    let ske_ct = otske::otske_enc(&ske_key, m)?;
    Ok((ske_key, PkeCdCiphertext { nce_ct, ske_ct }))
}

pub(crate) fn hybrid_dec<R: Rng + ?Sized>(
    nce_sk: &RnceSecretKey,
    ct: PkeCdCiphertext,
    rng: &mut R,
) -> Result<Vec<bool>, PkeCdError> {
    let key_bits = rnce::rnce_dec(nce_sk, &ct.nce_ct)?;
    let key = OtskeKey::from_bits(&key_bits).map_err(|e| PkeCdError::BadEncapsulation(e.to_string()))?;
    Ok(otske::otske_dec(&key, ct.ske_ct, rng)?)
}

pub fn pkecd_keygen<R: Rng + ?Sized>(
    scheme: SchemeId,
    lambda: u32,
    msg_len: usize,
    rng: &mut R,
) -> Result<PkeCdKeyPair, PkeCdError> {
    let (pk, sk, aux) = hybrid_keygen(RnceBase::Public { scheme, lambda }, msg_len, rng)?;
    Ok(PkeCdKeyPair {
        pk: PkeCdPublicKey { msg_len, nce: pk },
        sk: PkeCdSecretKey { msg_len, nce: sk },
        aux,
    })
}

/// Returns the verification key (the fresh one-time key) and the ciphertext.
pub fn pkecd_enc<R: Rng + ?Sized>(
    pk: &PkeCdPublicKey,
    m: &[bool],
    rng: &mut R,
) -> Result<(OtskeKey, PkeCdCiphertext), PkeCdError> {
    hybrid_enc(&pk.nce, pk.msg_len, m, rng)
}

/// Consumes the ciphertext.
pub fn pkecd_dec<R: Rng + ?Sized>(
    sk: &PkeCdSecretKey,
    ct: PkeCdCiphertext,
    rng: &mut R,
) -> Result<Vec<bool>, PkeCdError> {
    hybrid_dec(&sk.nce, ct, rng)
}

/// Consumes the ciphertext; the remnant keeps the collapsed register.
pub fn pkecd_del<R: Rng + ?Sized>(
    ct: PkeCdCiphertext,
    rng: &mut R,
) -> Result<(DeletionCert, Remnant<PkeCdCiphertext>), PkeCdError> {
    let (cert, rem) = otske::otske_del(ct.ske_ct, rng)?;
    Ok((
        cert,
        Remnant(PkeCdCiphertext {
            nce_ct: ct.nce_ct,
            ske_ct: rem.into_remnant(),
        }),
    ))
}

pub fn pkecd_vrfy(vk: &OtskeKey, cert: &DeletionCert) -> Result<bool, PkeCdError> {
    Ok(otske::otske_vrfy(vk, cert)?)
}

/// Adversary for the IND-CPA-CD game.
pub trait PkeCdAdversary {
    fn name(&self) -> &'static str;

    fn choose(&mut self, pk: &PkeCdPublicKey, rng: &mut dyn RngCore) -> (Vec<bool>, Vec<bool>);

    /// Receives the challenge ciphertext and returns a deletion certificate.
    fn receive(&mut self, ct: PkeCdCiphertext, rng: &mut dyn RngCore) -> DeletionCert;

    /// `sk` is `None` when the certificate was rejected.
    fn guess(&mut self, sk: Option<&PkeCdSecretKey>, rng: &mut dyn RngCore) -> bool;
}

pub fn run_pkecd_experiment<R: Rng + ?Sized>(
    keys: &PkeCdKeyPair,
    adversary: &mut dyn PkeCdAdversary,
    b: bool,
    mode: ExperimentMode,
    rng: &mut R,
) -> Result<CdExperimentResult, PkeCdError> {
    let mut transcript = vec![GameEvent::KeysIssued];
    let mut rng = &mut *rng;
    let (m0, m1) = adversary.choose(&keys.pk, &mut rng);
    let msg_len = keys.pk.msg_len;
    if m0.len() != msg_len || m1.len() != msg_len {
        return Err(PkeCdError::Protocol("challenge messages have the wrong length".into()));
    }
    transcript.push(GameEvent::Challenge {
        m0: bits::format_bits(&m0),
        m1: bits::format_bits(&m1),
    });
    let mb = if b { &m1 } else { &m0 };
    let (vk, ct) = match mode {
        ExperimentMode::Real => pkecd_enc(&keys.pk, mb, &mut rng)?,
        ExperimentMode::FakeReveal => {
            let ske_key = otske::otske_keygen(msg_len, &mut rng)?;
            let nce_ct = rnce::rnce_fake(&keys.pk.nce, &keys.sk.nce, &keys.aux, &mut rng)?;
            let ske_ct = otske::otske_enc(&ske_key, mb)?;
            (ske_key, PkeCdCiphertext { nce_ct, ske_ct })
        }
    };
    let fake_ct = (mode == ExperimentMode::FakeReveal).then(|| ct.nce_ct.clone());
    transcript.push(GameEvent::CiphertextSent);
    let cert = adversary.receive(ct, &mut rng);
    let accepted = otske::otske_vrfy(&vk, &cert).unwrap_or(false);
    transcript.push(GameEvent::CertificateReceived { accepted });
    let revealed;
    let sk = if !accepted {
        transcript.push(GameEvent::Bottom);
        None
    } else {
        transcript.push(GameEvent::KeyRevealed);
        match fake_ct {
            None => Some(&keys.sk),
            Some(fake) => {
                let nce = rnce::rnce_reveal(&keys.pk.nce, &keys.sk.nce, &keys.aux, &fake, &vk.to_bits())?;
                revealed = PkeCdSecretKey { msg_len, nce };
                Some(&revealed)
            }
        }
    };
    let bit_guess = adversary.guess(sk, &mut rng);
    transcript.push(GameEvent::Guess { bit: bit_guess });
    Ok(CdExperimentResult {
        b,
        bit_guess,
        cert_accepted: accepted,
        transcript,
    })
}

/// Challenge messages used by the catalog strategies: all zeros and all ones.
pub fn default_challenge(msg_len: usize) -> (Vec<bool>, Vec<bool>) {
    (vec![false; msg_len], vec![true; msg_len])
}

/// Maps a decrypted message to a guess, falling back to a coin flip.
pub(crate) fn guess_from_plaintext(m: &[bool], m0: &[bool], m1: &[bool], rng: &mut dyn RngCore) -> bool {
    if m == m1 && m != m0 {
        true
    } else if m == m0 && m != m1 {
        false
    } else {
        rng.gen()
    }
}

/// Deletes honestly, then uses the revealed key on what is left.
#[derive(Debug, Default)]
pub struct HonestDeleter {
    challenge: Option<(Vec<bool>, Vec<bool>)>,
    remnant: Option<PkeCdCiphertext>,
}

impl PkeCdAdversary for HonestDeleter {
    fn name(&self) -> &'static str {
        "honest-deleter"
    }

    fn choose(&mut self, pk: &PkeCdPublicKey, _: &mut dyn RngCore) -> (Vec<bool>, Vec<bool>) {
        let c = default_challenge(pk.msg_len);
        self.challenge = Some(c.clone());
        c
    }

    fn receive(&mut self, ct: PkeCdCiphertext, rng: &mut dyn RngCore) -> DeletionCert {
        let (cert, rem) = pkecd_del(ct, rng).expect("well-formed challenge");
        self.remnant = Some(rem.into_remnant());
        cert
    }

    fn guess(&mut self, sk: Option<&PkeCdSecretKey>, rng: &mut dyn RngCore) -> bool {
        let (m0, m1) = self.challenge.take().expect("choose ran");
        match (sk, self.remnant.take()) {
            (Some(sk), Some(rem)) => match pkecd_dec(sk, rem, rng) {
                Ok(m) => guess_from_plaintext(&m, &m0, &m1, rng),
                Err(_) => rng.gen(),
            },
            _ => rng.gen(),
        }
    }
}

/// Keeps the ciphertext, submits a uniformly random certificate, and
/// decrypts if the key is released anyway.
#[derive(Debug, Default)]
pub struct KeepAndDecrypt {
    challenge: Option<(Vec<bool>, Vec<bool>)>,
    kept: Option<PkeCdCiphertext>,
}

impl PkeCdAdversary for KeepAndDecrypt {
    fn name(&self) -> &'static str {
        "keep-and-decrypt"
    }

    fn choose(&mut self, pk: &PkeCdPublicKey, _: &mut dyn RngCore) -> (Vec<bool>, Vec<bool>) {
        let c = default_challenge(pk.msg_len);
        self.challenge = Some(c.clone());
        c
    }

    fn receive(&mut self, ct: PkeCdCiphertext, rng: &mut dyn RngCore) -> DeletionCert {
        let kappa = ct.ske_ct.register().num_qubits();
        self.kept = Some(ct);
        DeletionCert {
            bits: (0..kappa).map(|_| rng.gen()).collect(),
        }
    }

    fn guess(&mut self, sk: Option<&PkeCdSecretKey>, rng: &mut dyn RngCore) -> bool {
        let (m0, m1) = self.challenge.take().expect("choose ran");
        match (sk, self.kept.take()) {
            (Some(sk), Some(ct)) => match pkecd_dec(sk, ct, rng) {
                Ok(m) => guess_from_plaintext(&m, &m0, &m1, rng),
                Err(_) => rng.gen(),
            },
            _ => rng.gen(),
        }
    }
}

pub fn strategy_by_name(name: &str) -> Option<Box<dyn PkeCdAdversary + Send>> {
    match name {
        "honest-deleter" => Some(Box::new(HonestDeleter::default())),
        "keep-and-decrypt" => Some(Box::new(KeepAndDecrypt::default())),
        _ => None,
    }
}

pub const STRATEGIES: &[&str] = &["honest-deleter", "keep-and-decrypt"];

impl Canonical for PkeCdPublicKey {
    const KIND: u8 = kind::PKECD_PUBLIC_KEY;

    fn encode_into(&self, enc: &mut Encoder) {
        enc.put_u8(self.msg_len as u8);
        self.nce.encode_into(enc);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let msg_len = dec.u8()? as usize;
        let nce = RncePublicKey::decode_from(dec)?;
        if nce.len() != encapsulation_len(msg_len) {
            return Err(CodecError::invalid("slot count does not match message length"));
        }
        Ok(Self { msg_len, nce })
    }
}

impl Canonical for PkeCdSecretKey {
    const KIND: u8 = kind::PKECD_SECRET_KEY;

    fn encode_into(&self, enc: &mut Encoder) {
        enc.put_u8(self.msg_len as u8);
        self.nce.encode_into(enc);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let msg_len = dec.u8()? as usize;
        let nce = RnceSecretKey::decode_from(dec)?;
        if nce.len() != encapsulation_len(msg_len) {
            return Err(CodecError::invalid("slot count does not match message length"));
        }
        Ok(Self { msg_len, nce })
    }
}

impl Canonical for PkeCdCiphertext {
    const KIND: u8 = kind::PKECD_CIPHERTEXT;

    fn encode_into(&self, enc: &mut Encoder) {
        self.nce_ct.encode_into(enc);
        self.ske_ct.encode_into(enc);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(Self {
            nce_ct: RnceCiphertext::decode_from(dec)?,
            ske_ct: OtskeCiphertext::decode_from(dec)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::from_u32;
    use crate::codec::{canonical_decode, canonical_encode};
    use crate::game::advantage;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    fn stub_keys(msg_len: usize, seed: u64) -> PkeCdKeyPair {
        pkecd_keygen(SchemeId::TestStub, 128, msg_len, &mut rng(seed)).unwrap()
    }

    #[test]
    fn keygen_structure() {
        let kp = stub_keys(2, 1);
        assert_eq!(kp.pk.nce.len(), 16 + 2 * 4);
        assert_eq!(kp.aux.secret_keys.len(), kp.pk.nce.len());
        assert_eq!(kp, stub_keys(2, 1));
    }

    #[test]
    fn round_trip_and_layering() {
        let kp = stub_keys(2, 2);
        let mut r = rng(3);
        for trial in 0..100 {
            let m = from_u32(trial % 4, 2);
            let (vk, ct) = pkecd_enc(&kp.pk, &m, &mut r).unwrap();
            // the RNCE plaintext is exactly the verification key
            assert_eq!(rnce::rnce_dec(&kp.sk.nce, &ct.nce_ct).unwrap(), vk.to_bits());
            assert_eq!(pkecd_dec(&kp.sk, ct, &mut r).unwrap(), m);
        }
    }

    #[test]
    fn fresh_one_time_keys() {
        let kp = stub_keys(4, 4);
        let mut r = rng(5);
        let (vk1, _) = pkecd_enc(&kp.pk, &[true; 4], &mut r).unwrap();
        let (vk2, _) = pkecd_enc(&kp.pk, &[true; 4], &mut r).unwrap();
        assert_ne!(vk1, vk2);
    }

    #[test]
    fn honest_deletion_verifies() {
        let kp = stub_keys(3, 6);
        let mut r = rng(7);
        for _ in 0..50 {
            let (vk, ct) = pkecd_enc(&kp.pk, &[true, false, true], &mut r).unwrap();
            let (cert, _) = pkecd_del(ct, &mut r).unwrap();
            assert!(pkecd_vrfy(&vk, &cert).unwrap());
        }
        let (vk, _) = pkecd_enc(&kp.pk, &[true, false, true], &mut r).unwrap();
        assert!(pkecd_vrfy(&vk, &DeletionCert { bits: vec![false; 5] }).is_err());
    }

    #[test]
    fn tampered_encapsulation_is_detected_or_garbles() {
        let kp = stub_keys(2, 8);
        let (_, mut ct) = pkecd_enc(&kp.pk, &[true, true], &mut rng(9)).unwrap();
        // flip the κ header in both components of slot 5
        for comp in ct.nce_ct.slots[5].iter_mut() {
            let last = comp.len() - 1;
            comp[last] ^= 1;
        }
        assert!(matches!(
            pkecd_dec(&kp.sk, ct, &mut rng(0)),
            Err(PkeCdError::BadEncapsulation(_))
        ));
    }

    #[test]
    fn message_length_enforced() {
        let kp = stub_keys(2, 10);
        assert!(matches!(
            pkecd_enc(&kp.pk, &[true], &mut rng(0)),
            Err(PkeCdError::MessageLength { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn experiment_modes_agree_for_honest_deleter() {
        let kp = stub_keys(2, 11);
        for mode in [ExperimentMode::Real, ExperimentMode::FakeReveal] {
            let results: Vec<_> = (0..2000u64)
                .map(|t| {
                    run_pkecd_experiment(&kp, &mut HonestDeleter::default(), t % 2 == 1, mode, &mut rng(t)).unwrap()
                })
                .collect();
            assert!(results.iter().all(|r| r.cert_accepted));
            let (adv, se) = advantage(&results);
            assert!(adv < 3.0 * se.max(1e-3), "{mode:?}: {adv}");
        }
    }

    #[test]
    fn keep_and_decrypt_wins_exactly_when_accepted() {
        let kp = stub_keys(2, 12);
        let trials = 4000u64;
        let mut accepted = 0;
        for t in 0..trials {
            let r = run_pkecd_experiment(
                &kp,
                &mut KeepAndDecrypt::default(),
                t % 2 == 1,
                ExperimentMode::Real,
                &mut rng(t),
            )
            .unwrap();
            if r.cert_accepted {
                accepted += 1;
                assert!(r.won());
            }
        }
        let p = otske::forgery_probability(4, 2);
        let rate = accepted as f64 / trials as f64;
        assert!((rate - p).abs() < 3.0 * (p * (1.0 - p) / trials as f64).sqrt());
    }

    #[test]
    fn transcript_order() {
        let kp = stub_keys(1, 13);
        let r = run_pkecd_experiment(
            &kp,
            &mut HonestDeleter::default(),
            true,
            ExperimentMode::Real,
            &mut rng(0),
        )
        .unwrap();
        assert_eq!(r.transcript[0], GameEvent::KeysIssued);
        assert!(matches!(r.transcript[1], GameEvent::Challenge { .. }));
        assert_eq!(r.transcript[2], GameEvent::CiphertextSent);
        assert_eq!(r.transcript[3], GameEvent::CertificateReceived { accepted: true });
        assert_eq!(r.transcript[4], GameEvent::KeyRevealed);
    }

    #[test]
    fn codec_round_trips() {
        let kp = stub_keys(2, 14);
        assert_eq!(
            canonical_decode::<PkeCdPublicKey>(&canonical_encode(&kp.pk)).unwrap(),
            kp.pk
        );
        assert_eq!(
            canonical_decode::<PkeCdSecretKey>(&canonical_encode(&kp.sk)).unwrap(),
            kp.sk
        );
        let (_, ct) = pkecd_enc(&kp.pk, &[false, true], &mut rng(15)).unwrap();
        assert_eq!(canonical_decode::<PkeCdCiphertext>(&canonical_encode(&ct)).unwrap(), ct);
    }
}
