//! Types shared by the certified-deletion security games.

use serde::Serialize;

/// How the challenger builds the encapsulation layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentMode {
    /// The game as defined.
    Real,
    /// The encapsulation ciphertext is an RNCE fake and the key handed out
    /// after an accepted certificate is the matching reveal.
    FakeReveal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "kebab-case")]
pub enum GameEvent {
    KeysIssued,
    EncryptionQuery { phase: QueryPhase },
    Challenge { m0: String, m1: String },
    CiphertextSent,
    CertificateReceived { accepted: bool },
    KeyRevealed,
    Bottom,
    Guess { bit: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueryPhase {
    BeforeChallenge,
    AfterChallenge,
    AfterVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CdExperimentResult {
    /// The challenger's hidden bit.
    pub b: bool,
    pub bit_guess: bool,
    pub cert_accepted: bool,
    pub transcript: Vec<GameEvent>,
}

impl CdExperimentResult {
    pub fn won(&self) -> bool {
        self.b == self.bit_guess
    }
}

/// The post-measurement leftovers of a deleted ciphertext.
///
/// Deletion consumes the ciphertext; experiments that study what an
/// adversary can still learn get the collapsed state through this wrapper.
#[derive(Debug, Clone, PartialEq)]
pub struct Remnant<T>(pub(crate) T);

impl<T> Remnant<T> {
    pub fn into_remnant(self) -> T {
        self.0
    }
}

/// `|Pr[b' = 1 | b = 1] − Pr[b' = 1 | b = 0]|` and its standard error.
pub fn advantage(results: &[CdExperimentResult]) -> (f64, f64) {
    let rate = |b: bool| {
        let (ones, total) = results
            .iter()
            .filter(|r| r.b == b)
            .fold((0u64, 0u64), |(o, t), r| (o + r.bit_guess as u64, t + 1));
        (ones as f64 / total.max(1) as f64, total.max(1) as f64)
    };
    let (p1, n1) = rate(true);
    let (p0, n0) = rate(false);
    let se = (p1 * (1.0 - p1) / n1 + p0 * (1.0 - p0) / n0).sqrt();
    ((p1 - p0).abs(), se)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(b: bool, guess: bool) -> CdExperimentResult {
        CdExperimentResult {
            b,
            bit_guess: guess,
            cert_accepted: true,
            transcript: Vec::new(),
        }
    }

    #[test]
    fn advantage_extremes() {
        let perfect: Vec<_> = (0..10).map(|i| result(i % 2 == 0, i % 2 == 0)).collect();
        assert_eq!(advantage(&perfect).0, 1.0);
        let constant: Vec<_> = (0..10).map(|i| result(i % 2 == 0, true)).collect();
        assert_eq!(advantage(&constant).0, 0.0);
    }
}
