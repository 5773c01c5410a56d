//! Exact small-register state-vector simulation.
//!
//! Qubit 0 is the most significant bit of a basis-state label. Registers are
//! plain values: operations take a register and hand back a new one.

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::bits;
use crate::codec::{kind, Canonical, CodecError, Decoder, Encoder};
use crate::ntcf::ClawFreeKey;

pub const MAX_QUBITS: usize = 16;

/// Tolerance used by the defensive normalization check.
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum QsimError {
    #[error("register needs {0} qubits, the simulator supports at most {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("register must have at least one qubit")]
    Empty,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("no positions given")]
    NoPositions,
    #[error("position list must be strictly increasing and below {num_qubits}")]
    BadPositions { num_qubits: usize },
    #[error("register is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("amplitude table length {0} is not a power of two")]
    BadAmplitudeCount(usize),
    #[error("label map is not injective: {first} and {second} both map to {image}")]
    NonInjective { first: u32, second: u32, image: u32 },
    #[error("label map entry {value} does not fit in {width} bits")]
    LabelOutOfRange { value: u32, width: usize },
    #[error("register has {found} qubits, expected {expected}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("function key yields {0} preimages for the sampled image")]
    MalformedKey(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitRegister {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl QubitRegister {
    /// The computational basis state `|index⟩`.
    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self, QsimError> {
        check_width(num_qubits)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amplitudes })
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self, QsimError> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QsimError::BadAmplitudeCount(len));
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_width(num_qubits)?;
        let reg = Self { num_qubits, amplitudes };
        reg.check_normalized()?;
        Ok(reg)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn check_normalized(&self) -> Result<(), QsimError> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(QsimError::NotNormalized(n));
        }
        Ok(())
    }

    /// Amplitudes as `(re, im)` pairs in canonical label order.
    pub fn to_pairs(&self) -> Vec<(f64, f64)> {
        self.amplitudes.iter().map(|a| (a.re, a.im)).collect()
    }

    fn stride(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    pub fn apply_hadamard(&mut self, qubit: usize) {
        let stride = self.stride(qubit);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.amplitudes.len() {
            if i & stride == 0 {
                let a = self.amplitudes[i];
                let b = self.amplitudes[i | stride];
                self.amplitudes[i] = (a + b) * s;
                self.amplitudes[i | stride] = (a - b) * s;
            }
        }
    }

    pub fn apply_x(&mut self, qubit: usize) {
        let stride = self.stride(qubit);
        for i in 0..self.amplitudes.len() {
            if i & stride == 0 {
                self.amplitudes.swap(i, i | stride);
            }
        }
    }

    /// Outcome label of basis index `index` restricted to `positions`.
    fn outcome_of(&self, index: usize, positions: &[usize]) -> usize {
        positions
            .iter()
            .fold(0, |acc, &q| (acc << 1) | ((index >> (self.num_qubits - 1 - q)) & 1))
    }

    fn check_positions(&self, positions: &[usize]) -> Result<(), QsimError> {
        if positions.is_empty() {
            return Err(QsimError::NoPositions);
        }
        let increasing = positions.windows(2).all(|w| w[0] < w[1]);
        if !increasing || positions[positions.len() - 1] >= self.num_qubits {
            return Err(QsimError::BadPositions {
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }
}

fn check_width(num_qubits: usize) -> Result<(), QsimError> {
    match num_qubits {
        0 => Err(QsimError::Empty),
        n if n > MAX_QUBITS => Err(QsimError::TooManyQubits(n)),
        _ => Ok(()),
    }
}

impl Canonical for QubitRegister {
    const KIND: u8 = kind::QUBIT_REGISTER;

    fn encode_into(&self, enc: &mut Encoder) {
        enc.put_u8(self.num_qubits as u8);
        for a in &self.amplitudes {
            enc.put_f64(a.re);
            enc.put_f64(a.im);
        }
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let n = dec.u8()? as usize;
        if n == 0 || n > MAX_QUBITS {
            return Err(CodecError::invalid(format!("register width {n}")));
        }
        let amplitudes = (0..1usize << n)
            .map(|_| Ok(Complex64::new(dec.f64()?, dec.f64()?)))
            .collect::<Result<Vec<_>, CodecError>>()?;
        Self::from_amplitudes(amplitudes).map_err(|e| CodecError::invalid(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Computational,
    Hadamard,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementRecord {
    pub positions: Vec<usize>,
    pub basis: Basis,
    pub outcome: Vec<bool>,
}

/// Exact outcome probabilities, indexed by the MSB-first outcome label.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeDistribution {
    width: usize,
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(width: usize, probs: Vec<f64>) -> Self {
        assert_eq!(probs.len(), 1 << width);
        Self { width, probs }
    }

    pub fn uniform(width: usize) -> Self {
        let p = 1.0 / (1u64 << width) as f64;
        Self::new(width, vec![p; 1 << width])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, outcome: &[bool]) -> f64 {
        bits::to_u32(outcome)
            .ok()
            .and_then(|i| self.probs.get(i as usize).copied())
            .unwrap_or(0.0)
    }

    pub fn prob_of_label(&self, label: u32) -> f64 {
        self.probs.get(label as usize).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Outcomes with probability above `eps`.
    pub fn support(&self, eps: f64) -> Vec<u32> {
        (0..self.probs.len() as u32)
            .filter(|&i| self.probs[i as usize] > eps)
            .collect()
    }

    pub fn total_variation(&self, other: &Self) -> f64 {
        assert_eq!(self.width, other.width);
        0.5 * self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    /// Distribution of `label ^ mask` (used to model a classical pad).
    pub fn xor_shift(&self, mask: u32) -> Self {
        let mut probs = vec![0.0; self.probs.len()];
        for (i, p) in self.probs.iter().enumerate() {
            probs[i ^ mask as usize] += p;
        }
        Self::new(self.width, probs)
    }
}

/// Prepares `⊗_i H^{θ_i}|r_i⟩`.
pub fn prepare_bb84(payload: &[bool], bases: &[bool]) -> Result<QubitRegister, QsimError> {
    if payload.len() != bases.len() {
        return Err(QsimError::LengthMismatch {
            left: payload.len(),
            right: bases.len(),
        });
    }
    check_width(payload.len())?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    for (&r, &theta) in payload.iter().zip(bases) {
        let single = match (theta, r) {
            (false, false) => [1.0, 0.0],
            (false, true) => [0.0, 1.0],
            (true, false) => [s, s],
            (true, true) => [s, -s],
        };
        amps = amps.iter().flat_map(|a| single.iter().map(move |c| a * c)).collect();
    }
    Ok(QubitRegister {
        num_qubits: payload.len(),
        amplitudes: amps,
    })
}

pub fn born_distribution(
    reg: &QubitRegister,
    positions: &[usize],
    basis: Basis,
) -> Result<OutcomeDistribution, QsimError> {
    reg.check_positions(positions)?;
    let rotated;
    let target = match basis {
        Basis::Computational => reg,
        Basis::Hadamard => {
            let mut r = reg.clone();
            for &q in positions {
                r.apply_hadamard(q);
            }
            rotated = r;
            &rotated
        }
    };
    let mut probs = vec![0.0; 1 << positions.len()];
    for (i, a) in target.amplitudes.iter().enumerate() {
        probs[target.outcome_of(i, positions)] += a.norm_sqr();
    }
    Ok(OutcomeDistribution::new(positions.len(), probs))
}

/// Projects onto a fixed `outcome` of measuring `positions` in `basis`.
///
/// Returns the outcome probability and, when it is nonzero, the renormalized
/// post-measurement register (measured qubits left in the observed eigenstate).
pub fn project(
    reg: &QubitRegister,
    positions: &[usize],
    basis: Basis,
    outcome: u32,
) -> Result<(f64, Option<QubitRegister>), QsimError> {
    reg.check_positions(positions)?;
    let mut state = reg.clone();
    if basis == Basis::Hadamard {
        for &q in positions {
            state.apply_hadamard(q);
        }
    }
    let mut p = 0.0;
    for i in 0..state.amplitudes.len() {
        if state.outcome_of(i, positions) == outcome as usize {
            p += state.amplitudes[i].norm_sqr();
        } else {
            state.amplitudes[i] = Complex64::new(0.0, 0.0);
        }
    }
    if p <= 0.0 {
        return Ok((0.0, None));
    }
    let scale = 1.0 / p.sqrt();
    for a in state.amplitudes.iter_mut() {
        *a *= scale;
    }
    if basis == Basis::Hadamard {
        for &q in positions {
            state.apply_hadamard(q);
        }
    }
    Ok((p, Some(state)))
}

/// Projective measurement of `positions` in `basis`.
///
/// The returned register keeps the measured qubits, collapsed onto the
/// observed eigenstate of the chosen basis.
pub fn measure<R: Rng + ?Sized>(
    reg: QubitRegister,
    positions: &[usize],
    basis: Basis,
    rng: &mut R,
) -> Result<(MeasurementRecord, QubitRegister), QsimError> {
    reg.check_positions(positions)?;
    reg.check_normalized()?;
    let dist = born_distribution(&reg, positions, basis)?;
    let outcome = sample_index(dist.probs(), rng);
    let (_, state) = project(&reg, positions, basis, outcome as u32)?;
    let record = MeasurementRecord {
        positions: positions.to_vec(),
        basis,
        outcome: bits::from_u32(outcome as u32, positions.len()),
    };
    Ok((record, state.expect("sampled outcome has positive probability")))
}

fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    let mut last_nonzero = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_nonzero = i;
            if u < p {
                return i;
            }
            u -= p;
        }
    }
    last_nonzero
}

/// An injective relabeling `J` of `w`-bit strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    forward: Vec<u32>,
    inverse: Vec<Option<u32>>,
}

impl LabelMap {
    pub fn identity(width: usize) -> Self {
        let forward: Vec<u32> = (0..1u32 << width).collect();
        Self::new(width, forward).expect("identity is injective")
    }

    /// Builds the map from its table, rejecting collisions.
    pub fn new(width: usize, forward: Vec<u32>) -> Result<Self, QsimError> {
        if forward.len() != 1 << width {
            return Err(QsimError::LengthMismatch {
                left: forward.len(),
                right: 1 << width,
            });
        }
        let mut inverse = vec![None; 1 << width];
        for (x, &y) in forward.iter().enumerate() {
            let slot = inverse
                .get_mut(y as usize)
                .ok_or(QsimError::LabelOutOfRange { value: y, width })?;
            if let Some(first) = *slot {
                return Err(QsimError::NonInjective {
                    first,
                    second: x as u32,
                    image: y,
                });
            }
            *slot = Some(x as u32);
        }
        Ok(Self {
            width,
            forward,
            inverse,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn table(&self) -> &[u32] {
        &self.forward
    }

    pub fn apply(&self, x: u32) -> u32 {
        self.forward[x as usize]
    }

    pub fn invert(&self, y: u32) -> Option<u32> {
        self.inverse.get(y as usize).copied().flatten()
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(i, &y)| i as u32 == y)
    }
}

/// Maps `|b, x⟩` to `|b, J(x)⟩` on a `1 + w` qubit register.
pub fn apply_label_isometry(reg: QubitRegister, j: &LabelMap) -> Result<QubitRegister, QsimError> {
    let w = j.width();
    if reg.num_qubits != w + 1 {
        return Err(QsimError::WidthMismatch {
            expected: w + 1,
            found: reg.num_qubits,
        });
    }
    let mask = (1usize << w) - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); reg.amplitudes.len()];
    for (i, a) in reg.amplitudes.iter().enumerate() {
        let b = i >> w;
        let x = (i & mask) as u32;
        out[(b << w) | j.apply(x) as usize] = *a;
    }
    Ok(QubitRegister {
        num_qubits: reg.num_qubits,
        amplitudes: out,
    })
}

/// Closed-form description of a register after the image was measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClawInstanceState {
    /// `(|0,x0⟩ + |1,x1⟩)/√2` with `f(0,x0) = f(1,x1) = y`.
    FType { w: usize, y: u32, x0: u32, x1: u32 },
    /// `|b,x⟩` with `g(b,x) = y`.
    GType { w: usize, y: u32, b: bool, x: u32 },
}

impl ClawInstanceState {
    pub fn w(&self) -> usize {
        match *self {
            Self::FType { w, .. } | Self::GType { w, .. } => w,
        }
    }

    pub fn y(&self) -> u32 {
        match *self {
            Self::FType { y, .. } | Self::GType { y, .. } => y,
        }
    }

    /// Materializes the exact `1 + w` qubit register.
    pub fn register(&self) -> QubitRegister {
        let w = self.w();
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (w + 1)];
        match *self {
            Self::FType { x0, x1, .. } => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                amps[x0 as usize] = Complex64::new(s, 0.0);
                amps[(1 << w) | x1 as usize] = Complex64::new(s, 0.0);
            }
            Self::GType { b, x, .. } => {
                amps[((b as usize) << w) | x as usize] = Complex64::new(1.0, 0.0);
            }
        }
        QubitRegister {
            num_qubits: w + 1,
            amplitudes: amps,
        }
    }
}

/// Runs the range-superposition sampler against `key` and measures the image.
///
/// Only forward evaluation is used, so the same code serves both function
/// modes: the collapsed state is the uniform superposition over every
/// preimage of the observed `y`.
pub fn prepare_range_superposition<R: Rng + ?Sized>(
    key: &ClawFreeKey,
    rng: &mut R,
) -> Result<(u32, ClawInstanceState, QubitRegister), QsimError> {
    let w = key.w();
    check_width(w + 1)?;
    // Measuring y on the uniform superposition is equivalent to sampling a
    // uniform input and evaluating it.
    let label = rng.gen_range(0..1u32 << (w + 1));
    let y = key.eval_label(label);
    let preimages: Vec<u32> = (0..1u32 << (w + 1)).filter(|&l| key.eval_label(l) == y).collect();
    let mask = (1u32 << w) - 1;
    let state = match preimages.as_slice() {
        [only] => ClawInstanceState::GType {
            w,
            y,
            b: only >> w == 1,
            x: only & mask,
        },
        [first, second] if first >> w == 0 && second >> w == 1 => ClawInstanceState::FType {
            w,
            y,
            x0: first & mask,
            x1: second & mask,
        },
        other => return Err(QsimError::MalformedKey(other.len())),
    };
    let register = state.register();
    Ok((y, state, register))
}

/// Exact distribution of the Hadamard-basis outcome `(e, d)` after applying
/// `J`, computed from the closed-form state.
pub fn analytic_hadamard_distribution(inst: &ClawInstanceState, j: &LabelMap) -> OutcomeDistribution {
    let w = inst.w();
    match *inst {
        ClawInstanceState::GType { .. } => OutcomeDistribution::uniform(w + 1),
        ClawInstanceState::FType { x0, x1, .. } => {
            let delta = j.apply(x0) ^ j.apply(x1);
            let p = 1.0 / (1u64 << w) as f64;
            let probs = (0..1u32 << (w + 1))
                .map(|label| {
                    let e = label >> w == 1;
                    let d = label & ((1 << w) - 1);
                    if e == bits::dot(d, delta) {
                        p
                    } else {
                        0.0
                    }
                })
                .collect();
            OutcomeDistribution::new(w + 1, probs)
        }
    }
}

/// Samples `(e, d)` without touching the state vector.
pub fn analytic_hadamard_sample<R: Rng + ?Sized>(inst: &ClawInstanceState, j: &LabelMap, rng: &mut R) -> (bool, u32) {
    let w = inst.w();
    let d = rng.gen_range(0..1u32 << w);
    match *inst {
        ClawInstanceState::FType { x0, x1, .. } => (bits::dot(d, j.apply(x0) ^ j.apply(x1)), d),
        ClawInstanceState::GType { .. } => (rng.gen(), d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntcf;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    fn amps_close(reg: &QubitRegister, expected: &[f64]) -> bool {
        reg.amplitudes().len() == expected.len()
            && reg
                .amplitudes()
                .iter()
                .zip(expected)
                .all(|(a, e)| (a.re - e).abs() < 1e-12 && a.im.abs() < 1e-12)
    }

    /// Kronecker product of explicit 2x2-derived single-qubit vectors.
    fn kron_oracle(vectors: &[[f64; 2]]) -> Vec<f64> {
        vectors.iter().fold(vec![1.0], |acc, v| {
            let mut out = Vec::with_capacity(acc.len() * 2);
            for a in &acc {
                out.push(a * v[0]);
                out.push(a * v[1]);
            }
            out
        })
    }

    fn single_qubit_oracle(r: bool, theta: bool) -> [f64; 2] {
        // H = [[1,1],[1,-1]]/√2 applied to |r⟩ when θ = 1.
        let ket = if r { [0.0, 1.0] } else { [1.0, 0.0] };
        if theta {
            [S * (ket[0] + ket[1]), S * (ket[0] - ket[1])]
        } else {
            ket
        }
    }

    #[test]
    fn bb84_examples() {
        assert!(amps_close(&prepare_bb84(&[false], &[false]).unwrap(), &[1.0, 0.0]));
        assert!(amps_close(&prepare_bb84(&[true], &[true]).unwrap(), &[S, -S]));
        // r = 10, θ = 01 → |1⟩ ⊗ |+⟩
        let expected = kron_oracle(&[single_qubit_oracle(true, false), single_qubit_oracle(false, true)]);
        assert!(amps_close(
            &prepare_bb84(&[true, false], &[false, true]).unwrap(),
            &expected
        ));
        assert!(amps_close(
            &prepare_bb84(&[true, false], &[false, true]).unwrap(),
            &[0.0, 0.0, S, S]
        ));
    }

    #[test]
    fn bb84_errors() {
        assert_eq!(
            prepare_bb84(&[true], &[true, false]),
            Err(QsimError::LengthMismatch { left: 1, right: 2 })
        );
        assert_eq!(prepare_bb84(&[], &[]), Err(QsimError::Empty));
        assert_eq!(
            prepare_bb84(&[false; 17], &[false; 17]),
            Err(QsimError::TooManyQubits(17))
        );
    }

    proptest! {
        #[test]
        fn bb84_matches_tensor_oracle(pairs in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..7)) {
            let r: Vec<bool> = pairs.iter().map(|p| p.0).collect();
            let theta: Vec<bool> = pairs.iter().map(|p| p.1).collect();
            let oracle: Vec<[f64; 2]> = pairs.iter().map(|&(r, t)| single_qubit_oracle(r, t)).collect();
            let reg = prepare_bb84(&r, &theta).unwrap();
            prop_assert!(amps_close(&reg, &kron_oracle(&oracle)));
            // amplitudes are ±2^{-h/2} on their support
            let h = bits::weight(&theta) as i32;
            let mag = 2f64.powf(-h as f64 / 2.0);
            for a in reg.amplitudes() {
                prop_assert!(a.norm() < 1e-12 || (a.norm() - mag).abs() < 1e-12);
            }
        }

        #[test]
        fn same_basis_round_trip_is_certain(pairs in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..9)) {
            let r: Vec<bool> = pairs.iter().map(|p| p.0).collect();
            let theta: Vec<bool> = pairs.iter().map(|p| p.1).collect();
            let reg = prepare_bb84(&r, &theta).unwrap();
            for q in 0..r.len() {
                let basis = if theta[q] { Basis::Hadamard } else { Basis::Computational };
                let dist = born_distribution(&reg, &[q], basis).unwrap();
                prop_assert!((dist.prob(&[r[q]]) - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn measurement_preserves_normalization(
            pairs in proptest::collection::vec((any::<bool>(), any::<bool>()), 2..8),
            seed in any::<u64>(),
            hadamard in any::<bool>(),
        ) {
            let r: Vec<bool> = pairs.iter().map(|p| p.0).collect();
            let theta: Vec<bool> = pairs.iter().map(|p| p.1).collect();
            let reg = prepare_bb84(&r, &theta).unwrap();
            let basis = if hadamard { Basis::Hadamard } else { Basis::Computational };
            let (_, post) = measure(reg, &[0, 1], basis, &mut rng(seed)).unwrap();
            prop_assert!((post.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn measure_examples() {
        let plus = prepare_bb84(&[false], &[true]).unwrap();
        for seed in 0..20 {
            let (rec, _) = measure(plus.clone(), &[0], Basis::Hadamard, &mut rng(seed)).unwrap();
            assert_eq!(rec.outcome, vec![false]);
        }
        let zero = prepare_bb84(&[false], &[false]).unwrap();
        let dist = born_distribution(&zero, &[0], Basis::Hadamard).unwrap();
        assert!((dist.probs()[0] - 0.5).abs() < 1e-12 && (dist.probs()[1] - 0.5).abs() < 1e-12);
        let ones = (0..2000)
            .filter(|&s| {
                measure(zero.clone(), &[0], Basis::Hadamard, &mut rng(s))
                    .unwrap()
                    .0
                    .outcome[0]
            })
            .count();
        assert!((ones as f64 - 1000.0).abs() < 4.0 * 22.4, "ones = {ones}");
    }

    #[test]
    fn bell_state_distribution() {
        let bell = QubitRegister::from_amplitudes(vec![
            Complex64::new(S, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(S, 0.0),
        ])
        .unwrap();
        // amplitude-squared enumeration
        let oracle: Vec<f64> = bell.amplitudes().iter().map(|a| a.norm_sqr()).collect();
        let dist = born_distribution(&bell, &[0, 1], Basis::Computational).unwrap();
        for (p, o) in dist.probs().iter().zip(&oracle) {
            assert!((p - o).abs() < 1e-12);
        }
        assert!((dist.prob(&[false, false]) - 0.5).abs() < 1e-12);
        assert!((dist.prob(&[true, true]) - 0.5).abs() < 1e-12);
        // measuring one half collapses the other
        let (rec, post) = measure(bell, &[0], Basis::Computational, &mut rng(3)).unwrap();
        let after = born_distribution(&post, &[1], Basis::Computational).unwrap();
        assert!((after.prob(&rec.outcome) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hadamard_measurement_leaves_eigenstate() {
        let zero = QubitRegister::basis_state(2, 0).unwrap();
        let (rec, post) = measure(zero, &[1], Basis::Hadamard, &mut rng(9)).unwrap();
        let again = born_distribution(&post, &[1], Basis::Hadamard).unwrap();
        assert!((again.prob(&rec.outcome) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_two_qubits() {
        let reg = prepare_bb84(&[false, false], &[true, true]).unwrap();
        let dist = born_distribution(&reg, &[0, 1], Basis::Computational).unwrap();
        assert!(dist.probs().iter().all(|p| (p - 0.25).abs() < 1e-12));
    }

    #[test]
    fn measure_errors() {
        let reg = QubitRegister::basis_state(2, 0).unwrap();
        assert_eq!(
            measure(reg.clone(), &[], Basis::Computational, &mut rng(0)).unwrap_err(),
            QsimError::NoPositions
        );
        assert_eq!(
            born_distribution(&reg, &[1, 0], Basis::Computational).unwrap_err(),
            QsimError::BadPositions { num_qubits: 2 }
        );
        let bad = QubitRegister {
            num_qubits: 1,
            amplitudes: vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
        };
        assert!(matches!(
            measure(bad, &[0], Basis::Computational, &mut rng(0)),
            Err(QsimError::NotNormalized(_))
        ));
    }

    #[test]
    fn deletion_randomizes_computational_information() {
        // Hadamard-measure every qubit, then the computational re-measurement
        // is uniform regardless of the payload.
        for kappa in 1..=4usize {
            for theta_l in 0..1u32 << kappa {
                for r_l in 0..1u32 << kappa {
                    let reg = prepare_bb84(&bits::from_u32(r_l, kappa), &bits::from_u32(theta_l, kappa)).unwrap();
                    let all: Vec<usize> = (0..kappa).collect();
                    let (_, post) = measure(reg, &all, Basis::Hadamard, &mut rng(r_l as u64)).unwrap();
                    let dist = born_distribution(&post, &all, Basis::Computational).unwrap();
                    assert!(dist.total_variation(&OutcomeDistribution::uniform(kappa)) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn label_map_rules() {
        assert!(LabelMap::identity(3).is_identity());
        assert_eq!(
            LabelMap::new(2, vec![0, 1, 1, 3]).unwrap_err(),
            QsimError::NonInjective {
                first: 1,
                second: 2,
                image: 1
            }
        );
        assert!(LabelMap::new(2, vec![0, 1, 2, 4]).is_err());
        let rev = LabelMap::new(2, vec![0b00, 0b10, 0b01, 0b11]).unwrap();
        assert_eq!(rev.invert(0b10), Some(0b01));
    }

    #[test]
    fn isometry_examples() {
        let reg = QubitRegister::basis_state(3, 0b001).unwrap();
        assert_eq!(apply_label_isometry(reg.clone(), &LabelMap::identity(2)).unwrap(), reg);
        let rev = LabelMap::new(2, vec![0b00, 0b10, 0b01, 0b11]).unwrap();
        let out = apply_label_isometry(reg, &rev).unwrap();
        assert_eq!(out, QubitRegister::basis_state(3, 0b010).unwrap());
        let wrong = QubitRegister::basis_state(2, 0).unwrap();
        assert!(apply_label_isometry(wrong, &rev).is_err());
    }

    #[test]
    fn isometry_on_claw_superposition() {
        let j = LabelMap::new(3, vec![5, 2, 7, 0, 1, 6, 3, 4]).unwrap();
        let inst = ClawInstanceState::FType {
            w: 3,
            y: 0,
            x0: 0b011,
            x1: 0b110,
        };
        let out = apply_label_isometry(inst.register(), &j).unwrap();
        let expected = ClawInstanceState::FType {
            w: 3,
            y: 0,
            x0: j.apply(0b011),
            x1: j.apply(0b110),
        }
        .register();
        assert!(amps_close(
            &out,
            &expected.to_pairs().iter().map(|p| p.0).collect::<Vec<_>>()
        ));
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn range_superposition_identity_examples() {
        let key = ntcf::ClawFreeKey::from_claw_tables(2, vec![0, 1, 2, 3], vec![0, 1, 2, 3], LabelMap::identity(2))
            .unwrap()
            .0;
        // y = 01 is reached from (0,01) and (1,01)
        for seed in 0..64 {
            let (y, inst, reg) = prepare_range_superposition(&key, &mut rng(seed)).unwrap();
            assert_eq!(inst, ClawInstanceState::FType { w: 2, y, x0: y, x1: y });
            if y == 0b01 {
                let mut expected = vec![0.0; 8];
                expected[0b001] = S;
                expected[0b101] = S;
                assert!(amps_close(&reg, &expected));
            }
        }
        let gkey = ntcf::ClawFreeKey::from_injective_table(2, (0..8).collect(), LabelMap::identity(2))
            .unwrap()
            .0;
        for seed in 0..64 {
            let (y, inst, reg) = prepare_range_superposition(&gkey, &mut rng(seed)).unwrap();
            assert_eq!(
                inst,
                ClawInstanceState::GType {
                    w: 2,
                    y,
                    b: y >> 2 == 1,
                    x: y & 0b11
                }
            );
            assert_eq!(reg, QubitRegister::basis_state(3, y as usize).unwrap());
        }
    }

    /// Full `|b,x⟩|f(b,x)⟩` state vector with projective collapse on `y`.
    fn tensor_collapse_oracle(key: &ntcf::ClawFreeKey, y: u32) -> Vec<Complex64> {
        let w = key.w();
        let yw = key.image_width();
        let total = w + 1 + yw;
        let mut full = vec![Complex64::new(0.0, 0.0); 1 << total];
        let amp = 1.0 / ((1u64 << (w + 1)) as f64).sqrt();
        for label in 0..1u32 << (w + 1) {
            let image = key.eval(label >> w == 1, label & ((1 << w) - 1)).unwrap();
            full[((label as usize) << yw) | image as usize] = Complex64::new(amp, 0.0);
        }
        let mut collapsed: Vec<Complex64> = (0..1usize << (w + 1)).map(|l| full[(l << yw) | y as usize]).collect();
        let norm: f64 = collapsed.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut collapsed {
            *a /= norm;
        }
        collapsed
    }

    #[test]
    fn range_superposition_matches_tensor_oracle() {
        for seed in 0..10 {
            let (key, td) = ntcf::gen_f(3, &mut rng(100 + seed)).unwrap();
            let (y, inst, reg) = prepare_range_superposition(&key, &mut rng(seed)).unwrap();
            let oracle = tensor_collapse_oracle(&key, y);
            for (a, o) in reg.amplitudes().iter().zip(&oracle) {
                assert!((a - o).norm() < 1e-12);
            }
            let x0 = ntcf::invert_f(&td, false, y).unwrap();
            let x1 = ntcf::invert_f(&td, true, y).unwrap();
            assert_eq!(inst, ClawInstanceState::FType { w: 3, y, x0, x1 });

            let (gkey, gtd) = ntcf::gen_g(3, &mut rng(200 + seed)).unwrap();
            let (gy, ginst, greg) = prepare_range_superposition(&gkey, &mut rng(seed)).unwrap();
            let goracle = tensor_collapse_oracle(&gkey, gy);
            for (a, o) in greg.amplitudes().iter().zip(&goracle) {
                assert!((a - o).norm() < 1e-12);
            }
            let (b, x) = ntcf::invert_g(&gtd, gy).unwrap();
            assert_eq!(ginst, ClawInstanceState::GType { w: 3, y: gy, b, x });
        }
    }

    #[test]
    fn hadamard_sampler_examples() {
        let j = LabelMap::identity(2);
        // Δ = 0 → e = 0 always
        let inst = ClawInstanceState::FType {
            w: 2,
            y: 0,
            x0: 0b10,
            x1: 0b10,
        };
        for seed in 0..50 {
            assert!(!analytic_hadamard_sample(&inst, &j, &mut rng(seed)).0);
        }
        // Δ = 01 → support {(0,00),(0,10),(1,01),(1,11)}
        let inst = ClawInstanceState::FType {
            w: 2,
            y: 0,
            x0: 0b00,
            x1: 0b01,
        };
        let dist = born_distribution(&inst.register(), &[0, 1, 2], Basis::Hadamard).unwrap();
        assert_eq!(dist.support(1e-12), vec![0b000, 0b010, 0b101, 0b111]);
        for label in dist.support(1e-12) {
            assert!((dist.prob_of_label(label) - 0.25).abs() < 1e-12);
        }
        assert!(dist.total_variation(&analytic_hadamard_distribution(&inst, &j)) < 1e-12);
        // GType → uniform
        let ginst = ClawInstanceState::GType {
            w: 2,
            y: 5,
            b: true,
            x: 0b01,
        };
        let gdist = born_distribution(&ginst.register(), &[0, 1, 2], Basis::Hadamard).unwrap();
        assert!(gdist.total_variation(&OutcomeDistribution::uniform(3)) < 1e-12);
    }

    #[test]
    fn sampler_frequencies_follow_closed_form() {
        let j = LabelMap::new(3, vec![3, 6, 0, 1, 7, 2, 5, 4]).unwrap();
        let inst = ClawInstanceState::FType {
            w: 3,
            y: 0,
            x0: 0b001,
            x1: 0b100,
        };
        let dist = analytic_hadamard_distribution(&inst, &j);
        let mut counts = [0usize; 16];
        let mut r = rng(77);
        let trials = 16_000;
        for _ in 0..trials {
            let (e, d) = analytic_hadamard_sample(&inst, &j, &mut r);
            counts[((e as usize) << 3) | d as usize] += 1;
        }
        for (label, &c) in counts.iter().enumerate() {
            let p = dist.prob_of_label(label as u32);
            let sigma = (trials as f64 * p * (1.0 - p)).sqrt();
            assert!((c as f64 - trials as f64 * p).abs() <= 4.0 * sigma + 1e-9);
        }
    }

    #[test]
    fn register_codec_round_trip() {
        let reg = prepare_bb84(&[true, false, true], &[true, true, false]).unwrap();
        let bytes = crate::codec::canonical_encode(&reg);
        assert_eq!(crate::codec::canonical_decode::<QubitRegister>(&bytes).unwrap(), reg);
    }
}
