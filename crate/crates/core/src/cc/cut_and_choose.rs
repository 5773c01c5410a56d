//! The cut-and-choose adaptive hardcore experiment.
//!
//! The adversary commits to `(y_i, e_i, d_i)` for all `4n` instances before
//! learning which half `S` is injective; it wins if the certificate holds on
//! the complement and it can then open preimages on `S`.

use rand::seq::index;
use rand::{Rng, RngCore};
use serde::Serialize;

use super::CcError;
use crate::bits;
use crate::ntcf::{self, ClawFreeKey, FunctionMode};
use crate::qsim::{self, ClawInstanceState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CommitEntry {
    pub y: u32,
    pub e: bool,
    pub d: u32,
}

pub trait CutAndChooseAdversary {
    fn name(&self) -> &'static str;

    /// One commitment per key.
    fn commit(&mut self, keys: &[ClawFreeKey], rng: &mut dyn RngCore) -> Vec<CommitEntry>;

    /// `(b_i, x_i)` for each element of `s`, in order.
    fn open(&mut self, s: &[usize], rng: &mut dyn RngCore) -> Vec<(bool, u32)>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CutAndChooseTrace {
    pub subset: Vec<usize>,
    pub certificate_passed: bool,
    /// `None` when the challenger aborted before revealing `S`.
    pub preimages_passed: Option<bool>,
    pub won: bool,
}

pub fn run_cut_and_choose_experiment<R: Rng + ?Sized>(
    n: usize,
    w: usize,
    adversary: &mut dyn CutAndChooseAdversary,
    rng: &mut R,
) -> Result<CutAndChooseTrace, CcError> {
    if n == 0 || 4 * n > super::MAX_INSTANCES {
        return Err(CcError::Params(format!("n = {n}")));
    }
    let mut rng = &mut *rng;
    let total = 4 * n;
    let mut s = index::sample(rng, total, 2 * n).into_vec();
    s.sort_unstable();
    let mut keys = Vec::with_capacity(total);
    let mut trapdoors = Vec::with_capacity(total);
    for i in 0..total {
        let (k, td) = if s.binary_search(&i).is_ok() {
            ntcf::gen_g(w, rng)?
        } else {
            ntcf::gen_f(w, rng)?
        };
        keys.push(k);
        trapdoors.push(td);
    }

    let commits = adversary.commit(&keys, &mut rng);
    if commits.len() != total {
        return Err(CcError::Protocol(format!(
            "{} commitments for {total} keys",
            commits.len()
        )));
    }
    let certificate_passed = (0..total).filter(|i| s.binary_search(i).is_err()).all(|i| {
        let c = commits[i];
        match (
            ntcf::invert_f(&trapdoors[i], false, c.y),
            ntcf::invert_f(&trapdoors[i], true, c.y),
        ) {
            (Ok(x0), Ok(x1)) => ntcf::certificate_predicate(keys[i].label_map(), x0, x1, c.e, c.d),
            _ => false,
        }
    });
    if !certificate_passed {
        return Ok(CutAndChooseTrace {
            subset: s,
            certificate_passed,
            preimages_passed: None,
            won: false,
        });
    }

    let openings = adversary.open(&s, &mut rng);
    if openings.len() != s.len() {
        return Err(CcError::Protocol(format!(
            "{} openings for {} indices",
            openings.len(),
            s.len()
        )));
    }
    let preimages_passed = s
        .iter()
        .zip(&openings)
        .all(|(&i, &(b, x))| ntcf::chk(&keys[i], b, x, commits[i].y));
    Ok(CutAndChooseTrace {
        subset: s,
        certificate_passed,
        preimages_passed: Some(preimages_passed),
        won: preimages_passed,
    })
}

/// Exact win probability of a catalog strategy where one is known.
pub fn analytic_win_probability(strategy: &str, n: usize, w: usize) -> Option<f64> {
    let half = 2 * n as i32;
    match strategy {
        // every checked instance passes unless d = 0, then every preimage
        // on S is a blind guess out of 2^{w+1}
        "delete-everything" => Some((1.0 - 0.5f64.powi(w as i32)).powi(half) * 0.5f64.powi((w as i32 + 1) * half)),
        // each fabricated parity is right with probability 1/2
        "keep-preimages" => Some(0.5f64.powi(half)),
        "table-reader" => Some(1.0),
        _ => None,
    }
}

/// Probability that a catalog strategy passes the certificate check.
pub fn analytic_certificate_probability(strategy: &str, n: usize, w: usize) -> Option<f64> {
    let half = 2 * n as i32;
    match strategy {
        "delete-everything" => Some((1.0 - 0.5f64.powi(w as i32)).powi(half)),
        "keep-preimages" => Some(0.5f64.powi(half)),
        "table-reader" => Some(1.0),
        _ => None,
    }
}

/// Hadamard-measures every register, then guesses preimages.
#[derive(Debug, Default)]
pub struct DeleteEverything {
    w: usize,
}

impl CutAndChooseAdversary for DeleteEverything {
    fn name(&self) -> &'static str {
        "delete-everything"
    }

    fn commit(&mut self, keys: &[ClawFreeKey], rng: &mut dyn RngCore) -> Vec<CommitEntry> {
        self.w = keys.first().map_or(0, ClawFreeKey::w);
        keys.iter()
            .map(|key| {
                let (y, state, _) = qsim::prepare_range_superposition(key, rng).expect("valid key");
                let (e, d) = qsim::analytic_hadamard_sample(&state, key.label_map(), rng);
                CommitEntry { y, e, d }
            })
            .collect()
    }

    fn open(&mut self, s: &[usize], rng: &mut dyn RngCore) -> Vec<(bool, u32)> {
        s.iter()
            .map(|_| (rng.gen(), rng.gen_range(0..1u32 << self.w)))
            .collect()
    }
}

/// Measures every register computationally and fabricates `(e, d)`.
#[derive(Debug, Default)]
pub struct KeepPreimages {
    preimages: Vec<(bool, u32)>,
}

impl CutAndChooseAdversary for KeepPreimages {
    fn name(&self) -> &'static str {
        "keep-preimages"
    }

    fn commit(&mut self, keys: &[ClawFreeKey], rng: &mut dyn RngCore) -> Vec<CommitEntry> {
        keys.iter()
            .map(|key| {
                let (y, state, _) = qsim::prepare_range_superposition(key, rng).expect("valid key");
                let preimage = match state {
                    ClawInstanceState::GType { b, x, .. } => (b, x),
                    ClawInstanceState::FType { x0, x1, .. } => {
                        if rng.gen() {
                            (true, x1)
                        } else {
                            (false, x0)
                        }
                    }
                };
                self.preimages.push(preimage);
                CommitEntry {
                    y,
                    e: rng.gen(),
                    d: rng.gen_range(1..1u32 << key.w()),
                }
            })
            .collect()
    }

    fn open(&mut self, s: &[usize], _: &mut dyn RngCore) -> Vec<(bool, u32)> {
        s.iter().map(|&i| self.preimages[i]).collect()
    }
}

/// Reads the public tables to find claws directly. Wins every time; the
/// idealized family is not claw-free.
#[derive(Debug, Default)]
pub struct TableReader {
    preimages: Vec<(bool, u32)>,
}

impl CutAndChooseAdversary for TableReader {
    fn name(&self) -> &'static str {
        "table-reader"
    }

    fn commit(&mut self, keys: &[ClawFreeKey], rng: &mut dyn RngCore) -> Vec<CommitEntry> {
        keys.iter()
            .map(|key| {
                let w = key.w();
                let b = key.mode() == FunctionMode::GType && rng.gen();
                let x = rng.gen_range(0..1u32 << w);
                let y = key.eval(b, x).expect("x in range");
                self.preimages.push((b, x));
                let d = rng.gen_range(1..1u32 << w);
                let e = match key.mode() {
                    FunctionMode::FType => {
                        let x1 = (0..1u32 << w)
                            .find(|&c| key.eval(true, c) == Ok(y))
                            .expect("2-to-1 key");
                        let j = key.label_map();
                        bits::dot(d, j.apply(x) ^ j.apply(x1))
                    }
                    FunctionMode::GType => rng.gen(),
                };
                CommitEntry { y, e, d }
            })
            .collect()
    }

    fn open(&mut self, s: &[usize], _: &mut dyn RngCore) -> Vec<(bool, u32)> {
        s.iter().map(|&i| self.preimages[i]).collect()
    }
}

pub fn strategy_by_name(name: &str) -> Option<Box<dyn CutAndChooseAdversary + Send>> {
    match name {
        "delete-everything" => Some(Box::new(DeleteEverything::default())),
        "keep-preimages" => Some(Box::new(KeepPreimages::default())),
        "table-reader" => Some(Box::new(TableReader::default())),
        _ => None,
    }
}

pub const STRATEGIES: &[&str] = &["delete-everything", "keep-preimages", "table-reader"];
