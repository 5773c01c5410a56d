//! Exact combinatorics of uniform half-size subsets.
//!
//! `S` is uniform among subsets of `[2n]` with `|S| = n` and `T` is any fixed
//! set of size `t`. The cut-and-choose setting uses the same count with `2n`
//! in place of `n` (subsets of `[4n]` of size `2n`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::NtcfError;

/// `Pr[S ∩ T = ∅] = ∏_{i<t} (n − i)/(2n − i)`, zero once `t > n`.
pub fn disjoint_probability_exact(n: usize, t: usize) -> Result<BigRational, NtcfError> {
    if n == 0 || t > 2 * n {
        return Err(NtcfError::SubsetParams { n, t });
    }
    if t > n {
        return Ok(BigRational::zero());
    }
    let mut p = BigRational::one();
    for i in 0..t {
        p *= BigRational::new(BigInt::from(n - i), BigInt::from(2 * n - i));
    }
    Ok(p)
}

/// Disjointness probability for `S ⊆ [4n]`, `|S| = 2n`.
pub fn cut_and_choose_disjoint_probability(n: usize, t: usize) -> Result<BigRational, NtcfError> {
    disjoint_probability_exact(2 * n, t)
}

fn ratio(num: usize, den: usize) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Outcome of checking the probability against its bounds for one `(n, t)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubsetLemmaCheck {
    pub n: usize,
    pub t: usize,
    /// Exact value rendered as `p/q`.
    pub probability: String,
    /// `Pr ≤ (1/2)^k` for every `k ≤ t`.
    pub upper_bounds_hold: bool,
    /// `Pr > ((n − k)/(2n − k))^k` for every `t ≤ k ≤ n` (vacuous when `t > n`).
    pub lower_bounds_hold: bool,
    /// `Pr = 0` whenever `t ≥ n + 1` (vacuous otherwise).
    pub pigeonhole_holds: bool,
}

impl SubsetLemmaCheck {
    pub fn holds(&self) -> bool {
        self.upper_bounds_hold && self.lower_bounds_hold && self.pigeonhole_holds
    }
}

pub fn check_subset_lemma(n: usize, t: usize) -> Result<SubsetLemmaCheck, NtcfError> {
    let p = disjoint_probability_exact(n, t)?;
    let upper_bounds_hold = (0..=t).all(|k| p <= ratio(1, 2).pow(k as i32));
    let lower_bounds_hold = (t..=n).all(|k| {
        if k == 0 {
            // The bound reads Pr > 1 at k = 0; Pr = 1 there, so only k ≥ 1 is meaningful.
            return true;
        }
        p > ratio(n - k, 2 * n - k).pow(k as i32)
    });
    let pigeonhole_holds = t <= n || p.is_zero();
    Ok(SubsetLemmaCheck {
        n,
        t,
        probability: p.to_string(),
        upper_bounds_hold,
        lower_bounds_hold,
        pigeonhole_holds,
    })
}

/// Checks every `t ∈ [0, 2n]` for every `n ∈ [1, max_n]`.
pub fn sweep_subset_lemma(max_n: usize) -> Result<Vec<SubsetLemmaCheck>, NtcfError> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        for t in 0..=2 * n {
            out.push(check_subset_lemma(n, t)?);
        }
    }
    Ok(out)
}
