//! Desk-scale Regev encryption.
//!
//! `A ∈ Z_q^{m×n}` is expanded from a 32-byte seed, `b = A·s + e` with `e`
//! uniform in `[-B, B]`. A bit is encrypted as `(u, v) = (Aᵀr, bᵀr + bit·⌊q/2⌋)`
//! for a uniform `r ∈ {0,1}^m`. Decryption error is `eᵀr`, bounded by `m·B`,
//! so `m·B < q/4` makes decryption exact.

use rand::Rng;
use sha3::digest::XofReader;

use super::oracle::RandomOracle;

pub const SEED_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegevParams {
    /// Secret dimension.
    pub n: usize,
    /// Number of samples in the public key.
    pub m: usize,
    pub q: u32,
    /// Noise bound: `e_i ∈ [-B, B]`.
    pub noise_bound: u32,
}

pub const LEVEL_128: RegevParams = RegevParams {
    n: 256,
    m: 512,
    q: 12289,
    noise_bound: 4,
};

pub const LEVEL_192: RegevParams = RegevParams {
    n: 384,
    m: 768,
    q: 12289,
    noise_bound: 3,
};

impl RegevParams {
    /// Worst-case magnitude of the accumulated decryption noise.
    pub fn max_noise(&self) -> u64 {
        self.m as u64 * self.noise_bound as u64
    }

    /// True when `max_noise < q/4`, i.e. decryption can never fail.
    pub fn decryption_is_exact(&self) -> bool {
        4 * self.max_noise() < self.q as u64
    }
}

pub struct PublicKey {
    pub seed: [u8; SEED_LEN],
    pub b: Vec<u16>,
}

pub struct SecretKey {
    pub s: Vec<u16>,
}

/// Row-major `m × n` matrix expanded from the seed by rejection sampling.
pub fn expand_matrix(params: &RegevParams, seed: &[u8; SEED_LEN]) -> Vec<u16> {
    let q = params.q;
    let bound = (u16::MAX as u32 + 1) / q * q;
    let mut reader = RandomOracle::new("CD-REGEV-A", 0).reader(seed);
    let mut out = Vec::with_capacity(params.m * params.n);
    let mut buf = [0u8; 2];
    while out.len() < params.m * params.n {
        reader.read(&mut buf);
        let v = u16::from_be_bytes(buf) as u32;
        if v < bound {
            out.push((v % q) as u16);
        }
    }
    out
}

pub fn keygen<R: Rng + ?Sized>(params: &RegevParams, rng: &mut R) -> (PublicKey, SecretKey) {
    let q = params.q;
    let mut seed = [0u8; SEED_LEN];
    rng.fill_bytes(&mut seed);
    let a = expand_matrix(params, &seed);
    let s: Vec<u16> = (0..params.n).map(|_| rng.gen_range(0..q) as u16).collect();
    let bnd = params.noise_bound as i64;
    let b = (0..params.m)
        .map(|i| {
            let row = &a[i * params.n..(i + 1) * params.n];
            let dot: u64 = row.iter().zip(&s).map(|(&x, &y)| x as u64 * y as u64).sum();
            let e = rng.gen_range(-bnd..=bnd);
            ((dot as i64 + e).rem_euclid(q as i64)) as u16
        })
        .collect();
    (PublicKey { seed, b }, SecretKey { s })
}

/// Encrypts each bit; returns `n + 1` residues per bit.
pub fn encrypt_bits<R: Rng + ?Sized>(
    params: &RegevParams,
    pk: &PublicKey,
    bits: &[bool],
    rng: &mut R,
) -> Vec<Vec<u16>> {
    let a = expand_matrix(params, &pk.seed);
    let q = params.q as u64;
    bits.iter()
        .map(|&bit| {
            let mut u = vec![0u64; params.n];
            let mut v = 0u64;
            for i in 0..params.m {
                if rng.gen::<bool>() {
                    let row = &a[i * params.n..(i + 1) * params.n];
                    for (acc, &x) in u.iter_mut().zip(row) {
                        *acc += x as u64;
                    }
                    v += pk.b[i] as u64;
                }
            }
            if bit {
                v += q / 2;
            }
            let mut out: Vec<u16> = u.into_iter().map(|x| (x % q) as u16).collect();
            out.push((v % q) as u16);
            out
        })
        .collect()
}

pub fn decrypt_bit(params: &RegevParams, sk: &SecretKey, ct: &[u16]) -> bool {
    let q = params.q as u64;
    let (u, v) = ct.split_at(params.n);
    let us: u64 = u.iter().zip(&sk.s).map(|(&x, &y)| x as u64 * y as u64 % q).sum::<u64>() % q;
    let diff = (v[0] as u64 + q - us) % q;
    // closer to q/2 than to 0
    diff > q / 4 && diff < 3 * q / 4
}

/// Noise term `v − ⟨u, s⟩ − bit·⌊q/2⌋` as a centered representative.
pub fn decryption_noise(params: &RegevParams, sk: &SecretKey, ct: &[u16], bit: bool) -> i64 {
    let q = params.q as i64;
    let (u, v) = ct.split_at(params.n);
    let us: i64 = u.iter().zip(&sk.s).map(|(&x, &y)| x as i64 * y as i64 % q).sum::<i64>();
    let mut diff = (v[0] as i64 - us - if bit { q / 2 } else { 0 }).rem_euclid(q);
    if diff > q / 2 {
        diff -= q;
    }
    diff
}
