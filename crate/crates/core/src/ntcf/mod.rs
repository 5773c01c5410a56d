//! Claw-free and injective function families, idealized.
//!
//! Functions are explicit permutation tables drawn by a seeded shuffle. They
//! are functionally exact (perfect matching, disjoint supports, trapdoor
//! inversion, noise-free range superposition) but NOT claw-free: the key
//! reveals the tables. Protocol correctness and honest-strategy statistics
//! do not depend on that; security claims do.

pub mod game;
pub mod subset;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::bits;
use crate::codec::{kind, Canonical, CodecError, Decoder, Encoder};
use crate::primitives::oracle::RandomOracle;
use crate::qsim::{LabelMap, QsimError};

pub use game::{run_amplified_hardcore_game, HardcoreAdversary, HardcoreClaim, HardcoreGameTrace};
pub use subset::{check_subset_lemma, disjoint_probability_exact, SubsetLemmaCheck};

pub const MIN_WIDTH: usize = 2;
pub const MAX_WIDTH: usize = 12;

#[derive(Debug, Error, PartialEq)]
pub enum NtcfError {
    #[error("preimage width {0} outside {MIN_WIDTH}..={MAX_WIDTH}")]
    WidthOutOfRange(usize),
    #[error("table is not a permutation of {0} labels")]
    NotPermutation(usize),
    #[error("input {x} does not fit in {w} bits")]
    InputOutOfRange { x: u32, w: usize },
    #[error("image {y} outside the range of this key")]
    ImageOutOfRange { y: u32 },
    #[error("operation needs a {expected:?} key, got {found:?}")]
    ModeMismatch {
        expected: FunctionMode,
        found: FunctionMode,
    },
    #[error("label map width {found} does not match key width {expected}")]
    LabelWidth { expected: usize, found: usize },
    #[error("invalid subset parameters n = {n}, t = {t}")]
    SubsetParams { n: usize, t: usize },
    #[error("adversary output malformed: {0}")]
    MalformedClaim(String),
    #[error(transparent)]
    Qsim(#[from] QsimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FunctionMode {
    /// 2-to-1 claw-free family `f(b, x) = π_b(x)`.
    FType,
    /// Injective family `g(b, x) = σ(b ∥ x)`.
    GType,
}

impl FunctionMode {
    fn tag(self) -> u8 {
        match self {
            Self::FType => 0x46,
            Self::GType => 0x47,
        }
    }

    fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0x46 => Some(Self::FType),
            0x47 => Some(Self::GType),
            _ => None,
        }
    }
}

/// Public forward tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ForwardTables {
    Claw { pi0: Vec<u32>, pi1: Vec<u32> },
    Injective { sigma: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClawFreeKey {
    w: usize,
    tables: ForwardTables,
    label_map: LabelMap,
    key_id: [u8; 16],
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum InverseTables {
    Claw { inv0: Vec<u32>, inv1: Vec<u32> },
    Injective { inv: Vec<u32> },
}

/// Inversion tables; only the key generator holds these.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClawFreeTrapdoor {
    w: usize,
    inverse: InverseTables,
    label_map: LabelMap,
    key_id: [u8; 16],
}

fn check_w(w: usize) -> Result<(), NtcfError> {
    if (MIN_WIDTH..=MAX_WIDTH).contains(&w) {
        Ok(())
    } else {
        Err(NtcfError::WidthOutOfRange(w))
    }
}

fn invert_permutation(table: &[u32]) -> Result<Vec<u32>, NtcfError> {
    let mut inv = vec![u32::MAX; table.len()];
    for (x, &y) in table.iter().enumerate() {
        match inv.get_mut(y as usize) {
            Some(slot) if *slot == u32::MAX => *slot = x as u32,
            _ => return Err(NtcfError::NotPermutation(table.len())),
        }
    }
    Ok(inv)
}

fn key_id(mode: FunctionMode, w: usize, tables: &[&[u32]], j: &LabelMap) -> [u8; 16] {
    let mut enc = Encoder::new();
    enc.put_u8(mode.tag());
    enc.put_u8(w as u8);
    for t in tables.iter().copied().chain(std::iter::once(j.table())) {
        for &v in t {
            enc.put_u16(v as u16);
        }
    }
    let digest = RandomOracle::new("CD-KEYID", 16).hash(&enc.finish());
    digest.try_into().expect("16-byte digest")
}

impl ClawFreeKey {
    /// Builds an FType key/trapdoor pair from explicit permutations of `{0,1}^w`.
    pub fn from_claw_tables(
        w: usize,
        pi0: Vec<u32>,
        pi1: Vec<u32>,
        label_map: LabelMap,
    ) -> Result<(Self, ClawFreeTrapdoor), NtcfError> {
        check_w(w)?;
        check_label_map(w, &label_map)?;
        if pi0.len() != 1 << w || pi1.len() != 1 << w {
            return Err(NtcfError::NotPermutation(1 << w));
        }
        let inv0 = invert_permutation(&pi0)?;
        let inv1 = invert_permutation(&pi1)?;
        let id = key_id(FunctionMode::FType, w, &[&pi0, &pi1], &label_map);
        let td = ClawFreeTrapdoor {
            w,
            inverse: InverseTables::Claw { inv0, inv1 },
            label_map: label_map.clone(),
            key_id: id,
        };
        let key = Self {
            w,
            tables: ForwardTables::Claw { pi0, pi1 },
            label_map,
            key_id: id,
        };
        Ok((key, td))
    }

    /// Builds a GType key/trapdoor pair from a permutation of `{0,1}^{w+1}`.
    pub fn from_injective_table(
        w: usize,
        sigma: Vec<u32>,
        label_map: LabelMap,
    ) -> Result<(Self, ClawFreeTrapdoor), NtcfError> {
        check_w(w)?;
        check_label_map(w, &label_map)?;
        if sigma.len() != 1 << (w + 1) {
            return Err(NtcfError::NotPermutation(1 << (w + 1)));
        }
        let inv = invert_permutation(&sigma)?;
        let id = key_id(FunctionMode::GType, w, &[&sigma], &label_map);
        let td = ClawFreeTrapdoor {
            w,
            inverse: InverseTables::Injective { inv },
            label_map: label_map.clone(),
            key_id: id,
        };
        let key = Self {
            w,
            tables: ForwardTables::Injective { sigma },
            label_map,
            key_id: id,
        };
        Ok((key, td))
    }

    pub fn mode(&self) -> FunctionMode {
        match self.tables {
            ForwardTables::Claw { .. } => FunctionMode::FType,
            ForwardTables::Injective { .. } => FunctionMode::GType,
        }
    }

    pub fn w(&self) -> usize {
        self.w
    }

    /// Bit width of images: `w` for FType, `w + 1` for GType.
    pub fn image_width(&self) -> usize {
        match self.mode() {
            FunctionMode::FType => self.w,
            FunctionMode::GType => self.w + 1,
        }
    }

    pub fn label_map(&self) -> &LabelMap {
        &self.label_map
    }

    pub fn key_id(&self) -> &[u8; 16] {
        &self.key_id
    }

    /// The forward tables. Public in the idealized instantiation.
    pub fn tables(&self) -> &ForwardTables {
        &self.tables
    }

    pub fn eval(&self, b: bool, x: u32) -> Result<u32, NtcfError> {
        if x >= 1 << self.w {
            return Err(NtcfError::InputOutOfRange { x, w: self.w });
        }
        Ok(self.eval_label(((b as u32) << self.w) | x))
    }

    /// Evaluates on the packed `b ∥ x` label; `label` must be below `2^{w+1}`.
    pub(crate) fn eval_label(&self, label: u32) -> u32 {
        let x = (label & ((1 << self.w) - 1)) as usize;
        match &self.tables {
            ForwardTables::Claw { pi0, pi1 } => {
                if label >> self.w == 0 {
                    pi0[x]
                } else {
                    pi1[x]
                }
            }
            ForwardTables::Injective { sigma } => sigma[label as usize],
        }
    }
}

fn check_label_map(w: usize, j: &LabelMap) -> Result<(), NtcfError> {
    if j.width() != w {
        return Err(NtcfError::LabelWidth {
            expected: w,
            found: j.width(),
        });
    }
    Ok(())
}

impl ClawFreeTrapdoor {
    pub fn mode(&self) -> FunctionMode {
        match self.inverse {
            InverseTables::Claw { .. } => FunctionMode::FType,
            InverseTables::Injective { .. } => FunctionMode::GType,
        }
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn label_map(&self) -> &LabelMap {
        &self.label_map
    }

    pub fn key_id(&self) -> &[u8; 16] {
        &self.key_id
    }
}

pub fn gen_f<R: Rng + ?Sized>(w: usize, rng: &mut R) -> Result<(ClawFreeKey, ClawFreeTrapdoor), NtcfError> {
    gen_f_with_label_map(w, LabelMap::identity(w.min(MAX_WIDTH)), rng)
}

pub fn gen_f_with_label_map<R: Rng + ?Sized>(
    w: usize,
    label_map: LabelMap,
    rng: &mut R,
) -> Result<(ClawFreeKey, ClawFreeTrapdoor), NtcfError> {
    check_w(w)?;
    let mut pi0: Vec<u32> = (0..1u32 << w).collect();
    let mut pi1 = pi0.clone();
    pi0.shuffle(rng);
    pi1.shuffle(rng);
    ClawFreeKey::from_claw_tables(w, pi0, pi1, label_map)
}

pub fn gen_g<R: Rng + ?Sized>(w: usize, rng: &mut R) -> Result<(ClawFreeKey, ClawFreeTrapdoor), NtcfError> {
    gen_g_with_label_map(w, LabelMap::identity(w.min(MAX_WIDTH)), rng)
}

pub fn gen_g_with_label_map<R: Rng + ?Sized>(
    w: usize,
    label_map: LabelMap,
    rng: &mut R,
) -> Result<(ClawFreeKey, ClawFreeTrapdoor), NtcfError> {
    check_w(w)?;
    let mut sigma: Vec<u32> = (0..1u32 << (w + 1)).collect();
    sigma.shuffle(rng);
    ClawFreeKey::from_injective_table(w, sigma, label_map)
}

/// Trapdoor-free membership check `y ∈ Supp(f(b, x))`.
///
/// Supports are singletons, so this is exact equality. The same routine
/// serves both families.
pub fn chk(key: &ClawFreeKey, b: bool, x: u32, y: u32) -> bool {
    key.eval(b, x).is_ok_and(|image| image == y)
}

/// Squared Hellinger distance between the ideal and sampled image
/// distributions of `(b, x)`. Both are the same point mass here.
pub fn hellinger_sq(key: &ClawFreeKey, b: bool, x: u32) -> Result<f64, NtcfError> {
    let ideal = key.eval(b, x)?;
    let sampled = key.eval(b, x)?;
    Ok(if ideal == sampled { 0.0 } else { 1.0 })
}

/// `Inv_F(td, b, y)`.
pub fn invert_f(td: &ClawFreeTrapdoor, b: bool, y: u32) -> Result<u32, NtcfError> {
    match &td.inverse {
        InverseTables::Claw { inv0, inv1 } => {
            let table = if b { inv1 } else { inv0 };
            table.get(y as usize).copied().ok_or(NtcfError::ImageOutOfRange { y })
        }
        InverseTables::Injective { .. } => Err(NtcfError::ModeMismatch {
            expected: FunctionMode::FType,
            found: FunctionMode::GType,
        }),
    }
}

/// `Inv_G(td, y) = (b, x)`.
pub fn invert_g(td: &ClawFreeTrapdoor, y: u32) -> Result<(bool, u32), NtcfError> {
    match &td.inverse {
        InverseTables::Injective { inv } => {
            let label = inv.get(y as usize).copied().ok_or(NtcfError::ImageOutOfRange { y })?;
            Ok((label >> td.w == 1, label & ((1 << td.w) - 1)))
        }
        InverseTables::Claw { .. } => Err(NtcfError::ModeMismatch {
            expected: FunctionMode::GType,
            found: FunctionMode::FType,
        }),
    }
}

/// The matching preimage `x1` with `f(0, x0) = f(1, x1)`.
pub fn claw_partner(td: &ClawFreeTrapdoor, x0: u32) -> Result<u32, NtcfError> {
    match &td.inverse {
        InverseTables::Claw { inv0, inv1 } => {
            if x0 >= 1 << td.w {
                return Err(NtcfError::InputOutOfRange { x: x0, w: td.w });
            }
            // π_0 is the inverse of inv0.
            let y = inv0
                .iter()
                .position(|&v| v == x0)
                .expect("inverse table is a permutation");
            Ok(inv1[y])
        }
        InverseTables::Injective { .. } => Err(NtcfError::ModeMismatch {
            expected: FunctionMode::FType,
            found: FunctionMode::GType,
        }),
    }
}

/// The hardcore set `G_{k,b,x} = {0,1}^w \ {0^w}` (independent of `k, b, x`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HardcoreSetSpec {
    pub w: usize,
}

impl HardcoreSetSpec {
    pub fn contains(&self, d: u32) -> bool {
        d != 0 && d < 1 << self.w
    }

    /// `Pr_d[d ∉ G]` for uniform `d`.
    pub fn miss_probability(&self) -> f64 {
        1.0 / (1u64 << self.w) as f64
    }
}

pub fn hardcore_membership(spec: &HardcoreSetSpec, d: u32) -> bool {
    spec.contains(d)
}

/// The certificate predicate `d ∈ G ∩ G ∧ e = d·(J(x0) ⊕ J(x1))`.
pub fn certificate_predicate(j: &LabelMap, x0: u32, x1: u32, e: bool, d: u32) -> bool {
    let spec = HardcoreSetSpec { w: j.width() };
    spec.contains(d) && e == bits::dot(d, j.apply(x0) ^ j.apply(x1))
}

fn put_table(enc: &mut Encoder, t: &[u32]) {
    enc.put_u32(t.len() as u32);
    for &v in t {
        enc.put_u16(v as u16);
    }
}

fn get_table(dec: &mut Decoder<'_>) -> Result<Vec<u32>, CodecError> {
    let len = dec.u32()? as usize;
    if len > 1 << (MAX_WIDTH + 1) {
        return Err(CodecError::invalid("table too long"));
    }
    (0..len).map(|_| dec.u16().map(u32::from)).collect()
}

fn decode_header(dec: &mut Decoder<'_>) -> Result<(FunctionMode, usize), CodecError> {
    let mode = FunctionMode::from_tag(dec.u8()?).ok_or_else(|| CodecError::invalid("function mode"))?;
    let w = dec.u8()? as usize;
    check_w(w).map_err(|e| CodecError::invalid(e.to_string()))?;
    Ok((mode, w))
}

impl Canonical for ClawFreeKey {
    const KIND: u8 = kind::CLAW_FREE_KEY;

    fn encode_into(&self, enc: &mut Encoder) {
        enc.put_u8(self.mode().tag());
        enc.put_u8(self.w as u8);
        match &self.tables {
            ForwardTables::Claw { pi0, pi1 } => {
                put_table(enc, pi0);
                put_table(enc, pi1);
            }
            ForwardTables::Injective { sigma } => put_table(enc, sigma),
        }
        put_table(enc, self.label_map.table());
        enc.put_raw(&self.key_id);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let (mode, w) = decode_header(dec)?;
        let tables = match mode {
            FunctionMode::FType => ForwardTables::Claw {
                pi0: get_table(dec)?,
                pi1: get_table(dec)?,
            },
            FunctionMode::GType => ForwardTables::Injective { sigma: get_table(dec)? },
        };
        let j = LabelMap::new(w, get_table(dec)?).map_err(|e| CodecError::invalid(e.to_string()))?;
        let id: [u8; 16] = dec.take(16)?.try_into().unwrap();
        let rebuilt = match tables {
            ForwardTables::Claw { pi0, pi1 } => ClawFreeKey::from_claw_tables(w, pi0, pi1, j),
            ForwardTables::Injective { sigma } => ClawFreeKey::from_injective_table(w, sigma, j),
        }
        .map_err(|e| CodecError::invalid(e.to_string()))?
        .0;
        if rebuilt.key_id != id {
            return Err(CodecError::invalid("key id does not match tables"));
        }
        Ok(rebuilt)
    }
}

impl Canonical for ClawFreeTrapdoor {
    const KIND: u8 = kind::CLAW_FREE_TRAPDOOR;

    fn encode_into(&self, enc: &mut Encoder) {
        enc.put_u8(self.mode().tag());
        enc.put_u8(self.w as u8);
        match &self.inverse {
            InverseTables::Claw { inv0, inv1 } => {
                put_table(enc, inv0);
                put_table(enc, inv1);
            }
            InverseTables::Injective { inv } => put_table(enc, inv),
        }
        put_table(enc, self.label_map.table());
        enc.put_raw(&self.key_id);
    }

    fn decode_from(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let (mode, w) = decode_header(dec)?;
        let bad = |_| CodecError::invalid("trapdoor table is not a permutation");
        let inverse = match mode {
            FunctionMode::FType => {
                let inv0 = get_table(dec)?;
                let inv1 = get_table(dec)?;
                if inv0.len() != 1 << w || inv1.len() != 1 << w {
                    return Err(CodecError::invalid("trapdoor table length"));
                }
                invert_permutation(&inv0).map_err(bad)?;
                invert_permutation(&inv1).map_err(bad)?;
                InverseTables::Claw { inv0, inv1 }
            }
            FunctionMode::GType => {
                let inv = get_table(dec)?;
                if inv.len() != 1 << (w + 1) {
                    return Err(CodecError::invalid("trapdoor table length"));
                }
                invert_permutation(&inv).map_err(bad)?;
                InverseTables::Injective { inv }
            }
        };
        let label_map = LabelMap::new(w, get_table(dec)?).map_err(|e| CodecError::invalid(e.to_string()))?;
        let key_id = dec.take(16)?.try_into().unwrap();
        Ok(Self {
            w,
            inverse,
            label_map,
            key_id,
        })
    }
}
