//! Block construction of candidate spectra.
//!
//! Levels are grouped into blocks of K consecutive matrices. Each block
//! carries a compatible pair (R̃ₖ, D̃ₖ, Lₖ) whose labels are reduced into the
//! fundamental domain R̃ₖᵗ(−1/2,1/2]ⁿ; the spectrum is the label tower
//! Λₖ = L₀ + R̃₀ᵗL₁ + ⋯ + (R̃₀ᵗ⋯R̃ₖ₋₁ᵗ)Lₖ.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Signed;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{rat, IntMatrix, IntVector, Rational, RationalMatrix, ScaledInverse};
use crate::mask::DigitSet;
use crate::pairs::{is_compatible_pair, odometer_sums, CheckMode};
use crate::system::{Level, MoranSystem};

pub const DEFAULT_CAP: usize = 1_000_000;

/// Change of variables recorded by [`normalize_first`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Normalization {
    /// ξ ↦ m R₁⁻ᵗ ξ: the original transform at ξ equals the normalized one here.
    #[serde(skip)]
    pub forward: RationalMatrix,
    /// λ′ ↦ (1/m) R₁ᵗ λ′: maps spectra of the normalized system back.
    #[serde(skip)]
    pub pullback: RationalMatrix,
    pub identity: bool,
}

impl Normalization {
    pub fn pull_back(&self, lambda: &IntVector) -> crate::exact::RationalVector {
        self.pullback.mul_int_vec(lambda)
    }
}

/// Replaces R₁ by mI. The measures are related by the linear map
/// x ↦ m R₁⁻¹ x, so the later levels are untouched.
pub fn normalize_first(system: &MoranSystem) -> Result<(MoranSystem, Normalization)> {
    let n = system.dim();
    let m = system.prime() as i64;
    let mi = IntMatrix::scalar(n, m);
    let first = system.level(1);
    if first.matrix == mi {
        let id = RationalMatrix::identity(n);
        return Ok((
            system.clone(),
            Normalization {
                forward: id.clone(),
                pullback: id,
                identity: true,
            },
        ));
    }
    let inv = crate::exact::rational_inverse(&first.matrix)?;
    let forward = inv.transpose().scale(&rat(m, 1));
    let pullback = first.matrix.transpose().to_rational().scale(&rat(1, m));
    let level = Level::with_zeros(mi, first.digits.clone(), first.zeros.clone());
    let r = system.params().r.max(1.0 / m as f64);
    Ok((
        system.replace_first(level, r),
        Normalization {
            forward,
            pullback,
            identity: false,
        },
    ))
}

/// Least direction index i with νᵢᵗRₖ ≡ 0 mod m.
pub fn find_admissible_direction(system: &MoranSystem, k: usize) -> Option<usize> {
    let level = system.level(k);
    let m = BigInt::from(system.prime());
    let rt = level.matrix.transpose();
    level
        .zeros
        .nus()
        .position(|nu| rt.mul_vec(nu).0.iter().all(|x| x.is_multiple_of(&m)))
}

/// Block size from the tail estimates: M is the least integer with
/// 2πs(3√n/2)c²r^M ≤ 1/2, and K the least K ≥ M with
/// c²(√n/2)r^K/(1−r^K) ≤ δ/4.
pub fn choose_block_size(system: &MoranSystem) -> Result<usize> {
    for k in system.representative_tail() {
        if find_admissible_direction(system, k).is_none() {
            return Err(Error::NoAdmissibleDirection(k));
        }
    }
    let p = system.params();
    block_size_from(
        system.dim(),
        p.r,
        p.c,
        system.digit_bound(),
        crate::exact::rational_to_f64(&p.delta),
    )
}

pub fn block_size_from(n: usize, r: f64, c: f64, s: f64, delta: f64) -> Result<usize> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter(format!("r = {r} must lie in (0, 1)")));
    }
    let sqrt_n = (n as f64).sqrt();
    let lead = 2.0 * std::f64::consts::PI * s * 1.5 * sqrt_n * c * c;
    let mut big_m = 1usize;
    while lead * r.powi(big_m as i32) > 0.5 {
        big_m += 1;
        if big_m > 100_000 {
            return Err(Error::InvalidParameter("block size does not converge".into()));
        }
    }
    let mut k = big_m;
    loop {
        let rk = r.powi(k as i32);
        if c * c * sqrt_n / 2.0 * rk / (1.0 - rk) <= delta / 4.0 {
            return Ok(k);
        }
        k += 1;
        if k > 100_000 {
            return Err(Error::InvalidParameter("block size does not converge".into()));
        }
    }
}

/// One block (R̃ₖ, D̃ₖ, Lₖ).
#[derive(Clone, Debug, Serialize)]
pub struct Block {
    pub matrix: IntMatrix,
    pub digits: DigitSet,
    pub labels: Vec<IntVector>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BlockDecomposition {
    pub block_size: usize,
    pub blocks: Vec<Block>,
    /// Chosen direction index per level 1, 2, …
    pub directions: Vec<usize>,
    /// Set when the label sets had to be built from the shorter reading of
    /// the block display (k terms instead of K).
    pub literal_fallback: bool,
}

/// Level labels (1/m)Rᵗ{0, c⁽¹⁾, …} with c⁽ˡ⁾ ≡ lν mod m and c⁽ˡ⁾/m ∈ (−1/2,1/2]ⁿ.
fn level_labels(level: &Level, dir: usize, m: u64) -> Vec<IntVector> {
    let nu = level.zeros.directions[dir].nu.clone();
    let mb = BigInt::from(m);
    let half = (&mb - 1u32) / 2u32; // representatives in (−m/2, m/2]
    let upper = if m.is_multiple_of(2) { &mb / 2u32 } else { half };
    let rt = level.matrix.transpose();
    (0..m)
        .map(|l| {
            let c = IntVector(
                nu.scale(&BigInt::from(l))
                    .mod_floor(&mb)
                    .0
                    .into_iter()
                    .map(|x| if x > upper { x - &mb } else { x })
                    .collect(),
            );
            let v = rt.mul_vec(&c);
            IntVector(v.0.into_iter().map(|x| x / &mb).collect())
        })
        .collect()
}

/// Representative of v modulo Pℤⁿ with P⁻¹v ∈ (−1/2, 1/2]ⁿ.
pub fn reduce_to_fundamental_domain(p: &ScaledInverse, matrix: &IntMatrix, v: &IntVector) -> IntVector {
    // z = ceil(P⁻¹v − 1/2) = ceil((2·adj·v − det) / (2·det))
    let w = p.adj.mul_vec(v);
    let two_det = &p.det * 2u32;
    let z = IntVector(
        w.0.iter()
            .map(|x| {
                let num: BigInt = x * 2u32 - &p.det;
                num.div_ceil(&two_det)
            })
            .collect(),
    );
    v - &matrix.mul_vec(&z)
}

pub fn build_blocks(system: &MoranSystem, block_size: usize, num_blocks: usize) -> Result<BlockDecomposition> {
    if block_size == 0 {
        return Err(Error::InvalidParameter("block size must be positive".into()));
    }
    let n = system.dim();
    let m = system.prime();
    let total_levels = block_size * num_blocks;
    let mut directions = Vec::with_capacity(total_levels);
    for k in 1..=total_levels {
        directions.push(find_admissible_direction(system, k).ok_or(Error::NoAdmissibleDirection(k))?);
    }
    let mut blocks = Vec::with_capacity(num_blocks);
    let mut literal_fallback = false;
    for b in 0..num_blocks {
        let first = b * block_size + 1;
        let levels: Vec<usize> = (first..first + block_size).collect();
        let matrix = levels
            .iter()
            .fold(IntMatrix::identity(n), |acc, &k| system.level(k).matrix.mul(&acc));
        // digit tower D_{last} + R_{last} D_{last−1} + ⋯
        let mut digit_sets = Vec::with_capacity(block_size);
        let mut mult = IntMatrix::identity(n);
        for &k in levels.iter().rev() {
            let lv = system.level(k);
            digit_sets.push(lv.digits.iter().map(|d| mult.mul_vec(d)).collect::<Vec<_>>());
            mult = mult.mul(&lv.matrix);
        }
        digit_sets.reverse();
        let digits = DigitSet::new(odometer_sums(&digit_sets, n))?;
        let inv_t = ScaledInverse::of(&matrix.transpose())?;
        let rt = matrix.transpose();

        let label_tower = |count: usize| -> Vec<IntVector> {
            let mut sets = Vec::with_capacity(count);
            let mut mult = IntMatrix::identity(n);
            for &k in levels.iter().take(count) {
                let lv = system.level(k);
                let ls = level_labels(lv, directions[k - 1], m);
                sets.push(ls.iter().map(|l| mult.mul_vec(l)).collect::<Vec<_>>());
                mult = mult.mul(&lv.matrix.transpose());
            }
            odometer_sums(&sets, n)
                .iter()
                .map(|v| reduce_to_fundamental_domain(&inv_t, &rt, v))
                .collect()
        };

        let labels = label_tower(block_size);
        let check = is_compatible_pair(&matrix, &digits, &labels, CheckMode::Exact)?;
        let labels = if check.ok {
            labels
        } else {
            let literal = label_tower(b.min(block_size));
            let ok = literal.len() == digits.len()
                && is_compatible_pair(&matrix, &digits, &literal, CheckMode::Exact)?.ok;
            if !ok {
                return Err(Error::PairVerificationFailed {
                    block: b,
                    witness: check.witness.expect("failed check carries a witness"),
                });
            }
            literal_fallback = true;
            literal
        };
        blocks.push(Block {
            matrix,
            digits,
            labels,
        });
    }
    Ok(BlockDecomposition {
        block_size,
        blocks,
        directions,
        literal_fallback,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumLevel {
    pub k: usize,
    pub block_size: usize,
    pub elements: Vec<IntVector>,
}

impl SpectrumLevel {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Λₖ, enumerated with the label of block 0 varying fastest so that Λₖ is
/// a prefix of Λₖ₊₁. Distinctness and the containment
/// (R̃₀ᵗ⋯R̃ₖᵗ)⁻¹Λₖ ⊂ [−1/2−δ/4, 1/2+δ/4]ⁿ are checked exactly.
pub fn build_spectrum_level(
    decomp: &BlockDecomposition,
    k: usize,
    delta: &Rational,
    cap: usize,
) -> Result<SpectrumLevel> {
    if k >= decomp.blocks.len() {
        return Err(Error::InvalidParameter(format!(
            "level {k} needs {} blocks, only {} built",
            k + 1,
            decomp.blocks.len()
        )));
    }
    let needed: u128 = decomp.blocks[..=k]
        .iter()
        .map(|b| b.labels.len() as u128)
        .product();
    if needed > cap as u128 {
        return Err(Error::CapExceeded { needed, cap });
    }
    let n = decomp.blocks[0].matrix.dim();
    let mut sets = Vec::with_capacity(k + 1);
    let mut mult = IntMatrix::identity(n);
    for b in &decomp.blocks[..=k] {
        sets.push(b.labels.iter().map(|l| mult.mul_vec(l)).collect::<Vec<_>>());
        mult = mult.mul(&b.matrix.transpose());
    }
    let elements = odometer_sums(&sets, n);

    let mut seen = HashSet::with_capacity(elements.len());
    for e in &elements {
        if !seen.insert(e) {
            return Err(Error::CollisionDetected {
                level: k,
                point: e.clone(),
            });
        }
    }

    // |adj(P)λ|ᵢ ≤ (1/2 + δ/4)·det(P) with P = R̃₀ᵗ⋯R̃ₖᵗ = mult
    let inv = ScaledInverse::of(&mult)?;
    let bound = rat(1, 2) + delta / Rational::from_integer(4.into());
    let (bn, bd) = (bound.numer().clone(), bound.denom().clone());
    let limit = &bn * &inv.det;
    for e in &elements {
        let w = inv.adj.mul_vec(e);
        if w.0.iter().any(|x| x.abs() * &bd > limit) {
            return Err(Error::ContainmentViolation {
                level: k,
                point: e.clone(),
            });
        }
    }
    Ok(SpectrumLevel {
        k,
        block_size: decomp.block_size,
        elements,
    })
}

/// The whole pipeline: normalize, pick K (or use the override), build
/// blocks and levels 0..=max_level.
#[derive(Clone, Debug)]
pub struct Construction {
    pub system: MoranSystem,
    pub normalization: Normalization,
    pub decomposition: BlockDecomposition,
    pub levels: Vec<SpectrumLevel>,
}

pub fn construct(
    system: &MoranSystem,
    block_size: Option<usize>,
    max_level: usize,
    cap: usize,
) -> Result<Construction> {
    let (normalized, normalization) = normalize_first(system)?;
    let k = match block_size {
        Some(k) => k,
        None => choose_block_size(&normalized)?,
    };
    let decomposition = build_blocks(&normalized, k, max_level + 1)?;
    let delta = normalized.params().delta.clone();
    let levels = (0..=max_level)
        .map(|l| build_spectrum_level(&decomposition, l, &delta, cap))
        .collect::<Result<Vec<_>>>()?;
    Ok(Construction {
        system: normalized,
        normalization,
        decomposition,
        levels,
    })
}
