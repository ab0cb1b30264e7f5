//! Compatible pairs (Hadamard triples) and their closure operations.
//!
//! A triple (R, D, L) is compatible when the matrix
//! `(1/√#D) [e^{2πi⟨R⁻¹d, ℓ⟩}]_{d,ℓ}` is unitary. Digits matter modulo
//! `Rℤⁿ` and labels modulo `Rᵗℤⁿ`.

use std::collections::HashSet;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{rational_inverse, vanishing_root_sum, IntMatrix, IntVector, ScaledInverse};
use crate::mask::DigitSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PairStatus {
    Unverified,
    Exact,
    Numeric,
    Failed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CheckMode {
    Exact,
    Numeric { tol: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompatiblePair {
    pub matrix: IntMatrix,
    pub digits: DigitSet,
    pub labels: Vec<IntVector>,
    pub status: PairStatus,
}

/// Outcome of a pair check; `witness` is the first offending label pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairCheck {
    pub ok: bool,
    pub witness: Option<(IntVector, IntVector)>,
    /// Largest entry of |H*H − I| (numeric mode only).
    pub max_deviation: Option<f64>,
}

impl CompatiblePair {
    /// Builds and verifies exactly.
    pub fn new(matrix: IntMatrix, digits: DigitSet, labels: Vec<IntVector>) -> Result<Self> {
        let check = is_compatible_pair(&matrix, &digits, &labels, CheckMode::Exact)?;
        let status = if check.ok { PairStatus::Exact } else { PairStatus::Failed };
        Ok(CompatiblePair {
            matrix,
            digits,
            labels,
            status,
        })
    }

    pub fn unverified(matrix: IntMatrix, digits: DigitSet, labels: Vec<IntVector>) -> Self {
        CompatiblePair {
            matrix,
            digits,
            labels,
            status: PairStatus::Unverified,
        }
    }

    pub fn verify(&self, mode: CheckMode) -> Result<PairCheck> {
        is_compatible_pair(&self.matrix, &self.digits, &self.labels, mode)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

fn check_shapes(r: &IntMatrix, d: &DigitSet, l: &[IntVector]) -> Result<()> {
    if d.len() != l.len() {
        return Err(Error::SizeMismatch {
            digits: d.len(),
            labels: l.len(),
        });
    }
    let n = r.dim();
    if d.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: d.dim(),
        });
    }
    if let Some(bad) = l.iter().find(|v| v.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.dim(),
        });
    }
    Ok(())
}

/// Label pairs (j, i) with i < j, in scan order.
fn label_pairs(count: usize) -> Vec<(usize, usize)> {
    (1..count).flat_map(|j| (0..j).map(move |i| (j, i))).collect()
}

pub fn is_compatible_pair(
    r: &IntMatrix,
    d: &DigitSet,
    l: &[IntVector],
    mode: CheckMode,
) -> Result<PairCheck> {
    check_shapes(r, d, l)?;
    match mode {
        CheckMode::Exact => exact_check(r, d, l),
        CheckMode::Numeric { tol } => numeric_check(r, d, l, tol),
    }
}

fn exact_check(r: &IntMatrix, d: &DigitSet, l: &[IntVector]) -> Result<PairCheck> {
    // ⟨R⁻¹d, ℓ−ℓ′⟩ = ⟨d, adj(Rᵗ)(ℓ−ℓ′)⟩ / det
    let inv_t = ScaledInverse::of(&r.transpose())?;
    let pairs = label_pairs(l.len());
    let outcome: Vec<Option<bool>> = pairs
        .par_iter()
        .map(|&(j, i)| {
            let v = inv_t.adj.mul_vec(&(&l[j] - &l[i]));
            let exps: Vec<BigInt> = d.iter().map(|digit| digit.dot(&v)).collect();
            vanishing_root_sum(&exps, &inv_t.det)
        })
        .collect();
    for (&(j, i), res) in pairs.iter().zip(outcome) {
        match res {
            Some(true) => {}
            Some(false) => {
                return Ok(PairCheck {
                    ok: false,
                    witness: Some((l[j].clone(), l[i].clone())),
                    max_deviation: None,
                })
            }
            None => {
                return Err(Error::ModelViolation(format!(
                    "determinant {} too large for the exact root-of-unity test",
                    inv_t.det
                )))
            }
        }
    }
    Ok(PairCheck {
        ok: true,
        witness: None,
        max_deviation: None,
    })
}

fn numeric_check(r: &IntMatrix, d: &DigitSet, l: &[IntVector], tol: f64) -> Result<PairCheck> {
    let inv = rational_inverse(r)?.to_f64();
    let n = r.dim();
    let ys: Vec<Vec<f64>> = d
        .iter()
        .map(|digit| {
            let x = digit.to_f64();
            (0..n).map(|i| (0..n).map(|j| inv[i * n + j] * x[j]).sum()).collect()
        })
        .collect();
    let ls: Vec<Vec<f64>> = l.iter().map(IntVector::to_f64).collect();
    let count = d.len() as f64;
    // (H*H)_{ji} = (1/#D) Σ_d e^{2πi⟨R⁻¹d, ℓ_i − ℓ_j⟩}
    let entry = |j: usize, i: usize| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for y in &ys {
            let t: f64 = y.iter().zip(ls[i].iter().zip(&ls[j])).map(|(a, (b, c))| a * (b - c)).sum();
            let t = t - t.round();
            acc += Complex64::from_polar(1.0, 2.0 * PI * t);
        }
        acc / count
    };
    let mut worst = 0.0f64;
    for j in 0..l.len() {
        worst = worst.max((entry(j, j) - 1.0).norm());
    }
    let mut witness = None;
    for (j, i) in label_pairs(l.len()) {
        let dev = entry(j, i).norm();
        worst = worst.max(dev);
        if dev >= tol && witness.is_none() {
            witness = Some((l[j].clone(), l[i].clone()));
        }
    }
    Ok(PairCheck {
        ok: witness.is_none() && worst < tol,
        witness,
        max_deviation: Some(worst),
    })
}

/// Shifts digits by `d0` and labels by `s`.
pub fn translate_pair(p: &CompatiblePair, s: &IntVector, d0: &IntVector) -> Result<CompatiblePair> {
    let digits = DigitSet::new(p.digits.iter().map(|d| d + d0).collect())?;
    let labels = p.labels.iter().map(|l| l + s).collect();
    Ok(CompatiblePair {
        matrix: p.matrix.clone(),
        digits,
        labels,
        status: p.status,
    })
}

/// Replaces labels by their negatives.
pub fn negate_labels(p: &CompatiblePair) -> CompatiblePair {
    CompatiblePair {
        labels: p.labels.iter().map(|l| -l).collect(),
        ..p.clone()
    }
}

/// Swaps in congruent digit and label sets, checked elementwise:
/// digits modulo `Rℤⁿ`, labels modulo `Rᵗℤⁿ`.
pub fn reduce_pair_mod(
    p: &CompatiblePair,
    digits: DigitSet,
    labels: Vec<IntVector>,
) -> Result<CompatiblePair> {
    check_shapes(&p.matrix, &digits, &labels)?;
    if digits.len() != p.digits.len() {
        return Err(Error::SizeMismatch {
            digits: digits.len(),
            labels: p.digits.len(),
        });
    }
    for (index, (a, b)) in p.digits.iter().zip(digits.iter()).enumerate() {
        if !p.matrix.lattice_contains(&(a - b))? {
            return Err(Error::CongruenceViolation { index });
        }
    }
    let rt = p.matrix.transpose();
    for (index, (a, b)) in p.labels.iter().zip(&labels).enumerate() {
        if !rt.lattice_contains(&(a - b))? {
            return Err(Error::CongruenceViolation { index });
        }
    }
    Ok(CompatiblePair {
        matrix: p.matrix.clone(),
        digits,
        labels,
        status: p.status,
    })
}

/// Product pair of levels 1..K: matrix `R_K⋯R₁`, digits
/// `D_K + R_K D_{K−1} + ⋯ + R_K⋯R₂ D₁`, labels
/// `L₁ + R₁ᵗL₂ + ⋯ + R₁ᵗ⋯R_{K−1}ᵗL_K`. Enumeration keeps level 1 fastest,
/// so the all-zero choice comes first when every set starts with 0.
pub fn tower_pair(pairs: &[CompatiblePair]) -> Result<CompatiblePair> {
    let first = pairs
        .first()
        .ok_or_else(|| Error::InvalidParameter("tower needs at least one pair".into()))?;
    let n = first.matrix.dim();
    for p in pairs {
        if p.matrix.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.matrix.dim(),
            });
        }
    }
    if pairs.len() == 1 {
        return Ok(first.clone());
    }
    let k = pairs.len();
    // digit multipliers: level j gets R_K⋯R_{j+1}
    let mut digit_mult = vec![IntMatrix::identity(n); k];
    for j in (0..k - 1).rev() {
        digit_mult[j] = digit_mult[j + 1].mul(&pairs[j + 1].matrix);
    }
    // label multipliers: level j gets R₁ᵗ⋯R_{j−1}ᵗ
    let mut label_mult = vec![IntMatrix::identity(n); k];
    for j in 1..k {
        label_mult[j] = label_mult[j - 1].mul(&pairs[j - 1].matrix.transpose());
    }
    let matrix = pairs
        .iter()
        .fold(IntMatrix::identity(n), |acc, p| p.matrix.mul(&acc));
    let digit_sets: Vec<Vec<IntVector>> = pairs
        .iter()
        .zip(&digit_mult)
        .map(|(p, m)| p.digits.iter().map(|d| m.mul_vec(d)).collect())
        .collect();
    let label_sets: Vec<Vec<IntVector>> = pairs
        .iter()
        .zip(&label_mult)
        .map(|(p, m)| p.labels.iter().map(|l| m.mul_vec(l)).collect())
        .collect();
    let digits = DigitSet::new(odometer_sums(&digit_sets, n))?;
    let labels = odometer_sums(&label_sets, n);
    let status = if pairs.iter().all(|p| p.status == PairStatus::Exact) {
        PairStatus::Exact
    } else {
        PairStatus::Unverified
    };
    Ok(CompatiblePair {
        matrix,
        digits,
        labels,
        status,
    })
}

/// All sums a₀ + a₁ + ⋯ with aⱼ ∈ sets[j], index of sets[0] varying fastest.
pub(crate) fn odometer_sums(sets: &[Vec<IntVector>], n: usize) -> Vec<IntVector> {
    let mut out = vec![IntVector::zeros(n)];
    for set in sets {
        let mut next = Vec::with_capacity(out.len() * set.len());
        for a in set {
            for prev in &out {
                next.push(prev + a);
            }
        }
        out = next;
    }
    out
}

/// Whether the vectors lie in pairwise distinct cosets of `ℤⁿ/Mℤⁿ`.
pub fn distinct_cosets(m: &IntMatrix, vecs: &[IntVector]) -> Result<bool> {
    let inv = ScaledInverse::of(m)?;
    let mut seen = HashSet::new();
    for v in vecs {
        let key = inv.adj.mul_vec(v).mod_floor(&inv.det);
        if !seen.insert(key) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Digits distinct modulo `Rℤⁿ` and labels distinct modulo `Rᵗℤⁿ`.
pub fn has_distinct_cosets(p: &CompatiblePair) -> Result<bool> {
    Ok(distinct_cosets(&p.matrix, p.digits.digits())?
        && distinct_cosets(&p.matrix.transpose(), &p.labels)?)
}
