//! Mask polynomials and their zero-direction structure.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{rational_to_f64, vanishing_root_sum, IntVector, Rational, RationalVector};
use crate::report::{ReportKind, VerificationReport, Witness};

/// A finite set of distinct integer digits in ℤⁿ, in the order given.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct DigitSet {
    digits: Vec<IntVector>,
}

impl DigitSet {
    pub fn new(digits: Vec<IntVector>) -> Result<Self> {
        let Some(first) = digits.first() else {
            return Err(Error::InvalidParameter("digit set is empty".into()));
        };
        let n = first.dim();
        for d in &digits {
            if d.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: d.dim(),
                });
            }
        }
        let mut sorted = digits.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("digits must be pairwise distinct".into()));
        }
        Ok(DigitSet { digits })
    }

    pub fn from_vecs(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(rows.iter().map(|r| IntVector::from_i64s(r)).collect())
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.digits[0].dim()
    }

    pub fn digits(&self) -> &[IntVector] {
        &self.digits
    }

    pub fn iter(&self) -> impl Iterator<Item = &IntVector> {
        self.digits.iter()
    }

    /// Largest Euclidean digit norm.
    pub fn max_norm(&self) -> f64 {
        self.digits
            .iter()
            .map(|d| d.to_f64().iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub(crate) fn as_f64(&self) -> Vec<Vec<f64>> {
        self.digits.iter().map(IntVector::to_f64).collect()
    }
}

/// One coset family jν/m + ℤⁿ, j = 1..m−1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZeroDirection {
    pub nu: IntVector,
    /// All entries of the canonical representative lie in [1, m−1].
    pub model_compliant: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZeroStructure {
    pub prime: u64,
    pub directions: Vec<ZeroDirection>,
}

impl ZeroStructure {
    pub fn empty(prime: u64) -> Self {
        ZeroStructure {
            prime,
            directions: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn nus(&self) -> impl Iterator<Item = &IntVector> {
        self.directions.iter().map(|d| &d.nu)
    }

    /// Index of the direction whose coset family contains `eta`, with the
    /// multiplier j.
    pub fn coset_of(&self, eta: &RationalVector) -> Option<(usize, u64)> {
        let m = BigInt::from(self.prime);
        let scaled = eta.scale(&Rational::from_integer(m)).to_integral()?;
        self.coset_of_scaled(&scaled)
    }

    /// Same as [`coset_of`](Self::coset_of) for the integer vector u = mη.
    pub fn coset_of_scaled(&self, u: &IntVector) -> Option<(usize, u64)> {
        let m = BigInt::from(self.prime);
        let w = u.mod_floor(&m);
        if w.is_zero() {
            return None;
        }
        self.directions.iter().enumerate().find_map(|(i, dir)| {
            let lead = dir.nu.0.iter().position(|x| !x.is_zero())?;
            // canonical ν has a leading 1, so j is read off directly
            let j = w.0[lead].clone();
            if j.is_zero() {
                return None;
            }
            let matches = dir
                .nu
                .0
                .iter()
                .zip(&w.0)
                .all(|(v, x)| (&j * v).mod_floor(&m) == *x);
            matches.then(|| (i, j.to_u64().unwrap_or(0)))
        })
    }

    pub fn contains(&self, eta: &RationalVector) -> bool {
        self.coset_of(eta).is_some()
    }

    /// The points (jν mod m)/m for every direction and j = 1..m−1.
    pub fn offsets(&self) -> Vec<RationalVector> {
        let m = BigInt::from(self.prime);
        let mut out = Vec::new();
        for nu in self.nus() {
            for j in 1..self.prime {
                let v = nu.scale(&BigInt::from(j)).mod_floor(&m);
                out.push(RationalVector(
                    v.0.into_iter().map(|x| Rational::new(x, m.clone())).collect(),
                ));
            }
        }
        out
    }
}

fn check_dim(d: &DigitSet, n: usize) -> Result<()> {
    if d.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: d.dim(),
            found: n,
        });
    }
    Ok(())
}

/// `(1/#D) Σ_d e^{2πi⟨ξ,d⟩}` on the floating path.
pub fn mask_eval(d: &DigitSet, xi: &[f64]) -> Result<Complex64> {
    check_dim(d, xi.len())?;
    Ok(mask_eval_f64(&d.as_f64(), xi))
}

pub(crate) fn mask_eval_f64(digits: &[Vec<f64>], xi: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for d in digits {
        let t: f64 = d.iter().zip(xi).map(|(a, b)| a * b).sum();
        let t = t - t.round();
        if t == 0.0 {
            acc.re += 1.0;
        } else {
            let (sin, cos) = (2.0 * PI * t).sin_cos();
            acc += Complex64::new(cos, sin);
        }
    }
    acc / digits.len() as f64
}

/// Inner products ⟨ξ,d⟩ reduced exactly into [0,1).
fn phases(d: &DigitSet, xi: &RationalVector) -> Vec<Rational> {
    d.iter()
        .map(|digit| {
            let t = xi.dot_int(digit);
            &t - t.floor()
        })
        .collect()
}

/// Mask value at a rational point; the phase is reduced mod 1 exactly
/// before conversion, so integer shifts of ξ give identical results.
pub fn mask_eval_exact(d: &DigitSet, xi: &RationalVector) -> Result<Complex64> {
    check_dim(d, xi.dim())?;
    let mut acc = Complex64::new(0.0, 0.0);
    for t in phases(d, xi) {
        acc += Complex64::from_polar(1.0, 2.0 * PI * rational_to_f64(&t));
    }
    Ok(acc / d.len() as f64)
}

/// Whether `m_D(ξ) = 0` exactly.
pub fn mask_vanishes_exact(d: &DigitSet, xi: &RationalVector) -> Result<bool> {
    check_dim(d, xi.dim())?;
    let ph = phases(d, xi);
    let q = ph.iter().fold(BigInt::from(1), |acc, t| acc.lcm(t.denom()));
    let exps: Vec<BigInt> = ph.iter().map(|t| t.numer() * (&q / t.denom())).collect();
    vanishing_root_sum(&exps, &q)
        .ok_or_else(|| Error::ModelViolation(format!("denominator {q} too large to factor")))
}

fn require_model(d: &DigitSet, m: u64) -> Result<()> {
    if d.len() as u64 != m {
        return Err(Error::ModelViolation(format!(
            "digit set has {} elements, expected m = {m}",
            d.len()
        )));
    }
    if !is_prime(m) {
        return Err(Error::ModelViolation(format!("m = {m} is not prime")));
    }
    Ok(())
}

pub fn is_prime(m: u64) -> bool {
    m >= 2 && (2..).take_while(|p| p * p <= m).all(|p| !m.is_multiple_of(p))
}

/// ⟨d,ν⟩ mod m hits every residue class exactly once.
pub fn residue_vanishing_test(d: &DigitSet, nu: &IntVector, m: u64) -> Result<bool> {
    require_model(d, m)?;
    check_dim(d, nu.dim())?;
    let mb = BigInt::from(m);
    let mut seen = vec![false; m as usize];
    for digit in d.iter() {
        let r = digit.dot(nu).mod_floor(&mb).to_usize().expect("residue < m");
        if seen[r] {
            return Ok(false);
        }
        seen[r] = true;
    }
    Ok(true)
}

/// All zero directions of `m_D`, one canonical representative per class
/// (leading nonzero entry 1), in lexicographic order.
pub fn find_zero_directions(d: &DigitSet, m: u64) -> Result<ZeroStructure> {
    require_model(d, m)?;
    let n = d.dim();
    let mut directions = Vec::new();
    for lead in 0..n {
        let free = n - lead - 1;
        let count = (m as u128).pow(free as u32);
        for code in 0..count {
            let mut nu = vec![0i64; n];
            nu[lead] = 1;
            let mut c = code;
            for slot in (lead + 1..n).rev() {
                nu[slot] = (c % m as u128) as i64;
                c /= m as u128;
            }
            let nu = IntVector::from_i64s(&nu);
            if residue_vanishing_test(d, &nu, m)? {
                let model_compliant = nu.0.iter().all(|x| !x.is_zero());
                directions.push(ZeroDirection { nu, model_compliant });
            }
        }
    }
    directions.sort_by(|a, b| a.nu.cmp(&b.nu));
    Ok(ZeroStructure {
        prime: m,
        directions,
    })
}

/// Periodic ℓ∞ distance from x to the coset o + ℤⁿ.
fn periodic_distance(x: &[f64], o: &[f64]) -> f64 {
    x.iter()
        .zip(o)
        .map(|(a, b)| {
            let t = a - b;
            (t - t.round()).abs()
        })
        .fold(0.0, f64::max)
}

/// Sampling falsifier for "the claimed cosets are all the zeros": scans a
/// `grid`ⁿ lattice of [0,1)ⁿ away from the claimed cosets and flags any
/// point where `|m_D| < tol`.
pub fn verify_zero_exactness(
    d: &DigitSet,
    z: &ZeroStructure,
    grid: usize,
    tol: f64,
) -> Result<VerificationReport> {
    if grid < 8 {
        return Err(Error::InvalidParameter(format!("grid must be at least 8, got {grid}")));
    }
    let n = d.dim();
    let digits = d.as_f64();
    let offsets: Vec<Vec<f64>> = z.offsets().iter().map(RationalVector::to_f64).collect();
    let total = grid
        .checked_pow(n as u32)
        .ok_or_else(|| Error::InvalidParameter("grid too large".into()))?;
    let mut min_modulus = f64::INFINITY;
    let mut witnesses = Vec::new();
    let mut sampled = 0usize;
    let mut point = vec![0.0; n];
    for code in 0..total {
        let mut c = code;
        for x in point.iter_mut().rev() {
            *x = (c % grid) as f64 / grid as f64;
            c /= grid;
        }
        if offsets.iter().any(|o| periodic_distance(&point, o) < tol) {
            continue;
        }
        sampled += 1;
        let v = mask_eval_f64(&digits, &point).norm();
        min_modulus = min_modulus.min(v);
        if v < tol {
            witnesses.push(Witness::Point {
                point: point.clone(),
                value: v,
            });
        }
    }
    Ok(VerificationReport::new(ReportKind::Exactness, witnesses)
        .margin("min_modulus", min_modulus)
        .margin("samples", sampled as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    pub(crate) fn sierpinski() -> DigitSet {
        DigitSet::from_vecs(&[vec![0, 0], vec![1, 0], vec![0, 1]]).unwrap()
    }

    fn b(rows: &[[i64; 2]]) -> DigitSet {
        DigitSet::from_vecs(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn b1() -> DigitSet {
        b(&[[0, 0], [1, 0], [0, 1], [1, 1], [3, 3]])
    }
    fn b2() -> DigitSet {
        b(&[[0, 0], [1, 0], [0, -1], [1, -1], [3, -3]])
    }
    fn b3() -> DigitSet {
        b(&[[0, 0], [1, 0], [1, 1], [2, 1], [2, 2]])
    }

    fn nus(z: &ZeroStructure) -> Vec<Vec<i64>> {
        z.nus()
            .map(|v| v.0.iter().map(|x| x.to_i64().unwrap()).collect())
            .collect()
    }

    #[test]
    fn sierpinski_mask_vanishes_at_third_points() {
        let xi = RationalVector::from_ratios(&[(1, 3), (2, 3)]);
        assert!(mask_eval_exact(&sierpinski(), &xi).unwrap().norm() < 1e-15);
        assert!(mask_vanishes_exact(&sierpinski(), &xi).unwrap());
        assert!(mask_eval(&sierpinski(), &[1.0 / 3.0, 2.0 / 3.0]).unwrap().norm() < 1e-12);
    }

    #[test]
    fn mask_at_origin_is_one() {
        let v = mask_eval(&b1(), &[0.0, 0.0]).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mask_direct_sum() {
        let d = DigitSet::from_vecs(&[vec![0], vec![1], vec![2]]).unwrap();
        let v = mask_eval_exact(&d, &RationalVector(vec![rat(1, 2)])).unwrap();
        assert!((v - Complex64::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            mask_eval(&sierpinski(), &[0.5]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn duplicate_digits_rejected() {
        assert!(DigitSet::from_vecs(&[vec![0, 0], vec![0, 0]]).is_err());
    }

    #[test]
    fn residue_tests() {
        let nu = IntVector::from_i64s(&[1, 2]);
        assert!(residue_vanishing_test(&sierpinski(), &nu, 3).unwrap());
        let one = IntVector::from_i64s(&[1, 1]);
        assert!(residue_vanishing_test(&b3(), &one, 5).unwrap());
        assert!(!residue_vanishing_test(&b1(), &one, 5).unwrap());
        assert!(matches!(
            residue_vanishing_test(&b1(), &one, 3),
            Err(Error::ModelViolation(_))
        ));
    }

    #[test]
    fn zero_directions_of_fixtures() {
        let d = DigitSet::from_vecs(&[vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(nus(&find_zero_directions(&d, 3).unwrap()), vec![vec![1]]);
        assert_eq!(nus(&find_zero_directions(&sierpinski(), 3).unwrap()), vec![vec![1, 2]]);
        assert_eq!(nus(&find_zero_directions(&b1(), 5).unwrap()), vec![vec![1, 2], vec![1, 3]]);
        assert_eq!(nus(&find_zero_directions(&b2(), 5).unwrap()), vec![vec![1, 2], vec![1, 3]]);
        assert_eq!(nus(&find_zero_directions(&b3(), 5).unwrap()), vec![vec![1, 1]]);
    }

    #[test]
    fn model_compliance_flag() {
        // ν = (1,0) only: the zero cosets are x₁ ∈ {1/3, 2/3}
        let d = DigitSet::from_vecs(&[vec![0, 0], vec![1, 0], vec![2, 5]]).unwrap();
        let z = find_zero_directions(&d, 3).unwrap();
        assert_eq!(nus(&z), vec![vec![1, 0]]);
        assert!(!z.directions[0].model_compliant);
        let z = find_zero_directions(&sierpinski(), 3).unwrap();
        assert!(z.directions[0].model_compliant);
    }

    #[test]
    fn coset_membership() {
        let z = find_zero_directions(&sierpinski(), 3).unwrap();
        assert!(z.contains(&RationalVector::from_ratios(&[(1, 3), (2, 3)])));
        assert!(z.contains(&RationalVector::from_ratios(&[(2, 3), (4, 3)])));
        assert!(z.contains(&RationalVector::from_ratios(&[(-5, 3), (2, 3)])));
        assert!(!z.contains(&RationalVector::from_ratios(&[(1, 3), (1, 3)])));
        assert!(!z.contains(&RationalVector::from_ratios(&[(1, 1), (0, 1)])));
        assert!(!z.contains(&RationalVector::from_ratios(&[(1, 6), (1, 3)])));
    }

    #[test]
    fn exactness_sampling() {
        let z = find_zero_directions(&sierpinski(), 3).unwrap();
        assert!(verify_zero_exactness(&sierpinski(), &z, 64, 1e-3).unwrap().pass);
        let z2 = find_zero_directions(&b2(), 5).unwrap();
        assert!(verify_zero_exactness(&b2(), &z2, 64, 1e-3).unwrap().pass);
        let d = DigitSet::from_vecs(&[vec![0], vec![2]]).unwrap();
        let report = verify_zero_exactness(&d, &ZeroStructure::empty(2), 64, 1e-3).unwrap();
        assert!(!report.pass);
        let near_quarter = report.witnesses.iter().any(|w| match w {
            Witness::Point { point, .. } => (point[0] - 0.25).abs() < 1e-9,
            _ => false,
        });
        assert!(near_quarter);
        assert!(verify_zero_exactness(&d, &ZeroStructure::empty(2), 4, 1e-3).is_err());
    }
}
