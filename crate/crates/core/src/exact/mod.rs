//! Exact integer and rational linear algebra.
//!
//! Everything here is arbitrary precision: entries are `BigInt` or
//! `BigRational`, so inverses, products and congruence tests carry no
//! rounding. Matrices are square and small (the ambient dimension), stored
//! row-major.

mod cyclotomic;
mod norm;

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub use cyclotomic::{cyclotomic_vanishes, vanishing_root_sum};
pub use norm::{check_contraction, frobenius_norm_upper, operator_norm_upper};

pub type Rational = BigRational;

/// Builds a rational from a numerator/denominator pair of machine integers.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"`, `"p"` or a decimal such as `"0.125"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let negative = int.trim_start().starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let scale = BigInt::from(10u32).pow(frac.len() as u32);
        let frac_part: BigInt = frac.parse().map_err(|_| bad())?;
        let mut value = Rational::from_integer(int_part.abs()) + Rational::new(frac_part, scale);
        if negative {
            value = -value;
        }
        return Ok(value);
    }
    let p: BigInt = t.parse().map_err(|_| bad())?;
    Ok(Rational::from_integer(p))
}

pub fn rational_to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Huge numerator or denominator: fall back to a scaled division.
        let n = x.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = x.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

/// Ceiling of a rational as an integer.
pub fn ceil_rational(x: &Rational) -> BigInt {
    x.ceil().to_integer()
}

fn fmt_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// An integer vector.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntVector(pub Vec<BigInt>);

impl IntVector {
    pub fn from_i64s(values: &[i64]) -> Self {
        IntVector(values.iter().map(|&v| BigInt::from(v)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        IntVector(vec![BigInt::zero(); n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn dot(&self, other: &IntVector) -> BigInt {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, k: &BigInt) -> IntVector {
        IntVector(self.0.iter().map(|a| a * k).collect())
    }

    /// Componentwise residues in `[0, m)`.
    pub fn mod_floor(&self, m: &BigInt) -> IntVector {
        IntVector(self.0.iter().map(|a| a.mod_floor(m)).collect())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(|a| a.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn to_rational(&self) -> RationalVector {
        RationalVector(self.0.iter().map(|a| Rational::from_integer(a.clone())).collect())
    }

    pub fn norm_sq(&self) -> BigInt {
        self.0.iter().map(|a| a * a).sum()
    }

    /// Negation lifted to a canonical sign: returns whichever of `v`, `-v`
    /// is lexicographically larger.
    pub fn sign_canonical(&self) -> IntVector {
        let neg = -self;
        if neg > *self {
            neg
        } else {
            self.clone()
        }
    }
}

impl fmt::Debug for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for IntVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let values: Vec<serde_json::Value> = self
            .0
            .iter()
            .map(|a| match a.to_i64() {
                Some(v) => serde_json::Value::from(v),
                None => serde_json::Value::from(a.to_string()),
            })
            .collect();
        values.serialize(s)
    }
}

impl<'a> Add<&'a IntVector> for &'a IntVector {
    type Output = IntVector;
    fn add(self, rhs: &IntVector) -> IntVector {
        IntVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl<'a> Sub<&'a IntVector> for &'a IntVector {
    type Output = IntVector;
    fn sub(self, rhs: &IntVector) -> IntVector {
        IntVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &IntVector {
    type Output = IntVector;
    fn neg(self) -> IntVector {
        IntVector(self.0.iter().map(|a| -a).collect())
    }
}

/// A rational vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RationalVector(pub Vec<Rational>);

impl RationalVector {
    pub fn from_ratios(values: &[(i64, i64)]) -> Self {
        RationalVector(values.iter().map(|&(p, q)| rat(p, q)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        RationalVector(vec![Rational::zero(); n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|x| x.is_integer())
    }

    /// The integer vector, if every entry is an integer.
    pub fn to_integral(&self) -> Option<IntVector> {
        if self.is_integral() {
            Some(IntVector(self.0.iter().map(|x| x.to_integer()).collect()))
        } else {
            None
        }
    }

    pub fn scale(&self, k: &Rational) -> RationalVector {
        RationalVector(self.0.iter().map(|a| a * k).collect())
    }

    pub fn dot_int(&self, v: &IntVector) -> Rational {
        self.0
            .iter()
            .zip(&v.0)
            .map(|(a, b)| a * Rational::from_integer(b.clone()))
            .sum()
    }

    pub fn dot(&self, v: &RationalVector) -> Rational {
        self.0.iter().zip(&v.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> Rational {
        self.0.iter().map(|a| a * a).sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> Rational {
        self.0.iter().map(|a| a.abs()).max().unwrap_or_else(Rational::zero)
    }

    /// Least common denominator of all entries.
    pub fn common_denominator(&self) -> BigInt {
        self.0
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(rational_to_f64).collect()
    }
}

impl fmt::Debug for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", fmt_rational(a))?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for RationalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for RationalVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let values: Vec<serde_json::Value> = self
            .0
            .iter()
            .map(|a| match (a.is_integer(), a.numer().to_i64()) {
                (true, Some(v)) => serde_json::Value::from(v),
                _ => serde_json::Value::from(fmt_rational(a)),
            })
            .collect();
        values.serialize(s)
    }
}

impl<'a> Add<&'a RationalVector> for &'a RationalVector {
    type Output = RationalVector;
    fn add(self, rhs: &RationalVector) -> RationalVector {
        RationalVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl<'a> Sub<&'a RationalVector> for &'a RationalVector {
    type Output = RationalVector;
    fn sub(self, rhs: &RationalVector) -> RationalVector {
        RationalVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

/// Square integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    n: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(n: usize, entries: Vec<BigInt>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        Ok(IntMatrix { n, entries })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            entries.extend(row.iter().map(|&v| BigInt::from(v)));
        }
        Ok(IntMatrix { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, 1)
    }

    pub fn scalar(n: usize, k: i64) -> Self {
        Self::diagonal(&vec![k; n])
    }

    pub fn diagonal(diag: &[i64]) -> Self {
        let n = diag.len();
        let mut entries = vec![BigInt::zero(); n * n];
        for (i, &d) in diag.iter().enumerate() {
            entries[i * n + i] = BigInt::from(d);
        }
        IntMatrix { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> IntMatrix {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(self.get(j, i).clone());
            }
        }
        IntMatrix { n, entries }
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push((0..n).map(|k| self.get(i, k) * other.get(k, j)).sum());
            }
        }
        IntMatrix { n, entries }
    }

    pub fn mul_vec(&self, v: &IntVector) -> IntVector {
        IntVector(
            (0..self.n)
                .map(|i| self.row(i).iter().zip(&v.0).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        let n = self.n;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.entries.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k * n + k].is_zero() {
                match (k + 1..n).find(|&i| !a[i * n + k].is_zero()) {
                    Some(i) => {
                        for j in 0..n {
                            a.swap(k * n + j, i * n + j);
                        }
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                    a[i * n + j] = v / &prev;
                }
            }
            prev = a[k * n + k].clone();
        }
        sign * &a[n * n - 1]
    }

    /// Classical adjugate: `adj(M) · M = det(M) · I`.
    pub fn adjugate(&self) -> IntMatrix {
        let n = self.n;
        if n == 1 {
            return IntMatrix::identity(1);
        }
        let mut entries = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut minor = Vec::with_capacity((n - 1) * (n - 1));
                for r in (0..n).filter(|&r| r != i) {
                    for c in (0..n).filter(|&c| c != j) {
                        minor.push(self.get(r, c).clone());
                    }
                }
                let cof = IntMatrix {
                    n: n - 1,
                    entries: minor,
                }
                .det();
                // adj = transpose of the cofactor matrix
                entries[j * n + i] = if (i + j) % 2 == 0 { cof } else { -cof };
            }
        }
        IntMatrix { n, entries }
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j).is_zero()))
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j).is_zero()))
    }

    pub fn diag(&self) -> Vec<BigInt> {
        (0..self.n).map(|i| self.get(i, i).clone()).collect()
    }

    pub fn to_rational(&self) -> RationalMatrix {
        RationalMatrix {
            n: self.n,
            entries: self
                .entries
                .iter()
                .map(|a| Rational::from_integer(a.clone()))
                .collect(),
        }
    }

    pub fn to_rows_i64(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|a| a.to_i64()).collect())
            .collect()
    }

    /// Whether `v` lies in the lattice `M ℤⁿ`.
    pub fn lattice_contains(&self, v: &IntVector) -> Result<bool> {
        let det = self.det();
        if det.is_zero() {
            return Err(Error::SingularMatrix);
        }
        let w = self.adjugate().mul_vec(v);
        Ok(w.0.iter().all(|x| x.is_multiple_of(&det)))
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, ";")?;
            }
            for (j, a) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{a}")?;
            }
        }
        write!(f, "]")
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<IntVector> = (0..self.n).map(|i| IntVector(self.row(i).to_vec())).collect();
        rows.serialize(s)
    }
}

/// Square rational matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    n: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn new(n: usize, entries: Vec<Rational>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        Ok(RationalMatrix { n, entries })
    }

    pub fn from_ratios(rows: &[Vec<(i64, i64)>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            entries.extend(row.iter().map(|&(p, q)| rat(p, q)));
        }
        Ok(RationalMatrix { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        IntMatrix::identity(n).to_rational()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.n + j]
    }

    pub fn transpose(&self) -> RationalMatrix {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(self.get(j, i).clone());
            }
        }
        RationalMatrix { n, entries }
    }

    pub fn mul(&self, other: &RationalMatrix) -> RationalMatrix {
        let n = self.n;
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push((0..n).map(|k| self.get(i, k) * other.get(k, j)).sum());
            }
        }
        RationalMatrix { n, entries }
    }

    pub fn mul_vec(&self, v: &RationalVector) -> RationalVector {
        RationalVector(
            (0..self.n)
                .map(|i| (0..self.n).map(|j| self.get(i, j) * &v.0[j]).sum())
                .collect(),
        )
    }

    pub fn mul_int_vec(&self, v: &IntVector) -> RationalVector {
        RationalVector(
            (0..self.n)
                .map(|i| {
                    (0..self.n)
                        .map(|j| self.get(i, j) * Rational::from_integer(v.0[j].clone()))
                        .sum()
                })
                .collect(),
        )
    }

    pub fn scale(&self, k: &Rational) -> RationalMatrix {
        RationalMatrix {
            n: self.n,
            entries: self.entries.iter().map(|a| a * k).collect(),
        }
    }

    pub fn frobenius_sq(&self) -> Rational {
        self.entries.iter().map(|a| a * a).sum()
    }

    /// Row sums of absolute values: the half-widths of the image of `[-1,1]ⁿ`.
    pub fn abs_row_sums(&self) -> Vec<Rational> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).abs()).sum())
            .collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(rational_to_f64).collect()
    }

    pub fn is_identity(&self) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                let e = self.get(i, j);
                if i == j {
                    e.is_one()
                } else {
                    e.is_zero()
                }
            })
        })
    }

    /// The integer matrix, if every entry is an integer.
    pub fn to_integral(&self) -> Option<IntMatrix> {
        if self.entries.iter().all(|x| x.is_integer()) {
            Some(IntMatrix {
                n: self.n,
                entries: self.entries.iter().map(|x| x.to_integer()).collect(),
            })
        } else {
            None
        }
    }
}

impl fmt::Debug for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, ";")?;
            }
            for j in 0..self.n {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", fmt_rational(self.get(i, j)))?;
            }
        }
        write!(f, "]")
    }
}

/// Exact inverse by Gauss-Jordan elimination over ℚ.
pub fn rational_inverse(m: &IntMatrix) -> Result<RationalMatrix> {
    rational_inverse_of(&m.to_rational())
}

pub fn rational_inverse_of(m: &RationalMatrix) -> Result<RationalMatrix> {
    let n = m.n;
    let mut a = m.entries.clone();
    let mut inv = RationalMatrix::identity(n).entries;
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r * n + col].is_zero())
            .ok_or(Error::SingularMatrix)?;
        if pivot != col {
            for j in 0..n {
                a.swap(pivot * n + j, col * n + j);
                inv.swap(pivot * n + j, col * n + j);
            }
        }
        let p = a[col * n + col].clone();
        for j in 0..n {
            a[col * n + j] /= &p;
            inv[col * n + j] /= &p;
        }
        for r in 0..n {
            if r == col || a[r * n + col].is_zero() {
                continue;
            }
            let factor = a[r * n + col].clone();
            for j in 0..n {
                let da = &factor * &a[col * n + j];
                a[r * n + j] -= da;
                let di = &factor * &inv[col * n + j];
                inv[r * n + j] -= di;
            }
        }
    }
    Ok(RationalMatrix { n, entries: inv })
}

/// Integer-only inverse representation `M⁻¹ = adj / det`, with `det > 0`.
///
/// Used on hot paths where a shared denominator avoids per-entry gcds.
#[derive(Clone, Debug)]
pub struct ScaledInverse {
    pub adj: IntMatrix,
    pub det: BigInt,
}

impl ScaledInverse {
    pub fn of(m: &IntMatrix) -> Result<Self> {
        let det = m.det();
        if det.is_zero() {
            return Err(Error::SingularMatrix);
        }
        let adj = m.adjugate();
        if det.is_negative() {
            let neg = IntMatrix {
                n: adj.n,
                entries: adj.entries.iter().map(|a| -a).collect(),
            };
            Ok(ScaledInverse { adj: neg, det: -det })
        } else {
            Ok(ScaledInverse { adj, det })
        }
    }
}
