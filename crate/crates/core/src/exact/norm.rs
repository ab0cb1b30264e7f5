//! Certified upper bounds on the Euclidean operator norm.

use num_traits::{Signed, Zero};

use super::{rational_inverse, rational_to_f64, IntMatrix, Rational, RationalMatrix};
use crate::error::Result;

/// Upper bound on `‖M‖₂` from the Frobenius norm, rounded outward.
pub fn frobenius_norm_upper(m: &RationalMatrix) -> f64 {
    let f = rational_to_f64(&m.frobenius_sq()).sqrt();
    f * (1.0 + 4.0 * f64::EPSILON)
}

/// Certified upper bound on `sup ‖Mx‖/‖x‖`, never above the Frobenius norm.
///
/// A power-iteration estimate θ of λ_max(MᵀM) is inflated to b and then
/// checked: `bI − MᵀM` positive definite in exact rationals proves `‖M‖² < b`.
pub fn operator_norm_upper(m: &RationalMatrix) -> f64 {
    let frob = frobenius_norm_upper(m);
    let gram = m.transpose().mul(m);
    let n = gram.dim();
    if (0..n).all(|i| (0..n).all(|j| i == j || gram.get(i, j).is_zero())) {
        // orthogonal columns: the norm is the largest column length
        let top = (0..n).map(|i| gram.get(i, i).clone()).max().unwrap_or_else(Rational::zero);
        return (rational_to_f64(&top).sqrt() * (1.0 + 4.0 * f64::EPSILON)).min(frob);
    }
    let theta = power_iteration(&gram);
    for slack in [1e-6, 1e-4, 1e-2, 1e-1] {
        let b = theta * (1.0 + slack) + f64::MIN_POSITIVE;
        let Some(b_exact) = Rational::from_float(b) else {
            break;
        };
        if positive_definite(&shift(&gram, &b_exact)) {
            // sqrt is correctly rounded; one ulp of headroom covers it
            let bound = b.sqrt() * (1.0 + 2.0 * f64::EPSILON);
            return bound.min(frob);
        }
    }
    frob
}

/// True iff `‖M⁻¹‖₂ ≤ r`, decided exactly: `r²I − M⁻ᵗM⁻¹` must be positive
/// semidefinite, with `r` read as the exact binary value of the float.
pub fn check_contraction(m: &IntMatrix, r: f64) -> Result<bool> {
    let inv = rational_inverse(m)?;
    if !(r.is_finite() && r > 0.0) {
        return Ok(false);
    }
    let r_exact = Rational::from_float(r).expect("finite float");
    let gram = inv.transpose().mul(&inv);
    Ok(positive_semidefinite(&shift(&gram, &(&r_exact * &r_exact))))
}

/// `bI − G`.
fn shift(g: &RationalMatrix, b: &Rational) -> RationalMatrix {
    let n = g.dim();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let diag = if i == j { b.clone() } else { Rational::zero() };
            let e = g.get(i, j);
            entries.push(diag - e);
        }
    }
    RationalMatrix::new(n, entries).expect("square")
}

fn power_iteration(g: &RationalMatrix) -> f64 {
    let n = g.dim();
    let a = g.to_f64();
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
    let mut theta = 0.0;
    for _ in 0..500 {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let w: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| a[i * n + j] * v[j]).sum())
            .collect();
        let next: f64 = v.iter().zip(&w).map(|(x, y)| x * y).sum();
        let done = (next - theta).abs() <= 1e-15 * next.abs();
        theta = next;
        v = w;
        if done {
            break;
        }
    }
    theta.max(0.0)
}

fn det(a: &RationalMatrix, idx: &[usize]) -> Rational {
    let k = idx.len();
    let mut m: Vec<Rational> = idx
        .iter()
        .flat_map(|&i| idx.iter().map(move |&j| (i, j)))
        .map(|(i, j)| a.get(i, j).clone())
        .collect();
    let mut det = Rational::from_integer(1.into());
    for c in 0..k {
        let Some(p) = (c..k).find(|&r| !m[r * k + c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            for j in 0..k {
                m.swap(p * k + j, c * k + j);
            }
            det = -det;
        }
        let pivot = m[c * k + c].clone();
        det *= &pivot;
        for r in c + 1..k {
            let f = &m[r * k + c] / &pivot;
            if f.is_zero() {
                continue;
            }
            for j in c..k {
                let d = &f * &m[c * k + j];
                m[r * k + j] -= d;
            }
        }
    }
    det
}

/// Sylvester: all leading principal minors positive.
fn positive_definite(a: &RationalMatrix) -> bool {
    let n = a.dim();
    let idx: Vec<usize> = (0..n).collect();
    (1..=n).all(|k| det(a, &idx[..k]).is_positive())
}

/// All principal minors nonnegative.
fn positive_semidefinite(a: &RationalMatrix) -> bool {
    let n = a.dim();
    (1u32..(1u32 << n)).all(|mask| {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        !det(a, &idx).is_negative()
    })
}
