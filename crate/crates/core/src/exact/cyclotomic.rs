//! Exact vanishing test for sums of roots of unity.
//!
//! A sum Σ cₑ ζ_qᵉ with integer coefficients is zero iff the polynomial
//! Σ cₑ xᵉ is divisible by Φ_q. Rather than forming Φ_q (whose degree is
//! φ(q) and can be large), we peel primes off q using the tower
//! ℚ(ζ_q) ⊃ ℚ(ζ_{q/p}) and recurse on the coefficient multiset:
//!
//! * if p² | q, the powers 1, ζ_q, …, ζ_q^{p−1} are a basis over ℚ(ζ_{q/p}),
//!   so the sum splits by exponent residue mod p;
//! * if p ∥ q, CRT writes ζ_qᵉ = ζ_p^{a} ζ_{q/p}^{b} and the only ℚ(ζ_{q/p})-linear
//!   relation among ζ_p⁰, …, ζ_p^{p−1} is their sum, so all p residue
//!   classes must carry the same partial sum.
//!
//! Work is proportional to the number of terms, not to q.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

type Terms = BTreeMap<u64, i64>;

/// True iff Σ_{p ∈ exponents} e^{2πi p/q} = 0 exactly.
///
/// # Panics
/// If `q == 0`.
pub fn cyclotomic_vanishes(exponents: &[i64], q: u64) -> bool {
    assert!(q >= 1, "modulus must be positive");
    let qi = q as i128;
    let mut terms = Terms::new();
    for &e in exponents {
        let r = (e as i128).rem_euclid(qi) as u64;
        *terms.entry(r).or_insert(0) += 1;
    }
    vanishes(terms, q)
}

/// Same test for big-integer exponents. Returns `None` when the modulus,
/// after removing common factors, does not fit in 64 bits.
pub fn vanishing_root_sum(exponents: &[BigInt], q: &BigInt) -> Option<bool> {
    if exponents.is_empty() {
        return Some(true);
    }
    // Multiplying by ζ^{-e₀} does not change whether the sum vanishes; after
    // the shift every exponent shares the factor g = gcd(q, eᵢ − e₀).
    let e0 = &exponents[0];
    let mut g = q.clone();
    let shifted: Vec<BigInt> = exponents
        .iter()
        .map(|e| (e - e0).mod_floor(q))
        .collect();
    for s in &shifted {
        g = g.gcd(s);
    }
    let q_red = (q / &g).to_u64()?;
    let mut terms = Terms::new();
    for s in &shifted {
        let r = (s / &g).to_u64()?;
        *terms.entry(r).or_insert(0) += 1;
    }
    Some(vanishes(terms, q_red))
}

fn smallest_prime_factor(q: u64) -> u64 {
    if q.is_multiple_of(2) {
        return 2;
    }
    let mut p = 3u64;
    while p.saturating_mul(p) <= q {
        if q.is_multiple_of(p) {
            return p;
        }
        p += 2;
    }
    q
}

fn vanishes(mut terms: Terms, q: u64) -> bool {
    terms.retain(|_, c| *c != 0);
    if terms.is_empty() {
        return true;
    }
    if q == 1 {
        return terms.values().sum::<i64>() == 0;
    }
    let p = smallest_prime_factor(q);
    let rest = q / p;
    if rest.is_multiple_of(p) {
        // ζ_qᵉ = ζ_q^{e mod p} · ζ_{q/p}^{e div p}
        let mut groups: BTreeMap<u64, Terms> = BTreeMap::new();
        for (e, c) in terms {
            *groups.entry(e % p).or_default().entry(e / p).or_insert(0) += c;
        }
        groups.into_values().all(|g| vanishes(g, rest))
    } else {
        // 1/q = u/p + v/rest with u·rest + v·p = 1
        let ext = (rest as i128).extended_gcd(&(p as i128));
        debug_assert_eq!(ext.gcd, 1);
        let u = ext.x.rem_euclid(p as i128) as u128;
        let v = ext.y.rem_euclid(rest as i128) as u128;
        let mut groups: BTreeMap<u64, Terms> = BTreeMap::new();
        for (e, c) in terms {
            let a = ((e as u128 * u) % p as u128) as u64;
            let b = ((e as u128 * v) % rest as u128) as u64;
            *groups.entry(a).or_default().entry(b).or_insert(0) += c;
        }
        if (groups.len() as u64) < p {
            // Some class is empty, so every class must sum to zero.
            return groups.into_values().all(|g| vanishes(g, rest));
        }
        let base = groups.remove(&0).unwrap_or_default();
        groups.into_values().all(|g| {
            let mut diff = g;
            for (e, c) in &base {
                *diff.entry(*e).or_insert(0) -= c;
            }
            vanishes(diff, rest)
        })
    }
}
