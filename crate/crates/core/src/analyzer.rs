//! Fourier-side checks: truncated transforms with tail bounds, exact
//! zero-set membership, orthogonality of candidate spectra and sampled
//! completeness via the Q-function.

use std::collections::HashSet;
use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{
    rational_inverse, IntMatrix, IntVector, RationalMatrix, RationalVector, ScaledInverse,
};
use crate::mask::{mask_eval_exact, mask_eval_f64, mask_vanishes_exact};
use crate::report::{ReportKind, VerificationReport, Witness};
use crate::spectrum::SpectrumLevel;
use crate::system::MoranSystem;

/// Partial product of the first N factors of μ̂.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncatedTransform {
    pub level: usize,
    pub value: Complex64,
    /// Bound on |μ̂(ξ) − value|.
    pub tail_bound: f64,
    /// Every remaining factor is within 1/2 of 1, so the partial product
    /// is a faithful proxy; otherwise it is an uncertified partial product.
    pub certified: bool,
    /// A factor vanished exactly.
    pub exact_zero: bool,
}

/// Tail of the product past level N: with A = 2πs c² ‖η_N‖ r/(1−r),
/// |Π_{k>N} m_{D_k}(η_k) − 1| ≤ e^A − 1.
fn tail_factor(eta_norm: f64, s: f64, c: f64, r: f64) -> (f64, bool) {
    let step = 2.0 * PI * s * c * c * eta_norm * r;
    let a = step / (1.0 - r);
    (a.exp_m1(), step <= 0.5)
}

/// Cumulative inverse-transpose products (R₁ᵗ⋯Rₖᵗ)⁻¹ in floating point,
/// computed exactly first and rounded once.
#[derive(Clone, Debug)]
pub struct TransformTable {
    n: usize,
    maps: Vec<Vec<f64>>,
    digits: Vec<Vec<Vec<f64>>>,
    s: f64,
    c: f64,
    r: f64,
}

impl TransformTable {
    pub fn new(system: &MoranSystem, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidParameter("depth must be at least 1".into()));
        }
        let n = system.dim();
        let inv_t = inverse_transposes(system)?;
        let mut acc = RationalMatrix::identity(n);
        let mut maps = Vec::with_capacity(depth);
        let mut digits = Vec::with_capacity(depth);
        for k in 1..=depth {
            acc = inv_t[system.level_slot(k)].mul(&acc);
            maps.push(acc.to_f64());
            digits.push(system.level(k).digits.as_f64());
        }
        let p = system.params();
        Ok(TransformTable {
            n,
            maps,
            digits,
            s: system.digit_bound(),
            c: p.c,
            r: p.r,
        })
    }

    pub fn depth(&self) -> usize {
        self.maps.len()
    }

    fn eta_into(&self, k: usize, xi: &[f64], out: &mut [f64]) {
        let a = &self.maps[k];
        let n = self.n;
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..n).map(|j| a[i * n + j] * xi[j]).sum();
        }
    }

    /// Product of the first `depth` factors (no tail).
    pub fn partial(&self, xi: &[f64]) -> Complex64 {
        self.partial_with(xi, &mut vec![0.0; self.n])
    }

    fn partial_with(&self, xi: &[f64], buf: &mut [f64]) -> Complex64 {
        let mut value = Complex64::one();
        for k in 0..self.maps.len() {
            self.eta_into(k, xi, buf);
            value *= mask_eval_f64(&self.digits[k], buf);
            if value == Complex64::zero() {
                break;
            }
        }
        value
    }

    pub fn eval(&self, xi: &[f64]) -> TruncatedTransform {
        self.eval_with(xi, &mut vec![0.0; self.n])
    }

    /// `eval` with caller-provided scratch of length n.
    fn eval_with(&self, xi: &[f64], buf: &mut [f64]) -> TruncatedTransform {
        let value = self.partial_with(xi, buf);
        self.eta_into(self.maps.len() - 1, xi, buf);
        let norm = buf.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (t, certified) = tail_factor(norm, self.s, self.c, self.r);
        TruncatedTransform {
            level: self.maps.len(),
            value,
            tail_bound: value.norm() * t,
            certified,
            exact_zero: false,
        }
    }
}

fn inverse_transposes(system: &MoranSystem) -> Result<Vec<RationalMatrix>> {
    system
        .stored_levels()
        .map(|l| rational_inverse(&l.matrix.transpose()))
        .collect()
}

/// μ̂ truncated after N levels, floating path.
pub fn muhat_truncated(system: &MoranSystem, xi: &[f64], n: usize) -> Result<TruncatedTransform> {
    if xi.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: xi.len(),
        });
    }
    Ok(TransformTable::new(system, n)?.eval(xi))
}

/// μ̂ truncated after N levels with exact iterates; a factor that vanishes
/// exactly makes the whole transform zero with no tail.
pub fn muhat_truncated_exact(
    system: &MoranSystem,
    xi: &RationalVector,
    n: usize,
) -> Result<TruncatedTransform> {
    if n == 0 {
        return Err(Error::InvalidParameter("depth must be at least 1".into()));
    }
    let inv_t = inverse_transposes(system)?;
    let mut eta = xi.clone();
    let mut value = Complex64::one();
    for k in 1..=n {
        eta = inv_t[system.level_slot(k)].mul_vec(&eta);
        let digits = &system.level(k).digits;
        if mask_vanishes_exact(digits, &eta)? {
            return Ok(TruncatedTransform {
                level: n,
                value: Complex64::zero(),
                tail_bound: 0.0,
                certified: true,
                exact_zero: true,
            });
        }
        value *= mask_eval_exact(digits, &eta)?;
    }
    let norm = eta.to_f64().iter().map(|x| x * x).sum::<f64>().sqrt();
    let p = system.params();
    let (t, certified) = tail_factor(norm, system.digit_bound(), p.c, p.r);
    Ok(TruncatedTransform {
        level: n,
        value,
        tail_bound: value.norm() * t,
        certified,
        exact_zero: false,
    })
}

/// Exact membership in Z(μ̂) = ⋃ₖ (R₁ᵗ⋯Rₖᵗ) Z(m_{Dₖ}) for integer or
/// rational points, with the prefix inverses cached.
pub struct ZeroSetOracle<'a> {
    system: &'a MoranSystem,
    prefixes: Vec<ScaledInverse>,
    last: IntMatrix,
    m: BigInt,
    /// Machine-word copies of the leading prefixes that fit comfortably.
    small: Vec<SmallPrefix>,
    /// Nonzero zero residues jν mod m per stored level slot.
    residues: Vec<HashSet<Vec<i64>>>,
}

struct SmallPrefix {
    adj: Vec<i128>,
    det: i128,
}

const SMALL_LIMIT: i128 = 1 << 60;

fn small_prefix(inv: &ScaledInverse) -> Option<SmallPrefix> {
    let fit = |x: &BigInt| x.to_i128().filter(|v| v.abs() < SMALL_LIMIT);
    let n = inv.adj.dim();
    let mut adj = Vec::with_capacity(n * n);
    for i in 0..n {
        for x in inv.adj.row(i) {
            adj.push(fit(x)?);
        }
    }
    Some(SmallPrefix { adj, det: fit(&inv.det)? })
}

impl<'a> ZeroSetOracle<'a> {
    /// Caches enough prefixes to settle any point of norm ≤ `max_norm`.
    pub fn new(system: &'a MoranSystem, max_norm: f64) -> Result<Self> {
        let depth = termination_level(system, max_norm) + 2;
        let mut p = IntMatrix::identity(system.dim());
        let mut prefixes = Vec::with_capacity(depth);
        for k in 1..=depth {
            p = p.mul(&system.level(k).matrix.transpose());
            prefixes.push(ScaledInverse::of(&p)?);
        }
        let small = prefixes.iter().map_while(small_prefix).collect();
        let m = system.prime() as i64;
        let residues = system
            .stored_levels()
            .map(|level| {
                level
                    .zeros
                    .nus()
                    .flat_map(|nu| {
                        (1..m).map(move |j| {
                            nu.0.iter()
                                .map(|x| (x.to_i64().unwrap_or(0) * j).rem_euclid(m))
                                .collect()
                        })
                    })
                    .collect()
            })
            .collect();
        Ok(ZeroSetOracle {
            system,
            prefixes,
            last: p,
            m: BigInt::from(system.prime()),
            small,
            residues,
        })
    }

    /// `level_of` in i128 over the small prefixes; `None` means undecided
    /// (overflow or the small prefixes ran out).
    fn level_of_small(&self, v: &[i64]) -> Option<Option<usize>> {
        let n = v.len();
        if n > 8 {
            return None;
        }
        let m = self.system.prime() as i128;
        let mut w_buf = [0i128; 8];
        let mut u_buf = [0i64; 8];
        let (w, u) = (&mut w_buf[..n], &mut u_buf[..n]);
        for (k0, sp) in self.small.iter().enumerate() {
            for (i, wi) in w.iter_mut().enumerate() {
                let mut acc = 0i128;
                for (a, x) in sp.adj[i * n..(i + 1) * n].iter().zip(v) {
                    acc = acc.checked_add(a.checked_mul(*x as i128)?)?;
                }
                *wi = acc;
            }
            let mut divisible = true;
            for (ui, wi) in u.iter_mut().zip(w.iter()) {
                let scaled = wi.checked_mul(m)?;
                if scaled % sp.det != 0 {
                    divisible = false;
                    break;
                }
                *ui = (scaled / sp.det).rem_euclid(m) as i64;
            }
            if divisible
                && u.iter().any(|x| *x != 0)
                && self.residues[self.system.level_slot(k0 + 1)].contains(&*u)
            {
                return Some(Some(k0 + 1));
            }
            let mut norm = 0i128;
            for wi in w.iter() {
                norm = norm.checked_add(wi.checked_mul(*wi)?)?;
            }
            if norm.checked_mul(m * m)? < sp.det.checked_mul(sp.det)? {
                return Some(None);
            }
        }
        None
    }

    /// First level k with (R₁ᵗ⋯Rₖᵗ)⁻¹(v/q) in the zero set of m_{Dₖ}.
    ///
    /// Stops once ‖ηₖ‖₂ < 1/m: every zero coset point has a coordinate of
    /// size ≥ 1/m, and ‖ηₖ‖₂ only shrinks afterwards because ‖Rₖ⁻ᵗ‖ < 1.
    pub fn level_of_scaled(&self, v: &IntVector, q: &BigInt) -> Option<usize> {
        if v.is_zero() {
            return None;
        }
        // prefixes past the cache are built on demand for this query only
        let mut tail = self.last.clone();
        let mut extra: Option<ScaledInverse>;
        for k in 1.. {
            let inv = if k <= self.prefixes.len() {
                &self.prefixes[k - 1]
            } else {
                tail = tail.mul(&self.system.level(k).matrix.transpose());
                extra = Some(ScaledInverse::of(&tail).expect("levels are nonsingular"));
                extra.as_ref().expect("just set")
            };
            let w = inv.adj.mul_vec(v);
            let denom = q * &inv.det;
            let scaled = w.scale(&self.m);
            if scaled.0.iter().all(|x| x.is_multiple_of(&denom)) {
                let u = IntVector(scaled.0.iter().map(|x| x / &denom).collect());
                if self.system.level(k).zeros.coset_of_scaled(&u).is_some() {
                    return Some(k);
                }
            }
            if w.norm_sq() * (&self.m * &self.m) < &denom * &denom {
                return None;
            }
        }
        unreachable!()
    }

    pub fn level_of(&self, xi: &IntVector) -> Option<usize> {
        if xi.is_zero() {
            return None;
        }
        let small: Option<Vec<i64>> = xi.0.iter().map(|x| x.to_i64()).collect();
        if let Some(found) = small.and_then(|v| self.level_of_small(&v)) {
            return found;
        }
        self.level_of_scaled(xi, &BigInt::one())
    }

    pub fn level_of_rational(&self, xi: &RationalVector) -> Option<usize> {
        let q = xi.common_denominator();
        let v = IntVector(
            xi.0
                .iter()
                .map(|x| x.numer() * (&q / x.denom()))
                .collect(),
        );
        self.level_of_scaled(&v, &q)
    }
}

/// Least k with r^k·‖ξ‖ < 1/m: the iterate is certainly inside the ball
/// where no zero coset can lie.
pub fn termination_level(system: &MoranSystem, norm: f64) -> usize {
    let r = system.params().r;
    let target = 1.0 / system.prime() as f64;
    let mut k = 0usize;
    let mut x = norm;
    while x >= target && k < 10_000 {
        x *= r;
        k += 1;
    }
    k.max(1)
}

/// First level k whose mask vanishes at (R₁ᵗ⋯Rₖᵗ)⁻¹ξ, if any.
pub fn in_zero_set(system: &MoranSystem, xi: &RationalVector) -> Result<Option<usize>> {
    let norm = xi.to_f64().iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(ZeroSetOracle::new(system, norm)?.level_of_rational(xi))
}

const MAX_WITNESSES: usize = 100;

/// Checks that every nonzero difference of Λ lies in Z(μ̂).
pub fn verify_orthogonality(system: &MoranSystem, lambda: &[IntVector]) -> Result<VerificationReport> {
    let max_norm = lambda
        .iter()
        .map(|v| v.to_f64().iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let oracle = ZeroSetOracle::new(system, 2.0 * max_norm)?;
    // i64 copies with headroom for differences
    let small: Option<Vec<Vec<i64>>> = lambda
        .iter()
        .map(|v| {
            v.0.iter()
                .map(|x| x.to_i64().filter(|y| y.abs() < 1 << 62))
                .collect()
        })
        .collect();
    let failures: Vec<(usize, usize)> = (1..lambda.len())
        .into_par_iter()
        .flat_map_iter(|j| {
            let oracle = &oracle;
            let small = small.as_ref();
            let mut d = vec![0i64; system.dim()];
            (0..j).filter_map(move |i| {
                let fast = small.and_then(|s| {
                    for ((o, a), b) in d.iter_mut().zip(&s[j]).zip(&s[i]) {
                        *o = a - b;
                    }
                    oracle.level_of_small(&d)
                });
                let level = match fast {
                    Some(found) => found,
                    None => oracle.level_of(&(&lambda[j] - &lambda[i])),
                };
                level.is_none().then_some((j, i))
            })
        })
        .collect();
    let pairs = lambda.len() * lambda.len().saturating_sub(1) / 2;
    let witnesses = failures
        .iter()
        .take(MAX_WITNESSES)
        .map(|&(j, i)| Witness::Pair {
            left: lambda[j].clone(),
            right: lambda[i].clone(),
        })
        .collect();
    Ok(VerificationReport::new(ReportKind::Orthogonality, witnesses)
        .margin("pairs", pairs as f64)
        .margin("failures", failures.len() as f64))
}

/// Neumaier-compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Σ_{λ∈Λ} |μ̂_N(ξ+λ)|² for the finite product over the table's depth.
pub fn finite_level_q(table: &TransformTable, lambda: &[IntVector], xi: &[f64]) -> f64 {
    let mut acc = CompensatedSum::default();
    let mut buf = vec![0.0; table.n];
    for l in lambda {
        let p: Vec<f64> = l.to_f64().iter().zip(xi).map(|(a, b)| a + b).collect();
        acc.add(table.partial_with(&p, &mut buf).norm_sqr());
    }
    acc.value()
}

/// Q̂ over Λ with the truncated transform, plus the tail allowance
/// Σ |P_N|²(2t + t²), which bounds |Q − Q̂| since |μ̂ − P_N| ≤ |P_N|·t,
/// and the number of terms whose partial product is uncertified.
fn q_with_tail(table: &TransformTable, lambda: &[Vec<f64>], xi: &[f64]) -> (f64, f64, usize) {
    let mut q = CompensatedSum::default();
    let mut tail = CompensatedSum::default();
    let mut uncertified = 0;
    let mut p = vec![0.0; xi.len()];
    let mut buf = vec![0.0; table.n];
    for l in lambda {
        for ((o, a), b) in p.iter_mut().zip(l).zip(xi) {
            *o = a + b;
        }
        let tr = table.eval_with(&p, &mut buf);
        let mag = tr.value.norm_sqr();
        q.add(mag);
        let t = if tr.value.norm() > 0.0 { tr.tail_bound / tr.value.norm() } else { 0.0 };
        tail.add(mag * (2.0 * t + t * t));
        if !tr.certified {
            uncertified += 1;
        }
    }
    (q.value(), tail.value(), uncertified)
}

#[derive(Clone, Debug)]
pub struct QScanOptions {
    pub grid: usize,
    pub depth: usize,
    pub random_points: usize,
    pub seed: u64,
    /// When set, grid points with 1 − Q̂ above this become witnesses.
    pub gap_tolerance: Option<f64>,
}

impl Default for QScanOptions {
    fn default() -> Self {
        QScanOptions {
            grid: 8,
            depth: 12,
            random_points: 16,
            seed: 0x5eed,
            gap_tolerance: None,
        }
    }
}

/// Samples Q̂ₖ(ξ) = Σ_{λ∈Λₖ} |μ̂_N(ξ+λ)|² on a uniform grid of [0,1)ⁿ plus
/// seeded random points. Flags points where Q̂ decreases in k or exceeds
/// 1 + tail, and reports the final gap 1 − Q̂ with its tail allowance.
pub fn q_function_scan(
    system: &MoranSystem,
    levels: &[SpectrumLevel],
    opts: &QScanOptions,
) -> Result<VerificationReport> {
    if opts.grid < 4 {
        return Err(Error::InvalidParameter(format!("grid must be at least 4, got {}", opts.grid)));
    }
    let Some(top) = levels.last() else {
        return Err(Error::InvalidParameter("no spectrum levels given".into()));
    };
    let needed = (top.k + 1) * top.block_size;
    if opts.depth < needed {
        return Err(Error::InvalidParameter(format!(
            "depth {} is below the {} levels spanned by the spectrum",
            opts.depth, needed
        )));
    }
    let n = system.dim();
    let table = TransformTable::new(system, opts.depth)?;
    let lams: Vec<Vec<Vec<f64>>> = levels
        .iter()
        .map(|l| l.elements.iter().map(IntVector::to_f64).collect())
        .collect();

    let total = opts
        .grid
        .checked_pow(n as u32)
        .ok_or_else(|| Error::InvalidParameter("grid too large".into()))?;
    let mut points: Vec<Vec<f64>> = (0..total)
        .map(|code| {
            let mut c = code;
            let mut p = vec![0.0; n];
            for x in p.iter_mut().rev() {
                *x = (c % opts.grid) as f64 / opts.grid as f64;
                c /= opts.grid;
            }
            p
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.random_points {
        points.push((0..n).map(|_| rng.gen::<f64>()).collect());
    }

    struct PointResult {
        qs: Vec<f64>,
        tails: Vec<f64>,
        uncertified: usize,
    }
    let results: Vec<PointResult> = points
        .par_iter()
        .map(|xi| {
            let mut qs = Vec::with_capacity(lams.len());
            let mut tails = Vec::with_capacity(lams.len());
            let mut uncertified = 0;
            for lam in &lams {
                let (q, t, u) = q_with_tail(&table, lam, xi);
                qs.push(q);
                tails.push(t);
                uncertified = uncertified.max(u);
            }
            PointResult { qs, tails, uncertified }
        })
        .collect();

    let slack = 1e-12;
    let mut witnesses = Vec::new();
    let mut max_gap = 0.0f64;
    let mut max_tail = 0.0f64;
    let mut level_gaps = vec![0.0f64; lams.len()];
    let mut monotone = true;
    let mut bessel = true;
    let mut uncertified = 0usize;
    for (xi, res) in points.iter().zip(&results) {
        uncertified = uncertified.max(res.uncertified);
        for (k, q) in res.qs.iter().enumerate() {
            level_gaps[k] = level_gaps[k].max((1.0 - q).abs());
            if *q > 1.0 + res.tails[k] + slack {
                bessel = false;
                witnesses.push(Witness::Point { point: xi.clone(), value: *q });
            }
            if k > 0 && *q + slack < res.qs[k - 1] {
                monotone = false;
                witnesses.push(Witness::Point { point: xi.clone(), value: *q });
            }
        }
        let last = *res.qs.last().expect("at least one level");
        let gap = (1.0 - last).abs();
        max_gap = max_gap.max(gap);
        max_tail = max_tail.max(*res.tails.last().expect("at least one level"));
        if let Some(tol) = opts.gap_tolerance {
            if gap > tol {
                witnesses.push(Witness::Point { point: xi.clone(), value: last });
            }
        }
    }
    witnesses.truncate(MAX_WITNESSES);
    let mut report = VerificationReport::new(ReportKind::Completeness, witnesses)
        .margin("max_gap", max_gap)
        .margin("max_tail", max_tail)
        .margin("points", points.len() as f64)
        .margin("monotone", if monotone { 1.0 } else { 0.0 })
        .margin("bessel", if bessel { 1.0 } else { 0.0 })
        .margin("uncertified_terms", uncertified as f64);
    if uncertified > 0 {
        report = report.note(format!(
            "up to {uncertified} terms per point are uncertified partial products; max_tail still bounds them"
        ));
    }
    for (k, g) in level_gaps.iter().enumerate() {
        report = report.margin(&format!("max_gap_level_{}", levels[k].k), *g);
    }
    Ok(report)
}

/// Rational point helper: ξ with entries p/q.
pub fn rational_point(values: &[(i64, i64)]) -> RationalVector {
    RationalVector::from_ratios(values)
}
