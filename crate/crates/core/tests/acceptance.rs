//! End-to-end acceptance checks, one test per criterion. Each prints a single
//! PASS/FAIL line with the measured quantities before asserting.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use moran_core::analyzer::{
    finite_level_q, q_function_scan, verify_orthogonality, QScanOptions, TransformTable,
};
use moran_core::decider::{
    admissibility_scan, classify_gamma, decide_diagonal, decide_phi1, decide_triangular,
    tail_product_inverse, AdmissibilityOptions, GammaClass, Outcome,
};
use moran_core::exact::{rat, IntMatrix, IntVector};
use moran_core::mask::{find_zero_directions, DigitSet};
use moran_core::pairs::{
    has_distinct_cosets, is_compatible_pair, reduce_pair_mod, tower_pair, translate_pair,
    CheckMode, CompatiblePair,
};
use moran_core::render::{ppm_bytes, support_points};
use moran_core::spectrum::{choose_block_size, construct, DEFAULT_CAP};
use moran_core::system::{Level, MoranSystem, ParamOverrides};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(n: usize, ok: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if ok { "PASS" } else { "FAIL" });
}

fn level(rows: &[[i64; 2]; 2], digits: &[[i64; 2]], m: u64) -> Level {
    let rows: Vec<Vec<i64>> = rows.iter().map(|r| r.to_vec()).collect();
    let digits: Vec<Vec<i64>> = digits.iter().map(|d| d.to_vec()).collect();
    Level::from_rows(&rows, &digits, m).unwrap()
}

const SIERPINSKI: [[i64; 2]; 3] = [[0, 0], [1, 0], [0, 1]];
const B1: [[i64; 2]; 5] = [[0, 0], [1, 0], [0, 1], [1, 1], [3, 3]];
const B2: [[i64; 2]; 5] = [[0, 0], [1, 0], [0, -1], [1, -1], [3, -3]];
const B3: [[i64; 2]; 5] = [[0, 0], [1, 0], [1, 1], [2, 1], [2, 2]];
const T1: [[i64; 2]; 3] = [[0, 0], [1, 2], [1, 3]];
const T2: [[i64; 2]; 3] = [[0, 0], [2, 3], [3, 5]];

fn sierpinski(a: i64) -> MoranSystem {
    MoranSystem::new(3, vec![], vec![level(&[[a, 0], [0, a]], &SIERPINSKI, 3)]).unwrap()
}

fn figure_system() -> MoranSystem {
    MoranSystem::new(
        5,
        vec![level(&[[5, 0], [0, 5]], &B3, 5)],
        vec![level(&[[10, 0], [0, 5]], &B3, 5)],
    )
    .unwrap()
}

fn digits(rows: &[[i64; 2]]) -> DigitSet {
    DigitSet::from_vecs(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
}

fn mask(d: &[Vec<i64>], xi: &[f64]) -> Complex64 {
    let s: Complex64 = d
        .iter()
        .map(|v| {
            let t: f64 = v.iter().zip(xi).map(|(a, b)| *a as f64 * b).sum();
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t)
        })
        .sum();
    s / d.len() as f64
}

/// Zero points j·ν/m (j ≠ 0, entries in [0, m)) found by evaluating the mask on
/// the grid (1/m)ℤⁿ.
fn brute_zero_points(d: &[Vec<i64>], m: u64) -> BTreeSet<Vec<i64>> {
    let n = d[0].len();
    let total = (m as usize).pow(n as u32);
    (1..total)
        .map(|mut idx| {
            (0..n)
                .map(|_| {
                    let c = (idx % m as usize) as i64;
                    idx /= m as usize;
                    c
                })
                .collect::<Vec<_>>()
        })
        .filter(|p| {
            let xi: Vec<f64> = p.iter().map(|c| *c as f64 / m as f64).collect();
            mask(d, &xi).norm() < 1e-9
        })
        .collect()
}

fn multiples(nu: &IntVector, m: u64) -> BTreeSet<Vec<i64>> {
    let nu: Vec<i64> = nu.0.iter().map(|x| i64::try_from(x).unwrap()).collect();
    (1..m as i64)
        .map(|j| nu.iter().map(|c| (j * c).rem_euclid(m as i64)).collect())
        .collect()
}

fn nus(d: &DigitSet, m: u64) -> BTreeSet<Vec<i64>> {
    find_zero_directions(d, m)
        .unwrap()
        .nus()
        .map(|v| v.0.iter().map(|x| i64::try_from(x).unwrap()).collect())
        .collect()
}

#[test]
fn criterion_1_zero_structures() {
    let t = Instant::now();
    let line = DigitSet::from_vecs(&[vec![0], vec![1], vec![2]]).unwrap();
    let cases: Vec<(&str, DigitSet, u64, BTreeSet<Vec<i64>>)> = vec![
        ("{0,1,2}", line, 3, [vec![1]].into()),
        ("sierpinski", digits(&SIERPINSKI), 3, [vec![1, 2]].into()),
        ("B1", digits(&B1), 5, [vec![1, 2], vec![1, 3]].into()),
        ("B2", digits(&B2), 5, [vec![1, 2], vec![1, 3]].into()),
        ("B3", digits(&B3), 5, [vec![1, 1]].into()),
    ];
    let mut ok = true;
    for (name, d, m, expected) in &cases {
        let got = nus(d, *m);
        // the grid oracle must see exactly the multiples of the directions
        let raw: Vec<Vec<i64>> = d.iter().map(|v| v.0.iter().map(|x| i64::try_from(x).unwrap()).collect()).collect();
        let brute = brute_zero_points(&raw, *m);
        let from_dirs: BTreeSet<Vec<i64>> = got.iter().flat_map(|nu| multiples(&IntVector::from_i64s(nu), *m)).collect();
        if &got != expected || brute != from_dirs {
            println!("  {name}: got {got:?}, expected {expected:?}, grid {brute:?}");
            ok = false;
        }
    }
    let elapsed = t.elapsed();
    ok &= elapsed < Duration::from_secs(1);
    report(1, ok, format!("{} digit sets, {elapsed:?}", cases.len()));
    assert!(ok);
}

fn triangular_system(cycle: &[[[i64; 2]; 2]]) -> MoranSystem {
    let pre = vec![level(&[[4, 4], [0, 5]], &T1, 3)];
    let cyc = cycle
        .iter()
        .enumerate()
        .map(|(i, r)| level(r, if i % 2 == 0 { &T2 } else { &T1 }, 3))
        .collect();
    MoranSystem::new(3, pre, cyc).unwrap()
}

#[test]
fn criterion_2_decisions() {
    let t = Instant::now();
    let spectral = figure_system();
    let not_spectral = MoranSystem::new(
        5,
        vec![level(&[[5, 0], [0, 5]], &B3, 5)],
        vec![level(&[[6, 0], [0, 5]], &B3, 5)],
    )
    .unwrap();
    let mut ok = true;
    let mut check = |name: &str, got: Outcome, want: Outcome| {
        if got != want {
            println!("  {name}: got {got}, expected {want}");
            ok = false;
        }
    };
    check("diag[10,5]", decide_diagonal(&spectral).unwrap().outcome, Outcome::Spectral);
    let v = decide_diagonal(&not_spectral).unwrap();
    check("diag[6,5]", v.outcome, Outcome::NotSpectral);
    let w = v.witness.expect("divisibility witness");
    check(
        "diag[6,5] witness",
        if (w.level, w.index, w.value.clone()) == (2, 1, 6.into()) { Outcome::NotSpectral } else { Outcome::Unknown },
        Outcome::NotSpectral,
    );

    // R_k = [[a,a],[0,b]] with digits from {T1, T2}: spectral iff R_k ∈ M₂(3ℤ), k ≥ 2
    let yes = triangular_system(&[[[3, 3], [0, 6]], [[6, 6], [0, 3]]]);
    let no_a = triangular_system(&[[[3, 3], [0, 6]], [[4, 4], [0, 3]]]);
    let no_b = triangular_system(&[[[3, 3], [0, 5]]]);
    for (name, sys, want) in [
        ("3Z cycle", &yes, Outcome::Spectral),
        ("a=4 in cycle", &no_a, Outcome::NotSpectral),
        ("b=5 in cycle", &no_b, Outcome::NotSpectral),
    ] {
        check(&format!("triangular {name}"), decide_triangular(sys).unwrap().outcome, want);
        check(&format!("phi1 {name}"), decide_phi1(sys).unwrap().outcome, want);
    }
    let elapsed = t.elapsed();
    ok &= elapsed < Duration::from_secs(1);
    report(2, ok, format!("7 systems, {elapsed:?}"));
    assert!(ok);
}

/// |μ̂_N(ξ)|² for R = 3I and the Sierpinski digits, computed directly.
fn sierpinski_power(xi: &[f64], depth: usize) -> f64 {
    let d: Vec<Vec<i64>> = SIERPINSKI.iter().map(|r| r.to_vec()).collect();
    let mut scale = 1.0;
    let mut p = 1.0;
    for _ in 0..depth {
        scale /= 3.0;
        let eta: Vec<f64> = xi.iter().map(|x| x * scale).collect();
        p *= mask(&d, &eta).norm_sqr();
    }
    p
}

#[test]
fn criterion_3_finite_identity() {
    let t = Instant::now();
    let system = sierpinski(3);
    let k = choose_block_size(&system).unwrap();
    let c = construct(&system, Some(k), 2, DEFAULT_CAP).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut worst_oracle = 0.0f64;
    for lvl in &c.levels {
        let depth = (lvl.k + 1) * k;
        let table = TransformTable::new(&c.system, depth).unwrap();
        let lam: Vec<Vec<f64>> = lvl.elements.iter().map(|e| e.to_f64()).collect();
        for _ in 0..20 {
            let xi = [rng.gen::<f64>(), rng.gen::<f64>()];
            let q = finite_level_q(&table, &lvl.elements, &xi);
            worst = worst.max((q - 1.0).abs());
            let oracle: f64 = lam
                .iter()
                .map(|l| sierpinski_power(&[xi[0] + l[0], xi[1] + l[1]], depth))
                .sum();
            worst_oracle = worst_oracle.max((oracle - 1.0).abs());
        }
    }
    let elapsed = t.elapsed();
    let ok = worst <= 1e-9 && worst_oracle <= 1e-9 && elapsed < Duration::from_secs(10);
    report(3, ok, format!("K={k}, max |Q-1| = {worst:.2e} (direct {worst_oracle:.2e}), {elapsed:?}"));
    assert!(ok);
}

#[test]
fn criterion_4_orthogonality() {
    let t = Instant::now();
    let mut ok = true;
    let mut sizes = Vec::new();
    // block sizes keep #Λ₂ ≤ 10⁴: 3^6 and 5^3 elements
    for (system, k) in [(sierpinski(3), 2), (figure_system(), 1)] {
        let c = construct(&system, Some(k), 2, DEFAULT_CAP).unwrap();
        let lam = &c.levels[2].elements;
        let r = verify_orthogonality(&c.system, lam).unwrap();
        let n = lam.len() as f64;
        ok &= lam.len() <= 10_000
            && r.pass
            && r.witnesses.is_empty()
            && r.margins["pairs"] == n * (n - 1.0) / 2.0;
        sizes.push(lam.len());
    }
    let elapsed = t.elapsed();
    ok &= elapsed < Duration::from_secs(30);
    report(4, ok, format!("#Λ₂ = {sizes:?}, zero witnesses, {elapsed:?}"));
    assert!(ok);
}

#[test]
fn criterion_5_q_scan() {
    let t = Instant::now();
    let system = sierpinski(3);
    let c = construct(&system, None, 3, DEFAULT_CAP).unwrap();
    let opts = QScanOptions {
        grid: 8,
        depth: 12,
        ..QScanOptions::default()
    };
    let r = q_function_scan(&c.system, &c.levels, &opts).unwrap();
    let gap = r.margins["max_gap"];
    let tail = r.margins["max_tail"];
    let elapsed = t.elapsed();
    let ok = gap <= 0.02 && tail <= 1e-3 && r.pass && elapsed < Duration::from_secs(120);
    report(
        5,
        ok,
        format!(
            "K={}, #Λ₃={}, max |1-Q| = {gap:.2e}, tail = {tail:.2e}, {elapsed:?}",
            c.decomposition.block_size,
            c.levels[3].len()
        ),
    );
    assert!(ok);
}

fn lattice_shift(rng: &mut ChaCha8Rng, base: Vec<i64>, mat: &IntMatrix) -> IntVector {
    let z = IntVector::from_i64s(&[rng.gen_range(-1..=1), rng.gen_range(-1..=1)]);
    &IntVector::from_i64s(&base) + &mat.mul_vec(&z)
}

/// A known compatible pair: R = [[m·a, b], [0, c]], digits (i, 0) shifted by
/// lattice points of R, labels (j·a, y_j) shifted by lattice points of Rᵗ.
fn random_pair(rng: &mut ChaCha8Rng, m: i64) -> CompatiblePair {
    let a = rng.gen_range(1..=2) * if rng.gen() { 1 } else { -1 };
    let b = rng.gen_range(-3..=3);
    let c = rng.gen_range(1..=3);
    let r = IntMatrix::from_rows(&[vec![m * a, b], vec![0, c]]).unwrap();
    let rt = r.transpose();
    let d: Vec<IntVector> = (0..m).map(|i| lattice_shift(rng, vec![i, 0], &r)).collect();
    let labels: Vec<IntVector> = (0..m)
        .map(|j| {
            let y = rng.gen_range(-3..=3);
            lattice_shift(rng, vec![j * a, y], &rt)
        })
        .collect();
    CompatiblePair::new(r, DigitSet::new(d).unwrap(), labels).unwrap()
}

fn random_noise(rng: &mut ChaCha8Rng, m: i64) -> (IntMatrix, DigitSet, Vec<IntVector>) {
    loop {
        let r = IntMatrix::from_rows(&[
            vec![rng.gen_range(-6..=6), rng.gen_range(-6..=6)],
            vec![rng.gen_range(-6..=6), rng.gen_range(-6..=6)],
        ])
        .unwrap();
        if r.det() == 0.into() {
            continue;
        }
        let pts: BTreeSet<(i64, i64)> = (0..m).map(|_| (rng.gen_range(-6..=6), rng.gen_range(-6..=6))).collect();
        if pts.len() != m as usize {
            continue;
        }
        let d = DigitSet::new(pts.iter().map(|(x, y)| IntVector::from_i64s(&[*x, *y])).collect()).unwrap();
        let l = (0..m)
            .map(|_| IntVector::from_i64s(&[rng.gen_range(-6..=6), rng.gen_range(-6..=6)]))
            .collect();
        return (r, d, l);
    }
}

#[test]
fn criterion_6_pairs() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let ms = [2i64, 3, 5];
    let mut disagreements = 0;
    let mut compatible = 0;
    for i in 0..200 {
        let m = ms[i % 3];
        let (r, d, l) = if i % 2 == 0 {
            let p = random_pair(&mut rng, m);
            (p.matrix, p.digits, p.labels)
        } else {
            random_noise(&mut rng, m)
        };
        let exact = is_compatible_pair(&r, &d, &l, CheckMode::Exact).unwrap();
        let numeric = is_compatible_pair(&r, &d, &l, CheckMode::Numeric { tol: 1e-9 }).unwrap();
        if exact.ok != numeric.ok {
            disagreements += 1;
        }
        if exact.ok {
            compatible += 1;
        }
    }

    let mut closure_failures = 0;
    for i in 0..50 {
        let m = ms[i % 3];
        let depth = rng.gen_range(1..=3);
        let parts: Vec<_> = (0..depth).map(|_| random_pair(&mut rng, m)).collect();
        let tower = tower_pair(&parts).unwrap();
        let s = IntVector::from_i64s(&[rng.gen_range(-5..=5), rng.gen_range(-5..=5)]);
        let d0 = IntVector::from_i64s(&[rng.gen_range(-5..=5), rng.gen_range(-5..=5)]);
        let moved = translate_pair(&tower, &s, &d0).unwrap();
        let z = IntVector::from_i64s(&[rng.gen_range(-2..=2), rng.gen_range(-2..=2)]);
        let dz = moved.matrix.mul_vec(&z);
        let lz = moved.matrix.transpose().mul_vec(&z);
        let reduced = reduce_pair_mod(
            &moved,
            DigitSet::new(moved.digits.iter().map(|v| v + &dz).collect()).unwrap(),
            moved.labels.iter().map(|v| v - &lz).collect(),
        )
        .unwrap();
        for p in [&tower, &moved, &reduced] {
            let ok = is_compatible_pair(&p.matrix, &p.digits, &p.labels, CheckMode::Exact).unwrap().ok
                && has_distinct_cosets(p).unwrap();
            if !ok {
                closure_failures += 1;
            }
        }
    }
    let elapsed = t.elapsed();
    let ok = disagreements == 0 && closure_failures == 0 && compatible >= 100 && elapsed < Duration::from_secs(30);
    report(
        6,
        ok,
        format!("200 pairs ({compatible} compatible), {disagreements} disagreements, 50 towers with {closure_failures} closure failures, {elapsed:?}"),
    );
    assert!(ok);
}

#[test]
fn criterion_7_gamma() {
    // ordered, so both digit orders go through classify_gamma
    let mut sets = BTreeSet::new();
    for a in -5i64..=5 {
        for b in -5i64..=5 {
            for c in -5i64..=5 {
                for d in -5i64..=5 {
                    if (a * d - b * c).abs() == 1 {
                        sets.insert([(a, b), (c, d)]);
                    }
                }
            }
        }
    }
    let mut mismatches = 0;
    let mut counts = [0usize; 3];
    for [(a, b), (c, d)] in &sets {
        let raw = vec![vec![0, 0], vec![*a, *b], vec![*c, *d]];
        let brute = brute_zero_points(&raw, 3);
        let g = classify_gamma(&DigitSet::from_vecs(&raw).unwrap()).unwrap();
        let expected_class = if brute == multiples(&IntVector::from_i64s(&[1, 1]), 3) {
            GammaClass::Gamma1
        } else if brute == multiples(&IntVector::from_i64s(&[1, 2]), 3) {
            GammaClass::Gamma2
        } else {
            GammaClass::Neither
        };
        counts[match g.class {
            GammaClass::Gamma1 => 0,
            GammaClass::Gamma2 => 1,
            GammaClass::Neither => 2,
        }] += 1;
        if g.class != expected_class || multiples(&g.nu, 3) != brute {
            println!("  ({a},{b}),({c},{d}): {:?} vs grid {brute:?}", g.class);
            mismatches += 1;
        }
    }
    let ok = mismatches == 0;
    report(
        7,
        ok,
        format!("{} sets (Γ₁ {}, Γ₂ {}, other {}), {mismatches} mismatches", sets.len(), counts[0], counts[1], counts[2]),
    );
    assert!(ok);
}

#[test]
fn criterion_8_admissibility() {
    let t = Instant::now();
    let overrides = ParamOverrides {
        delta: Some(rat(1, 8)),
        beta: Some(rat(1, 24)),
        ..ParamOverrides::default()
    };
    let system = MoranSystem::with_params(
        3,
        vec![],
        vec![level(&[[9, 0], [0, 9]], &SIERPINSKI, 3)],
        overrides,
    )
    .unwrap();
    let opts = AdmissibilityOptions::for_system(&system);
    let cert = admissibility_scan(&system, &opts).unwrap();
    // axis argument by hand: 1/3 − (1/2 + 1/8)/9 − 1/24
    let hand = 1.0 / 3.0 - 0.625 / 9.0 - 1.0 / 24.0;
    let gap = cert.report.margins["min_interval_gap"];

    // zero cosets (1/3, 2/3) and (2/3, 1/3) modulo ℤ²
    let offsets = [[1.0 / 3.0, 2.0 / 3.0], [2.0 / 3.0, 1.0 / 3.0]];
    let dist = |x: &[f64]| {
        offsets
            .iter()
            .map(|o| {
                x.iter()
                    .zip(o)
                    .map(|(a, b)| {
                        let t = a - b;
                        (t - t.round()).powi(2)
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let half = 0.5 + 0.125;
    let mut violations = 0;
    let mut closest = f64::INFINITY;
    for i in 0..10_000 {
        let k = opts.start + i % (opts.horizon + 1);
        let p = 1 + (i / (opts.horizon + 1)) % opts.horizon;
        let inv = tail_product_inverse(&system, k, p).unwrap();
        let y = [rng.gen_range(-half..=half), rng.gen_range(-half..=half)];
        let x = [inv[0] * y[0] + inv[1] * y[1], inv[2] * y[0] + inv[3] * y[1]];
        let d = dist(&x);
        closest = closest.min(d);
        if d < 1.0 / 24.0 {
            violations += 1;
        }
    }
    let elapsed = t.elapsed();
    let ok = cert.admissible
        && cert.unconditional
        && (gap - hand).abs() < 1e-12
        && violations == 0
        && elapsed < Duration::from_secs(5);
    report(
        8,
        ok,
        format!("certified gap {gap:.6} (hand {hand:.6}), 10^4 samples, nearest coset {closest:.4}, {violations} violations, {elapsed:?}"),
    );
    assert!(ok);
}

/// Counts non-white pixels of a binary P6 image.
fn dark_pixels(bytes: &[u8]) -> usize {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        fields.push(String::from_utf8(bytes[start..pos].to_vec()).unwrap());
    }
    assert_eq!(fields[0], "P6");
    let body = &bytes[pos + 1..];
    let (w, h): (usize, usize) = (fields[1].parse().unwrap(), fields[2].parse().unwrap());
    assert_eq!(body.len(), w * h * 3);
    body.chunks(3).filter(|px| px != &[255, 255, 255]).count()
}

#[test]
fn criterion_9_rendering() {
    let system = figure_system();
    let mut ok = true;
    let mut lines = Vec::new();
    for n in [1, 2] {
        let cloud = support_points(&system, n, DEFAULT_CAP).unwrap();
        let inside = cloud
            .points
            .iter()
            .all(|p| p.iter().all(|x| (0.0..=1.0).contains(x)));
        let dark = dark_pixels(&ppm_bytes(&cloud, 512).unwrap());
        let rel = (dark as f64 - cloud.len() as f64).abs() / cloud.len() as f64;
        ok &= inside && rel <= 0.05 && cloud.len() == 5usize.pow(n as u32);
        lines.push(format!("N={n}: {} points, {dark} dark pixels", cloud.len()));
    }
    report(9, ok, lines.join("; "));
    assert!(ok);
}
