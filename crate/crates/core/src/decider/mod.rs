//! Decidable spectrality criteria for eventually periodic systems.
//!
//! Each criterion quantifies over all levels k ≥ 2; on an eventually
//! periodic description it suffices to check the preamble tail and one
//! full cycle ([`MoranSystem::representative_tail`]).

mod admissibility;

pub use admissibility::{
    admissibility_scan, nearest_zero_distance, tail_product_inverse, AdmissibilityCertificate,
    AdmissibilityOptions,
};

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{IntMatrix, IntVector};
use crate::mask::{find_zero_directions, DigitSet};
use crate::spectrum::find_admissible_direction;
use crate::system::MoranSystem;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Spectral,
    NotSpectral,
    Unknown,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Spectral => "Spectral",
            Outcome::NotSpectral => "NotSpectral",
            Outcome::Unknown => "Unknown",
        })
    }
}

/// The criterion a verdict rests on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// Diagonal Rₖ: spectral iff m divides every diagonal entry for k ≥ 2.
    DiagonalDivisibility,
    /// One zero direction per level: spectral iff νₖᵗRₖ ≡ 0 mod m for k ≥ 2.
    SingleDirection,
    /// Triangular templates: spectral iff m divides every aᵢ⁽ᵏ⁾ for k ≥ 2.
    TriangularTemplate,
    /// Planar three-digit sets of unit determinant with m = 3.
    GammaClasses,
    /// Several zero directions: some admissible direction per level is
    /// sufficient, but its failure decides nothing.
    DirectionSufficiency,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::DiagonalDivisibility => "diagonal-divisibility",
            Criterion::SingleDirection => "single-direction",
            Criterion::TriangularTemplate => "triangular-template",
            Criterion::GammaClasses => "gamma-classes",
            Criterion::DirectionSufficiency => "direction-sufficiency",
        })
    }
}

/// A failing divisibility: `index` is the 1-based coordinate (diagonal and
/// template criteria) or the entry of νₖᵗRₖ, and `value` the offending
/// integer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DivisibilityWitness {
    pub level: usize,
    pub index: usize,
    #[serde(serialize_with = "ser_display")]
    pub value: BigInt,
}

fn ser_display<S: serde::Serializer>(x: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(x)
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub criterion: Criterion,
    pub witness: Option<DivisibilityWitness>,
    /// Levels whose data was examined (preamble tail plus one cycle).
    pub checked_levels: Vec<usize>,
    pub admissibility: Option<AdmissibilityCertificate>,
    pub caveats: Vec<String>,
}

impl Verdict {
    fn new(criterion: Criterion, system: &MoranSystem) -> Self {
        Verdict {
            outcome: Outcome::Unknown,
            criterion,
            witness: None,
            checked_levels: system.representative_tail(),
            admissibility: None,
            caveats: Vec::new(),
        }
    }

    fn settle(mut self, witness: Option<DivisibilityWitness>) -> Self {
        self.outcome = if witness.is_some() {
            Outcome::NotSpectral
        } else {
            Outcome::Spectral
        };
        self.witness = witness;
        self
    }
}

fn require_valid(system: &MoranSystem) -> Result<()> {
    let diags = system.validate();
    if diags.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidSystem(diags))
    }
}

fn require_odd_prime(system: &MoranSystem) -> Result<()> {
    if system.prime() <= 2 {
        return Err(Error::HypothesisViolation(format!(
            "the criterion needs m > 2, got m = {}",
            system.prime()
        )));
    }
    Ok(())
}

fn require_single_direction(system: &MoranSystem) -> Result<()> {
    for (i, level) in system.stored_levels().enumerate() {
        if level.zeros.len() != 1 {
            return Err(Error::HypothesisViolation(format!(
                "level {} has {} zero directions, expected exactly one",
                i + 1,
                level.zeros.len()
            )));
        }
    }
    Ok(())
}

/// First (k, i) in the representative tail with m ∤ value(k, i).
fn first_indivisible(
    system: &MoranSystem,
    values: impl Fn(usize) -> Vec<BigInt>,
) -> Option<DivisibilityWitness> {
    let m = BigInt::from(system.prime());
    system.representative_tail().into_iter().find_map(|k| {
        values(k)
            .into_iter()
            .enumerate()
            .find(|(_, v)| !v.is_multiple_of(&m))
            .map(|(i, value)| DivisibilityWitness {
                level: k,
                index: i + 1,
                value,
            })
    })
}

/// Diagonal levels diag[p_{k,1}, …, p_{k,n}]: spectral iff m | p_{k,i} for
/// all k ≥ 2 and all i.
pub fn decide_diagonal(system: &MoranSystem) -> Result<Verdict> {
    require_valid(system)?;
    require_odd_prime(system)?;
    require_diagonal(system)?;
    let witness = first_indivisible(system, |k| system.level(k).matrix.diag());
    Ok(Verdict::new(Criterion::DiagonalDivisibility, system).settle(witness))
}

fn require_diagonal(system: &MoranSystem) -> Result<()> {
    for (i, level) in system.stored_levels().enumerate() {
        if !level.matrix.is_diagonal() {
            return Err(Error::HypothesisViolation(format!("level {} is not diagonal", i + 1)));
        }
    }
    Ok(())
}

fn attach_admissibility(mut verdict: Verdict, system: &MoranSystem, horizon: Option<usize>) -> Verdict {
    let mut opts = AdmissibilityOptions::for_system(system);
    if let Some(h) = horizon {
        opts.horizon = h;
    }
    match admissibility_scan(system, &opts) {
        Ok(cert) if cert.admissible => {
            if !cert.unconditional {
                verdict.caveats.push(format!(
                    "admissibility verified only for starts {}..={} and product lengths up to {}",
                    cert.start,
                    cert.start + cert.horizon,
                    cert.horizon
                ));
            }
            verdict.admissibility = Some(cert);
        }
        Ok(cert) => {
            verdict.outcome = Outcome::Unknown;
            verdict.witness = None;
            verdict
                .caveats
                .push("admissibility fails: a tail product maps the inflated box near a zero coset".into());
            verdict.admissibility = Some(cert);
        }
        Err(e) => {
            verdict.outcome = Outcome::Unknown;
            verdict.witness = None;
            verdict.caveats.push(format!("admissibility not certified: {e}"));
        }
    }
    verdict
}

/// One zero direction per level: spectral iff (1/m)νₖᵗRₖ ∈ ℤⁿ for k ≥ 2,
/// provided the tail products are admissible. Without an admissibility
/// certificate the verdict is Unknown.
pub fn decide_phi1(system: &MoranSystem) -> Result<Verdict> {
    decide_phi1_with(system, None)
}

pub fn decide_phi1_with(system: &MoranSystem, horizon: Option<usize>) -> Result<Verdict> {
    require_valid(system)?;
    require_odd_prime(system)?;
    require_single_direction(system)?;
    let verdict = Verdict::new(Criterion::SingleDirection, system).settle(direction_witness(system));
    Ok(attach_admissibility(verdict, system, horizon))
}

fn direction_witness(system: &MoranSystem) -> Option<DivisibilityWitness> {
    first_indivisible(system, |k| {
        let level = system.level(k);
        let nu = &level.zeros.directions[0].nu;
        level.matrix.transpose().mul_vec(nu).0
    })
}

/// Shapes of upper or lower triangular matrices with repeated entries
/// along rows or columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Template {
    /// Row i is (0, …, 0, aᵢ, …, aᵢ).
    UpperRows,
    /// Row i is (0, …, 0, aᵢ, aᵢ₊₁, …, aₙ).
    UpperColumns,
    /// Row i is (a₁, …, aᵢ, 0, …, 0).
    LowerColumns,
    /// Row i is (aᵢ, …, aᵢ, 0, …, 0).
    LowerRows,
}

impl Template {
    pub const ALL: [Template; 4] = [
        Template::UpperRows,
        Template::UpperColumns,
        Template::LowerColumns,
        Template::LowerRows,
    ];

    /// Entry (i, j) of the template filled with a.
    fn entry<'a>(&self, a: &'a [BigInt], i: usize, j: usize) -> Option<&'a BigInt> {
        match self {
            Template::UpperRows => (j >= i).then(|| &a[i]),
            Template::UpperColumns => (j >= i).then(|| &a[j]),
            Template::LowerColumns => (j <= i).then(|| &a[j]),
            Template::LowerRows => (j <= i).then(|| &a[i]),
        }
    }

    /// The parameters a when `r` has this shape.
    pub fn parameters(&self, r: &IntMatrix) -> Option<Vec<BigInt>> {
        let n = r.dim();
        let a = r.diag();
        for i in 0..n {
            for j in 0..n {
                let want = self.entry(&a, i, j);
                let got = r.get(i, j);
                let ok = match want {
                    Some(w) => got == w,
                    None => got.is_zero(),
                };
                if !ok {
                    return None;
                }
            }
        }
        Some(a)
    }

    pub fn build(&self, a: &[i64]) -> IntMatrix {
        let a: Vec<BigInt> = a.iter().map(|&x| BigInt::from(x)).collect();
        let n = a.len();
        let entries = (0..n * n)
            .map(|idx| self.entry(&a, idx / n, idx % n).cloned().unwrap_or_default())
            .collect();
        IntMatrix::new(n, entries).expect("square by construction")
    }
}

/// The first template matching `r`, with its parameters.
pub fn match_template(r: &IntMatrix) -> Option<(Template, Vec<BigInt>)> {
    Template::ALL
        .iter()
        .find_map(|t| t.parameters(r).map(|a| (*t, a)))
}

/// Triangular templates with one zero direction per level: spectral iff
/// m | aᵢ⁽ᵏ⁾ for all k ≥ 2 and all i.
pub fn decide_triangular(system: &MoranSystem) -> Result<Verdict> {
    require_valid(system)?;
    require_odd_prime(system)?;
    let mut params = Vec::new();
    for (i, level) in system.stored_levels().enumerate() {
        match match_template(&level.matrix) {
            Some((_, a)) => params.push(a),
            None => return Err(Error::TemplateMismatch { level: i + 1 }),
        }
    }
    require_single_direction(system)?;
    let witness = first_indivisible(system, |k| params[system.level_slot(k)].clone());
    Ok(Verdict::new(Criterion::TriangularTemplate, system).settle(witness))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GammaClass {
    /// a + b + c + d ≡ 0 mod 3; zeros along ν = (1, 1).
    Gamma1,
    /// d − c ≡ a − b mod 3; zeros along ν = (1, 2).
    Gamma2,
    Neither,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GammaClassification {
    pub class: GammaClass,
    /// The single zero direction of the mask.
    pub nu: IntVector,
}

/// Classifies D = {0, (a,b), (c,d)} ⊂ ℤ² with |ad − bc| = 1 for m = 3 and
/// cross-checks the implied direction against the residue computation.
pub fn classify_gamma(d: &DigitSet) -> Result<GammaClassification> {
    if d.dim() != 2 || d.len() != 3 {
        return Err(Error::InvalidParameter(
            "expected three digits in the plane".into(),
        ));
    }
    let mut rest = d.iter().filter(|v| !v.is_zero());
    let (Some(u), Some(v), None) = (rest.next(), rest.next(), rest.next()) else {
        return Err(Error::InvalidParameter("the digit set must contain the origin".into()));
    };
    let (a, b, c, dd) = (&u.0[0], &u.0[1], &v.0[0], &v.0[1]);
    let det = a * dd - b * c;
    if det != BigInt::from(1) && det != BigInt::from(-1) {
        return Err(Error::DeterminantViolation { det: det.to_string() });
    }
    let three = BigInt::from(3);
    let class = if (a + b + c + dd).is_multiple_of(&three) {
        GammaClass::Gamma1
    } else if (dd - c - a + b).is_multiple_of(&three) {
        GammaClass::Gamma2
    } else {
        GammaClass::Neither
    };
    let zeros = find_zero_directions(d, 3)?;
    let [dir] = zeros.directions.as_slice() else {
        return Err(Error::ModelViolation(format!(
            "unit-determinant digit set has {} zero directions",
            zeros.len()
        )));
    };
    let implied = match class {
        GammaClass::Gamma1 => Some(IntVector::from_i64s(&[1, 1])),
        GammaClass::Gamma2 => Some(IntVector::from_i64s(&[1, 2])),
        GammaClass::Neither => None,
    };
    if let Some(nu) = &implied {
        if *nu != dir.nu {
            return Err(Error::ModelViolation(format!(
                "class predicts direction {nu}, residues give {}",
                dir.nu
            )));
        }
    }
    Ok(GammaClassification {
        class,
        nu: dir.nu.clone(),
    })
}

/// Planar m = 3 systems whose digit sets all lie in Γ₁ ∪ Γ₂: spectral iff
/// (1/3)(1, i)ᵗRₖ ∈ ℤ² for Dₖ ∈ Γᵢ and k ≥ 2.
pub fn decide_gamma(system: &MoranSystem) -> Result<Verdict> {
    require_valid(system)?;
    if system.prime() != 3 || system.dim() != 2 {
        return Err(Error::HypothesisViolation("needs m = 3 in the plane".into()));
    }
    for (i, level) in system.stored_levels().enumerate() {
        let g = classify_gamma(&level.digits)?;
        if g.class == GammaClass::Neither {
            return Err(Error::HypothesisViolation(format!(
                "level {} lies in neither class (direction {})",
                i + 1,
                g.nu
            )));
        }
    }
    let mut verdict = Verdict::new(Criterion::GammaClasses, system).settle(direction_witness(system));
    verdict = attach_admissibility(verdict, system, None);
    Ok(verdict)
}

/// Several zero directions allowed: if every level k ≥ 2 has a direction ν
/// with νᵗRₖ ≡ 0 mod m and the tail is admissible, the measure is spectral.
/// A missing direction yields Unknown.
pub fn decide_sufficient(system: &MoranSystem) -> Result<Verdict> {
    require_valid(system)?;
    let mut verdict = Verdict::new(Criterion::DirectionSufficiency, system);
    let missing = system
        .representative_tail()
        .into_iter()
        .find(|&k| find_admissible_direction(system, k).is_none());
    match missing {
        Some(k) => {
            verdict
                .caveats
                .push(format!("level {k} has no direction ν with νᵗR ≡ 0 mod m; the criterion is only sufficient"));
            Ok(verdict)
        }
        None => {
            verdict.outcome = Outcome::Spectral;
            Ok(attach_admissibility(verdict, system, None))
        }
    }
}

/// For diagonal systems: whether every coordinate is divisible by m on
/// infinitely many levels, i.e. on some cycle level.
pub fn has_infinite_orthogonal_set(system: &MoranSystem) -> Result<bool> {
    require_diagonal(system)?;
    let m = BigInt::from(system.prime());
    let n = system.dim();
    Ok((0..n).all(|i| {
        system
            .cycle()
            .iter()
            .any(|l| l.matrix.get(i, i).is_multiple_of(&m))
    }))
}

/// Picks the sharpest applicable criterion from the structure of the levels.
pub fn decide(system: &MoranSystem) -> Result<Verdict> {
    require_valid(system)?;
    if system.prime() == 2 {
        let mut v = Verdict::new(Criterion::DirectionSufficiency, system);
        v.caveats.push("m = 2 lies outside the divisibility criteria".into());
        return Ok(v);
    }
    if system.stored_levels().all(|l| l.matrix.is_diagonal()) {
        let mut v = decide_diagonal(system)?;
        if v.outcome == Outcome::NotSpectral {
            let infinite = has_infinite_orthogonal_set(system)?;
            v.caveats.push(format!(
                "infinite orthogonal set guaranteed by cycle divisibility: {}",
                if infinite { "yes" } else { "no" }
            ));
        }
        return Ok(v);
    }
    let single = system.stored_levels().all(|l| l.zeros.len() == 1);
    if !single {
        return decide_sufficient(system);
    }
    if system
        .stored_levels()
        .all(|l| match_template(&l.matrix).is_some())
    {
        return decide_triangular(system);
    }
    let gamma = system.prime() == 3
        && system.dim() == 2
        && system
            .stored_levels()
            .all(|l| matches!(classify_gamma(&l.digits), Ok(g) if g.class != GammaClass::Neither));
    if gamma {
        return decide_gamma(system);
    }
    decide_phi1(system)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::Level;

    fn b3() -> Vec<Vec<i64>> {
        vec![vec![0, 0], vec![1, 0], vec![1, 1], vec![2, 1], vec![2, 2]]
    }

    fn diag_system(first: [i64; 2], cycle: [i64; 2], digits: &[Vec<i64>], m: u64) -> MoranSystem {
        let l1 = Level::from_rows(&[vec![first[0], 0], vec![0, first[1]]], digits, m).unwrap();
        let lc = Level::from_rows(&[vec![cycle[0], 0], vec![0, cycle[1]]], digits, m).unwrap();
        MoranSystem::new(m, vec![l1], vec![lc]).unwrap()
    }

    #[test]
    fn diagonal_examples() {
        let s = diag_system([5, 5], [10, 5], &b3(), 5);
        let v = decide_diagonal(&s).unwrap();
        assert_eq!(v.outcome, Outcome::Spectral);
        assert!(has_infinite_orthogonal_set(&s).unwrap());

        let s = diag_system([5, 5], [6, 5], &b3(), 5);
        let v = decide_diagonal(&s).unwrap();
        assert_eq!(v.outcome, Outcome::NotSpectral);
        let w = v.witness.unwrap();
        assert_eq!((w.level, w.index), (2, 1));
        assert!(!has_infinite_orthogonal_set(&s).unwrap());

        let s = diag_system([3, 3], [3, 3], &[vec![0, 0], vec![1, 0], vec![0, 1]], 3);
        assert_eq!(decide_diagonal(&s).unwrap().outcome, Outcome::Spectral);
    }

    #[test]
    fn preamble_only_divisibility_is_finite() {
        let d = b3();
        let l1 = Level::from_rows(&[vec![5, 0], vec![0, 5]], &d, 5).unwrap();
        let l2 = Level::from_rows(&[vec![10, 0], vec![0, 10]], &d, 5).unwrap();
        let lc = Level::from_rows(&[vec![6, 0], vec![0, 7]], &d, 5).unwrap();
        let s = MoranSystem::new(5, vec![l1, l2], vec![lc]).unwrap();
        assert!(!has_infinite_orthogonal_set(&s).unwrap());
        let v = decide_diagonal(&s).unwrap();
        assert_eq!(v.witness.unwrap().level, 3);
    }

    #[test]
    fn non_diagonal_rejected() {
        let d = vec![vec![0, 0], vec![1, 2], vec![1, 3]];
        let l = Level::from_rows(&[vec![3, 3], vec![0, 3]], &d, 3).unwrap();
        let s = MoranSystem::new(3, vec![], vec![l]).unwrap();
        assert!(matches!(decide_diagonal(&s), Err(Error::HypothesisViolation(_))));
        assert!(matches!(has_infinite_orthogonal_set(&s), Err(Error::HypothesisViolation(_))));
    }

    fn upper(a: i64, b: i64, digits: &[Vec<i64>]) -> Level {
        Level::from_rows(&[vec![a, a], vec![0, b]], digits, 3).unwrap()
    }

    #[test]
    fn upper_triangular_both_sides() {
        let b1 = vec![vec![0, 0], vec![1, 2], vec![1, 3]];
        let b2 = vec![vec![0, 0], vec![2, 3], vec![3, 5]];
        let s = MoranSystem::new(3, vec![upper(4, 5, &b1)], vec![upper(3, 6, &b2), upper(6, 3, &b1)]).unwrap();
        for v in [decide_phi1(&s).unwrap(), decide_triangular(&s).unwrap(), decide_gamma(&s).unwrap()] {
            assert_eq!(v.outcome, Outcome::Spectral, "{:?}", v);
        }
        assert!(decide_phi1(&s).unwrap().admissibility.unwrap().unconditional);

        let s = MoranSystem::new(3, vec![upper(3, 3, &b1)], vec![upper(3, 3, &b2), upper(4, 3, &b1)]).unwrap();
        for v in [decide_phi1(&s).unwrap(), decide_triangular(&s).unwrap()] {
            assert_eq!(v.outcome, Outcome::NotSpectral);
            let w = v.witness.unwrap();
            assert_eq!(w.level, 3);
        }
        assert_eq!(decide(&s).unwrap().criterion, Criterion::TriangularTemplate);
    }

    #[test]
    fn templates_round_trip() {
        for t in Template::ALL {
            let r = t.build(&[3, 6, 9]);
            assert_eq!(t.parameters(&r).unwrap(), r.diag());
        }
        let r = Template::UpperRows.build(&[4, 3]);
        assert_eq!(r.to_rows_i64().unwrap(), vec![vec![4, 4], vec![0, 3]]);
        let r = Template::LowerColumns.build(&[4, 3]);
        assert_eq!(r.to_rows_i64().unwrap(), vec![vec![4, 0], vec![4, 3]]);
        assert!(match_template(&IntMatrix::from_rows(&[vec![3, 1], vec![1, 3]]).unwrap()).is_none());
    }

    #[test]
    fn triangular_template_witness() {
        let d = vec![vec![0, 0], vec![1, 0], vec![0, 1]];
        let lv = |a: [i64; 2]| Level::new(Template::LowerRows.build(&a), DigitSet::from_vecs(&d).unwrap(), 3).unwrap();
        let s = MoranSystem::new(3, vec![lv([3, 3])], vec![lv([4, 3])]).unwrap();
        let v = decide_triangular(&s).unwrap();
        assert_eq!(v.outcome, Outcome::NotSpectral);
        let w = v.witness.unwrap();
        assert_eq!((w.level, w.index), (2, 1));
        let rotated = Level::from_rows(&[vec![3, 1], vec![1, 3]], &d, 3).unwrap();
        let s = MoranSystem::new(3, vec![], vec![rotated]).unwrap();
        assert!(matches!(decide_triangular(&s), Err(Error::TemplateMismatch { level: 1 })));
    }

    #[test]
    fn gamma_examples() {
        let cls = |d: &[Vec<i64>]| classify_gamma(&DigitSet::from_vecs(d).unwrap());
        let g = cls(&[vec![0, 0], vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(g.class, GammaClass::Gamma2);
        assert_eq!(g.nu, IntVector::from_i64s(&[1, 2]));
        let g = cls(&[vec![0, 0], vec![1, 0], vec![1, 1]]).unwrap();
        assert_eq!(g.class, GammaClass::Gamma1);
        assert_eq!(g.nu, IntVector::from_i64s(&[1, 1]));
        assert!(matches!(
            cls(&[vec![0, 0], vec![2, 0], vec![0, 2]]),
            Err(Error::DeterminantViolation { det }) if det == "4"
        ));
        let g = cls(&[vec![0, 0], vec![1, 0], vec![2, 1]]).unwrap();
        assert_eq!(g.class, GammaClass::Neither);
        assert_eq!(g.nu, IntVector::from_i64s(&[1, 0]));
    }

    #[test]
    fn routing() {
        let s = diag_system([5, 5], [10, 5], &b3(), 5);
        let v = decide(&s).unwrap();
        assert_eq!((v.outcome, v.criterion), (Outcome::Spectral, Criterion::DiagonalDivisibility));
        let two = Level::from_rows(&[vec![2, 0], vec![0, 2]], &[vec![0, 0], vec![1, 0]], 2).unwrap();
        let s = MoranSystem::new(2, vec![], vec![two]).unwrap();
        assert_eq!(decide(&s).unwrap().outcome, Outcome::Unknown);
        assert!(matches!(decide_diagonal(&s), Err(Error::HypothesisViolation(_))));
    }
}
