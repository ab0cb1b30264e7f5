//! Eventually periodic Moran systems and their validation.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{check_contraction, operator_norm_upper, rat, rational_inverse, IntMatrix, Rational};
use crate::mask::{find_zero_directions, is_prime, DigitSet, ZeroStructure};

/// One level (Rₖ, Dₖ) together with the zero structure of its mask.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Level {
    #[serde(rename = "R")]
    pub matrix: IntMatrix,
    #[serde(rename = "D")]
    pub digits: DigitSet,
    pub zeros: ZeroStructure,
}

impl Level {
    /// Computes the zero structure; needs `#D = m` with m prime.
    pub fn new(matrix: IntMatrix, digits: DigitSet, m: u64) -> Result<Self> {
        let zeros = find_zero_directions(&digits, m)?;
        Ok(Level {
            matrix,
            digits,
            zeros,
        })
    }

    pub fn from_rows(rows: &[Vec<i64>], digits: &[Vec<i64>], m: u64) -> Result<Self> {
        Level::new(IntMatrix::from_rows(rows)?, DigitSet::from_vecs(digits)?, m)
    }

    pub fn with_zeros(matrix: IntMatrix, digits: DigitSet, zeros: ZeroStructure) -> Self {
        Level {
            matrix,
            digits,
            zeros,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemParams {
    /// Uniform bound on ‖Rₖ⁻¹‖.
    pub r: f64,
    #[serde(serialize_with = "ser_rational")]
    pub delta: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub beta: Rational,
    /// Norm-equivalence constant in the tail estimates.
    pub c: f64,
}

fn ser_rational<S: serde::Serializer>(x: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", x.numer(), x.denom()))
}

/// Optional parameter overrides; anything left `None` takes its default.
#[derive(Clone, Debug, Default)]
pub struct ParamOverrides {
    pub r: Option<f64>,
    pub delta: Option<Rational>,
    pub beta: Option<Rational>,
    pub c: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Condition {
    /// ‖Rₖ⁻¹‖ ≤ r < 1 for every level.
    Contraction,
    /// Rₖ must be nonsingular and expanding.
    Expansion,
    /// Digit sets must stay bounded.
    BoundedDigits,
    /// #Dₖ = m and the mask zeros form coset lines.
    ZeroSetModel,
    Primality,
    Dimension,
    Parameters,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Condition::Contraction => "contraction",
            Condition::Expansion => "expansion",
            Condition::BoundedDigits => "bounded-digits",
            Condition::ZeroSetModel => "zero-set-model",
            Condition::Primality => "primality",
            Condition::Dimension => "dimension",
            Condition::Parameters => "parameters",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub condition: Condition,
    pub level: Option<usize>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(condition: Condition, level: Option<usize>, message: impl Into<String>) -> Self {
        Diagnostic {
            condition,
            level,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.level {
            Some(k) => write!(f, "[{}] level {}: {}", self.condition, k, self.message),
            None => write!(f, "[{}] {}", self.condition, self.message),
        }
    }
}

/// A Moran system with levels R₁, R₂, … given as a finite preamble followed
/// by a cycle repeated forever. Levels are 1-based.
#[derive(Clone, Debug, Serialize)]
pub struct MoranSystem {
    dim: usize,
    prime: u64,
    preamble: Vec<Level>,
    cycle: Vec<Level>,
    params: SystemParams,
}

impl MoranSystem {
    pub fn new(prime: u64, preamble: Vec<Level>, cycle: Vec<Level>) -> Result<Self> {
        Self::with_params(prime, preamble, cycle, ParamOverrides::default())
    }

    pub fn with_params(
        prime: u64,
        preamble: Vec<Level>,
        cycle: Vec<Level>,
        overrides: ParamOverrides,
    ) -> Result<Self> {
        let system = Self::build_unchecked(prime, preamble, cycle, overrides);
        let diags = system.validate();
        if diags.is_empty() {
            Ok(system)
        } else {
            Err(Error::InvalidSystem(diags))
        }
    }

    /// Assembles a system without validating it. Parameters left unset get
    /// their defaults; r defaults to the largest certified ‖Rₖ⁻¹‖ bound.
    pub fn build_unchecked(
        prime: u64,
        preamble: Vec<Level>,
        cycle: Vec<Level>,
        overrides: ParamOverrides,
    ) -> Self {
        let dim = cycle
            .first()
            .or(preamble.first())
            .map(|l| l.matrix.dim())
            .unwrap_or(0);
        let r = overrides.r.unwrap_or_else(|| {
            preamble
                .iter()
                .chain(&cycle)
                .map(|l| match rational_inverse(&l.matrix) {
                    Ok(inv) => operator_norm_upper(&inv),
                    Err(_) => f64::INFINITY,
                })
                .fold(0.0, f64::max)
        });
        let params = SystemParams {
            r,
            delta: overrides.delta.unwrap_or_else(|| rat(1, 8)),
            beta: overrides
                .beta
                .unwrap_or_else(|| rat(1, 8 * prime.max(1) as i64)),
            c: overrides.c.unwrap_or(1.0),
        };
        MoranSystem {
            dim,
            prime,
            preamble,
            cycle,
            params,
        }
    }

    /// Every violated condition, in level order.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let m = self.prime;
        if !is_prime(m) {
            out.push(Diagnostic::new(Condition::Primality, None, format!("m = {m} is not prime")));
        }
        if self.cycle.is_empty() {
            out.push(Diagnostic::new(Condition::Parameters, None, "cycle must contain at least one level"));
        }
        let p = &self.params;
        let quarter = rat(1, 4);
        for (name, v) in [("delta", &p.delta), ("beta", &p.beta)] {
            if !v.is_positive() || *v >= quarter {
                out.push(Diagnostic::new(
                    Condition::Parameters,
                    None,
                    format!("{name} = {v} must lie in (0, 1/4)"),
                ));
            }
        }
        if !(p.c.is_finite() && p.c > 0.0) {
            out.push(Diagnostic::new(Condition::Parameters, None, "c must be positive"));
        }
        // a singular level already explains an infinite r
        let singular = self.stored_levels().any(|l| l.matrix.det().is_zero());
        if !(p.r.is_finite() && p.r > 0.0 && p.r < 1.0) && !(singular && p.r.is_infinite()) {
            out.push(Diagnostic::new(
                Condition::Contraction,
                None,
                format!("r = {} must lie in (0, 1)", p.r),
            ));
        }
        for (k, level) in self.indexed_levels() {
            let n = level.matrix.dim();
            if n != self.dim || level.digits.dim() != self.dim {
                out.push(Diagnostic::new(
                    Condition::Dimension,
                    Some(k),
                    format!("expected dimension {}, found matrix {} and digits {}", self.dim, n, level.digits.dim()),
                ));
                continue;
            }
            let det = level.matrix.det();
            if det.is_zero() {
                out.push(Diagnostic::new(Condition::Expansion, Some(k), "matrix is singular"));
                continue;
            }
            if p.r.is_finite() && p.r > 0.0 {
                match check_contraction(&level.matrix, p.r) {
                    Ok(true) => {}
                    _ => out.push(Diagnostic::new(
                        Condition::Contraction,
                        Some(k),
                        format!("inverse norm exceeds r = {}", p.r),
                    )),
                }
            }
            if level.digits.len() as u64 != m {
                out.push(Diagnostic::new(
                    Condition::ZeroSetModel,
                    Some(k),
                    format!("digit set has {} elements, expected {m}", level.digits.len()),
                ));
            } else if level.zeros.is_empty() {
                out.push(Diagnostic::new(
                    Condition::ZeroSetModel,
                    Some(k),
                    "mask has no zero direction of coset-line form",
                ));
            } else if is_prime(m) {
                if let Ok(z) = find_zero_directions(&level.digits, m) {
                    if z != level.zeros {
                        out.push(Diagnostic::new(
                            Condition::ZeroSetModel,
                            Some(k),
                            "declared zero directions differ from the computed ones",
                        ));
                    }
                }
            }
        }
        out
    }

    fn indexed_levels(&self) -> impl Iterator<Item = (usize, &Level)> {
        self.preamble.iter().chain(&self.cycle).enumerate().map(|(i, l)| (i + 1, l))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn preamble(&self) -> &[Level] {
        &self.preamble
    }

    pub fn cycle(&self) -> &[Level] {
        &self.cycle
    }

    pub fn preamble_len(&self) -> usize {
        self.preamble.len()
    }

    pub fn period(&self) -> usize {
        self.cycle.len()
    }

    /// Level k ≥ 1.
    pub fn level(&self, k: usize) -> &Level {
        assert!(k >= 1, "levels are 1-based");
        if k <= self.preamble.len() {
            &self.preamble[k - 1]
        } else {
            &self.cycle[(k - 1 - self.preamble.len()) % self.cycle.len()]
        }
    }

    /// Position of level k among the distinct stored levels (preamble first).
    pub fn level_slot(&self, k: usize) -> usize {
        if k <= self.preamble.len() {
            k - 1
        } else {
            self.preamble.len() + (k - 1 - self.preamble.len()) % self.cycle.len()
        }
    }

    pub fn stored_levels(&self) -> impl Iterator<Item = &Level> {
        self.preamble.iter().chain(&self.cycle)
    }

    /// The levels k ≥ 2 whose values recur: preamble tail and one cycle.
    /// Every level index ≥ 2 has the same data as one of these.
    pub fn representative_tail(&self) -> Vec<usize> {
        let extra = usize::from(self.preamble.is_empty());
        (2..=self.preamble.len() + self.cycle.len() + extra).collect()
    }

    /// Largest Euclidean digit norm over all levels.
    pub fn digit_bound(&self) -> f64 {
        self.stored_levels().map(|l| l.digits.max_norm()).fold(0.0, f64::max)
    }

    /// Replaces the parameters and revalidates.
    pub fn reparametrized(&self, overrides: ParamOverrides) -> Result<Self> {
        Self::with_params(self.prime, self.preamble.clone(), self.cycle.clone(), overrides)
    }

    pub(crate) fn replace_first(&self, level: Level, r: f64) -> Self {
        let mut s = self.clone();
        if s.preamble.is_empty() {
            // keep the cycle intact and move level 1 out of it
            s.preamble.push(level);
            s.cycle.rotate_left(1);
        } else {
            s.preamble[0] = level;
        }
        s.params.r = r;
        s
    }
}
