//! Verification results shared by the analyzer, mask and admissibility checks.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::exact::{IntVector, RationalVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Orthogonality,
    Completeness,
    Exactness,
    Admissibility,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    /// Two labels whose difference misses the zero set.
    Pair { left: IntVector, right: IntVector },
    /// A sample point with the offending value.
    Point { point: Vec<f64>, value: f64 },
    /// A zero coset point within β of the image of the inflated box under
    /// the inverse of the product of `length` matrices starting after `start`.
    Coset {
        start: usize,
        length: usize,
        coset_point: RationalVector,
        distance: f64,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub kind: ReportKind,
    pub pass: bool,
    pub witnesses: Vec<Witness>,
    pub margins: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(kind: ReportKind, witnesses: Vec<Witness>) -> Self {
        VerificationReport {
            kind,
            pass: witnesses.is_empty(),
            witnesses,
            margins: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn margin(mut self, key: &str, value: f64) -> Self {
        self.margins.insert(key.to_string(), value);
        self
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }
}
