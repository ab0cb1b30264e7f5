//! JSON system descriptions.
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "prime": 3,
//!   "preamble": [],
//!   "cycle": [{ "R": [[3, 0], [0, 3]], "D": [[0, 0], [1, 0], [0, 1]] }],
//!   "params": { "delta": "1/8", "beta": "1/24" }
//! }
//! ```
//!
//! Levels may list their zero directions under `"zeros"`; they are
//! recomputed and compared. Parameters accept numbers or `"p/q"` strings.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::exact::{parse_rational, rational_to_f64, IntMatrix, IntVector, Rational};
use crate::mask::{find_zero_directions, DigitSet, ZeroDirection, ZeroStructure};
use crate::system::{Condition, Diagnostic, Level, MoranSystem, ParamOverrides};

const TOP_KEYS: [&str; 8] = ["dimension", "prime", "preamble", "cycle", "params", "name", "description", "growth"];

pub fn parse_system(text: &str) -> Result<MoranSystem> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    system_from_value(&value)
}

pub fn load_system(path: &std::path::Path) -> Result<MoranSystem> {
    parse_system(&std::fs::read_to_string(path)?)
}

pub fn system_from_value(value: &Value) -> Result<MoranSystem> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Parse("the system description must be a JSON object".into()))?;
    for key in obj.keys() {
        if !TOP_KEYS.contains(&key.as_str()) {
            return Err(Error::Parse(format!("unknown key {key:?}")));
        }
    }
    let mut diags = Vec::new();
    if obj.contains_key("growth") {
        diags.push(Diagnostic::new(
            Condition::Contraction,
            None,
            "growth rules cannot be encoded as an eventually periodic system; growing matrices or \
             digits break the uniform contraction and bounded-digit requirements",
        ));
    }
    let prime = obj
        .get("prime")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse("\"prime\" must be a positive integer".into()))?;
    let dimension = match obj.get("dimension") {
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| Error::Parse("\"dimension\" must be a positive integer".into()))? as usize,
        ),
        None => None,
    };
    let preamble = level_list(obj, "preamble", prime, 0, &mut diags)?;
    let offset = preamble.len();
    let cycle = level_list(obj, "cycle", prime, offset, &mut diags)?;
    let overrides = params(obj.get("params"))?;
    if !diags.is_empty() {
        return Err(Error::InvalidSystem(diags));
    }
    let system = MoranSystem::build_unchecked(prime, preamble, cycle, overrides);
    let mut diags = system.validate();
    if let Some(n) = dimension {
        if n != system.dim() {
            diags.insert(
                0,
                Diagnostic::new(
                    Condition::Dimension,
                    None,
                    format!("declared dimension {n}, levels have dimension {}", system.dim()),
                ),
            );
        }
    }
    if diags.is_empty() {
        Ok(system)
    } else {
        Err(Error::InvalidSystem(diags))
    }
}

fn level_list(
    obj: &Map<String, Value>,
    key: &str,
    prime: u64,
    offset: usize,
    diags: &mut Vec<Diagnostic>,
) -> Result<Vec<Level>> {
    let Some(v) = obj.get(key) else {
        return Ok(Vec::new());
    };
    let list = v
        .as_array()
        .ok_or_else(|| Error::Parse(format!("\"{key}\" must be a list of levels")))?;
    let mut out = Vec::with_capacity(list.len());
    for (i, lv) in list.iter().enumerate() {
        if let Some(level) = level(lv, prime, offset + i + 1, diags)? {
            out.push(level);
        }
    }
    Ok(out)
}

/// Integer entry, or a diagnostic when the entry is an expression in the
/// level index.
enum Entry {
    Int(BigInt),
    Growing,
}

fn entry(v: &Value, what: &str) -> Result<Entry> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Entry::Int(BigInt::from(i)))
            } else if let Some(u) = n.as_u64() {
                Ok(Entry::Int(BigInt::from(u)))
            } else {
                Err(Error::Parse(format!("{what} entries must be integers, got {n}")))
            }
        }
        Value::String(s) => {
            if let Ok(i) = s.trim().parse::<BigInt>() {
                Ok(Entry::Int(i))
            } else if s.contains('k') {
                Ok(Entry::Growing)
            } else {
                Err(Error::Parse(format!("{what} entries must be integers, got {s:?}")))
            }
        }
        other => Err(Error::Parse(format!("{what} entries must be integers, got {other}"))),
    }
}

fn int_rows(v: &Value, what: &str) -> Result<(Vec<Vec<BigInt>>, bool)> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Parse(format!("{what} must be a list of rows")))?;
    let mut growing = false;
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Parse(format!("{what} must be a list of rows")))?;
        let mut r = Vec::with_capacity(row.len());
        for x in row {
            match entry(x, what)? {
                Entry::Int(i) => r.push(i),
                Entry::Growing => {
                    growing = true;
                    r.push(BigInt::zero());
                }
            }
        }
        out.push(r);
    }
    Ok((out, growing))
}

fn level(v: &Value, prime: u64, k: usize, diags: &mut Vec<Diagnostic>) -> Result<Option<Level>> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse(format!("level {k} must be an object")))?;
    for key in obj.keys() {
        if !["R", "D", "zeros"].contains(&key.as_str()) {
            return Err(Error::Parse(format!("level {k}: unknown key {key:?}")));
        }
    }
    let (rows, r_grows) = int_rows(
        obj.get("R").ok_or_else(|| Error::Parse(format!("level {k}: missing \"R\"")))?,
        "R",
    )?;
    let (digits, d_grows) = int_rows(
        obj.get("D").ok_or_else(|| Error::Parse(format!("level {k}: missing \"D\"")))?,
        "D",
    )?;
    if r_grows {
        diags.push(Diagnostic::new(
            Condition::Contraction,
            Some(k),
            "matrix entries depend on the level index; no uniform bound r < 1 on the inverse norms can be certified",
        ));
    }
    if d_grows {
        diags.push(Diagnostic::new(
            Condition::BoundedDigits,
            Some(k),
            "digits depend on the level index; the digit sets must stay uniformly bounded",
        ));
    }
    if r_grows || d_grows {
        return Ok(None);
    }
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse(format!("level {k}: \"R\" must be a nonempty square matrix")));
    }
    let matrix = IntMatrix::new(n, rows.into_iter().flatten().collect())?;
    let digits = DigitSet::new(digits.into_iter().map(IntVector).collect())
        .map_err(|e| Error::Parse(format!("level {k}: {e}")))?;
    let zeros = match obj.get("zeros") {
        Some(z) => declared_zeros(z, prime, k)?,
        None => find_zero_directions(&digits, prime).unwrap_or_else(|_| ZeroStructure::empty(prime)),
    };
    Ok(Some(Level::with_zeros(matrix, digits, zeros)))
}

/// Declared directions, scaled so the leading nonzero entry is 1 mod m.
fn declared_zeros(v: &Value, prime: u64, k: usize) -> Result<ZeroStructure> {
    let (rows, growing) = int_rows(v, "zeros")?;
    if growing {
        return Err(Error::Parse(format!("level {k}: zero directions must be integers")));
    }
    let m = BigInt::from(prime);
    let mut directions = Vec::new();
    for row in rows {
        let v = IntVector(row).mod_floor(&m);
        let Some(lead) = v.0.iter().find(|x| !x.is_zero()) else {
            return Err(Error::Parse(format!("level {k}: zero direction must be nonzero mod m")));
        };
        let g = lead.extended_gcd(&m);
        if !g.gcd.abs().is_one() {
            return Err(Error::Parse(format!("level {k}: zero direction not invertible mod m")));
        }
        let nu = v.scale(&g.x).mod_floor(&m);
        let model_compliant = nu.0.iter().all(|x| !x.is_zero());
        directions.push(ZeroDirection { nu, model_compliant });
    }
    directions.sort_by(|a, b| a.nu.cmp(&b.nu));
    directions.dedup();
    Ok(ZeroStructure { prime, directions })
}

fn rational_param(v: &Value, name: &str) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => parse_rational(&n.to_string()).or_else(|_| {
            n.as_f64()
                .and_then(BigRational::from_float)
                .ok_or_else(|| Error::Parse(format!("{name}: not a number")))
        }),
        other => Err(Error::Parse(format!("{name} must be a number or \"p/q\", got {other}"))),
    }
}

fn params(v: Option<&Value>) -> Result<ParamOverrides> {
    let mut out = ParamOverrides::default();
    let Some(v) = v else { return Ok(out) };
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse("\"params\" must be an object".into()))?;
    for (key, val) in obj {
        match key.as_str() {
            "r" => out.r = Some(rational_to_f64(&rational_param(val, "r")?)),
            "c" => out.c = Some(rational_to_f64(&rational_param(val, "c")?)),
            "delta" => out.delta = Some(rational_param(val, "delta")?),
            "beta" => out.beta = Some(rational_param(val, "beta")?),
            other => return Err(Error::Parse(format!("unknown parameter {other:?}"))),
        }
    }
    Ok(out)
}

/// Inverse of [`parse_system`] for systems built in code.
pub fn system_to_value(system: &MoranSystem) -> Value {
    let level = |l: &Level| {
        serde_json::json!({
            "R": l.matrix.to_rows_i64().map(Value::from).unwrap_or(Value::Null),
            "D": l.digits.iter().map(|d| d.0.iter().map(|x| x.to_i64().map(Value::from).unwrap_or_else(|| Value::from(x.to_string()))).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    };
    let p = system.params();
    serde_json::json!({
        "dimension": system.dim(),
        "prime": system.prime(),
        "preamble": system.preamble().iter().map(level).collect::<Vec<_>>(),
        "cycle": system.cycle().iter().map(level).collect::<Vec<_>>(),
        "params": {
            "r": p.r,
            "delta": format!("{}/{}", p.delta.numer(), p.delta.denom()),
            "beta": format!("{}/{}", p.beta.numer(), p.beta.denom()),
            "c": p.c,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    const SIERPINSKI: &str = r#"{
        "dimension": 2, "prime": 3,
        "cycle": [{"R": [[3,0],[0,3]], "D": [[0,0],[1,0],[0,1]]}],
        "params": {"delta": "1/8", "beta": 0.125}
    }"#;

    #[test]
    fn parses_and_defaults() {
        let s = parse_system(SIERPINSKI).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(s.params().delta, rat(1, 8));
        assert_eq!(s.params().beta, rat(1, 8));
        assert_eq!(s.level(1).zeros.directions[0].nu, IntVector::from_i64s(&[1, 2]));
    }

    #[test]
    fn round_trip() {
        let s = parse_system(SIERPINSKI).unwrap();
        let t = system_from_value(&system_to_value(&s)).unwrap();
        assert_eq!(s.cycle(), t.cycle());
        assert_eq!(s.params(), t.params());
    }

    fn diags(text: &str) -> Vec<Diagnostic> {
        match parse_system(text) {
            Err(Error::InvalidSystem(d)) => d,
            other => panic!("expected diagnostics, got {other:?}"),
        }
    }

    #[test]
    fn singular_level() {
        let d = diags(r#"{"prime": 3, "cycle": [{"R": [[3,0],[0,0]], "D": [[0,0],[1,0],[0,1]]}]}"#);
        assert!(d.iter().any(|x| x.condition == Condition::Expansion && x.level == Some(1)));
    }

    #[test]
    fn growth_rejected() {
        let d = diags(
            r#"{"prime": 3, "cycle": [{"R": [[9,0],[0,9]], "D": [[0,0],[1,0],["4^k",1]]}]}"#,
        );
        assert_eq!(d[0].condition, Condition::BoundedDigits);
        let d = diags(
            r#"{"prime": 3, "cycle": [{"R": [[3,"a_k"],[0,3]], "D": [[0,0],[1,0],[0,1]]}]}"#,
        );
        assert_eq!(d[0].condition, Condition::Contraction);
        let d = diags(
            r#"{"prime": 3, "growth": "a_k", "cycle": [{"R": [[3,0],[0,3]], "D": [[0,0],[1,0],[0,1]]}]}"#,
        );
        assert_eq!(d[0].condition, Condition::Contraction);
    }

    #[test]
    fn declared_zeros_checked() {
        let ok = r#"{"prime": 3, "cycle": [{"R": [[3,0],[0,3]], "D": [[0,0],[1,0],[0,1]], "zeros": [[2,1]]}]}"#;
        assert!(parse_system(ok).is_ok());
        let bad = r#"{"prime": 3, "cycle": [{"R": [[3,0],[0,3]], "D": [[0,0],[1,0],[0,1]], "zeros": [[1,1]]}]}"#;
        assert_eq!(diags(bad)[0].condition, Condition::ZeroSetModel);
    }

    #[test]
    fn other_failures() {
        assert!(matches!(parse_system("[1]"), Err(Error::Parse(_))));
        assert!(matches!(parse_system(r#"{"prime": 3, "extra": 1}"#), Err(Error::Parse(_))));
        let d = diags(r#"{"prime": 4, "cycle": [{"R": [[4]], "D": [[0],[1],[2],[3]]}]}"#);
        assert!(d.iter().any(|x| x.condition == Condition::Primality));
        let d = diags(r#"{"dimension": 3, "prime": 3, "cycle": [{"R": [[3]], "D": [[0],[1],[2]]}]}"#);
        assert_eq!(d[0].condition, Condition::Dimension);
    }
}
