//! JSON encodings of spaces, operators and scalars.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use normlab_core::spaces::Exponent;
use normlab_core::{make_space, Complex64, Descriptor, Field, NormedSpace, Operator, Scalar, SumKind};
use serde_json::{json, Map, Value};

use crate::error::CliError;

/// A JSON number, or a string for values JSON cannot hold.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn provenance(exact: bool) -> Value {
    json!(if exact { "exact" } else { "sampled" })
}

pub fn scalar<S: Scalar>(s: S) -> Value {
    if S::IS_COMPLEX {
        let c = s.to_complex();
        json!([num(c.re), num(c.im)])
    } else {
        num(s.real())
    }
}

pub fn complex(c: Complex64) -> Value {
    json!([num(c.re), num(c.im)])
}

pub fn vector<S: Scalar>(v: &[S]) -> Value {
    Value::Array(v.iter().map(|x| scalar(*x)).collect())
}

/// Row-major nested arrays.
pub fn matrix<S: Scalar>(m: &DMatrix<S>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| Value::Array((0..m.ncols()).map(|c| scalar(m[(r, c)])).collect()))
            .collect(),
    )
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn as_f64(v: &Value, what: &str) -> Result<f64, CliError> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| bad(format!("{what} is not a number"))),
        Value::String(s) if s == "inf" => Ok(f64::INFINITY),
        Value::String(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
        _ => Err(bad(format!("{what} is not a number"))),
    }
}

fn as_usize(v: &Value, what: &str) -> Result<usize, CliError> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| bad(format!("{what} is not a non-negative integer")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>, CliError> {
    v.as_array().ok_or_else(|| bad(format!("{what} is not an array")))
}

fn real_rows(v: &Value, what: &str) -> Result<Vec<Vec<f64>>, CliError> {
    as_array(v, what)?
        .iter()
        .map(|row| as_array(row, what)?.iter().map(|x| as_f64(x, what)).collect())
        .collect()
}

fn field_of(v: &Value) -> Result<Field, CliError> {
    match v.as_str() {
        Some("real") => Ok(Field::Real),
        Some("complex") => Ok(Field::Complex),
        _ => Err(bad("field must be \"real\" or \"complex\"")),
    }
}

fn single_key<'a>(v: &'a Value, what: &str) -> Result<(&'a str, &'a Value), CliError> {
    let obj = v.as_object().ok_or_else(|| bad(format!("{what} is not an object")))?;
    if obj.len() != 1 {
        return Err(bad(format!("{what} must have exactly one key")));
    }
    let (k, v) = obj.iter().next().expect("one key");
    Ok((k.as_str(), v))
}

fn descriptor(field: Field, v: &Value) -> Result<Descriptor, CliError> {
    let (kind, body) = single_key(v, "descriptor")?;
    let get = |k: &str| body.get(k).ok_or_else(|| bad(format!("{kind} descriptor needs \"{k}\"")));
    match kind {
        "lp" => {
            let p = as_f64(get("p")?, "p")?;
            let p = if p == f64::INFINITY {
                Exponent::Infinite
            } else {
                Exponent::Finite(p)
            };
            Ok(Descriptor::Lp {
                p,
                dim: as_usize(get("dim")?, "dim")?,
            })
        }
        "polyhedral" => Ok(Descriptor::Polyhedral {
            vertices: real_rows(get("vertices")?, "vertices")?,
        }),
        "sum" => {
            let k = match get("kind")?.as_str() {
                Some("l1") => SumKind::L1,
                Some("linf") => SumKind::Linf,
                _ => return Err(bad("sum kind must be \"l1\" or \"linf\"")),
            };
            let parts = as_array(get("parts")?, "parts")?
                .iter()
                .map(|p| {
                    // a part is a full space object or a bare descriptor
                    if p.get("descriptor").is_some() {
                        space_from_value(p)
                    } else {
                        build(field, descriptor(field, p)?)
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Descriptor::Sum { kind: k, parts })
        }
        "sup_subspace" => Ok(Descriptor::SupSubspace {
            nodes: as_array(get("nodes")?, "nodes")?
                .iter()
                .map(|x| as_f64(x, "nodes"))
                .collect::<Result<_, _>>()?,
            basis: real_rows(get("basis")?, "basis")?,
        }),
        other => Err(bad(format!("unknown descriptor kind \"{other}\""))),
    }
}

fn build(field: Field, d: Descriptor) -> Result<NormedSpace, CliError> {
    Ok(make_space(field, d)?)
}

/// Accepts a bare space object or a report carrying one under `"space"`.
pub fn space_from_value(v: &Value) -> Result<NormedSpace, CliError> {
    if v.get("field").is_none() {
        if let Some(inner) = v.get("space") {
            return space_from_value(inner);
        }
    }
    let field = field_of(v.get("field").ok_or_else(|| bad("space needs \"field\""))?)?;
    let d = descriptor(field, v.get("descriptor").ok_or_else(|| bad("space needs \"descriptor\""))?)?;
    build(field, d)
}

pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))
}

pub fn space_to_value(s: &NormedSpace) -> Value {
    let d = match s.descriptor() {
        Descriptor::Lp { p, dim } => {
            let p = match p {
                Exponent::Finite(p) => num(*p),
                Exponent::Infinite => json!("inf"),
            };
            json!({"lp": {"p": p, "dim": dim}})
        }
        Descriptor::Polyhedral { vertices } => json!({"polyhedral": {"vertices": vertices}}),
        Descriptor::Sum { kind, parts } => {
            let kind = match kind {
                SumKind::L1 => "l1",
                SumKind::Linf => "linf",
            };
            let parts: Vec<Value> = parts.iter().map(space_to_value).collect();
            json!({"sum": {"kind": kind, "parts": parts}})
        }
        Descriptor::SupSubspace { nodes, basis } => {
            json!({"sup_subspace": {"nodes": nodes, "basis": basis}})
        }
    };
    json!({"field": s.field().name(), "descriptor": d})
}

/// An operator over either field.
#[derive(Clone, Debug)]
pub enum AnyOperator {
    Real(Operator<f64>),
    Complex(Operator<Complex64>),
}

fn entry(v: &Value) -> Result<Complex64, CliError> {
    match v {
        Value::Array(a) if a.len() == 2 => Ok(Complex64::new(as_f64(&a[0], "entry")?, as_f64(&a[1], "entry")?)),
        _ => Ok(Complex64::new(as_f64(v, "entry")?, 0.0)),
    }
}

/// Parses `{"matrix": [[...]], "space": ...}`. A missing or string-valued
/// `space` refers to `fallback`.
pub fn operator_from_value(v: &Value, fallback: Option<&NormedSpace>) -> Result<AnyOperator, CliError> {
    let space = match v.get("space") {
        Some(s @ Value::Object(_)) => space_from_value(s)?,
        _ => fallback
            .cloned()
            .ok_or_else(|| CliError::Usage("operator refers to --space, which was not given".into()))?,
    };
    let rows = as_array(v.get("matrix").ok_or_else(|| bad("operator needs \"matrix\""))?, "matrix")?;
    let d = space.dim();
    if rows.len() != d {
        return Err(bad(format!("matrix has {} rows, space has dimension {d}", rows.len())));
    }
    let mut entries = Vec::with_capacity(d * d);
    for row in rows {
        let row = as_array(row, "matrix row")?;
        if row.len() != d {
            return Err(bad(format!("matrix row has {} entries, expected {d}", row.len())));
        }
        for x in row {
            entries.push(entry(x)?);
        }
    }
    if space.is_complex() {
        let m = DMatrix::from_row_slice(d, d, &entries);
        Ok(AnyOperator::Complex(Operator::on(&space, m)?))
    } else {
        if entries.iter().any(|c| c.im != 0.0) {
            return Err(bad("complex entries on a real space"));
        }
        let re: Vec<f64> = entries.iter().map(|c| c.re).collect();
        Ok(AnyOperator::Real(Operator::on(&space, DMatrix::from_row_slice(d, d, &re))?))
    }
}

pub fn operator_to_value<S: Scalar>(t: &Operator<S>) -> Value {
    let mut m = Map::new();
    m.insert("matrix".into(), matrix(t.matrix()));
    m.insert("space".into(), space_to_value(t.domain()));
    Value::Object(m)
}
