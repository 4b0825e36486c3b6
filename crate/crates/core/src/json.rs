//! JSON encoding of complex matrices.
//!
//! A matrix is a list of rows; each entry is `[re, im]`. On input a bare
//! number is accepted as a real entry, and a bare number in place of the whole
//! matrix is read as a 1×1 matrix. Floats are written with the shortest
//! representation that round-trips, so written witnesses re-verify exactly.

use std::collections::BTreeMap;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::linalg::{c64, CMat};
use crate::words::Word;

pub fn matrix_to_value(m: &CMat) -> Value {
    let rows: Vec<Value> = (0..m.nrows())
        .map(|i| {
            Value::Array(
                (0..m.ncols())
                    .map(|j| {
                        let z = m[(i, j)];
                        Value::Array(vec![float(z.re), float(z.im)])
                    })
                    .collect(),
            )
        })
        .collect();
    Value::Array(rows)
}

fn float(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

fn entry(v: &Value) -> Result<(f64, f64)> {
    match v {
        Value::Number(n) => Ok((n.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(parts) if parts.len() == 2 => match (parts[0].as_f64(), parts[1].as_f64()) {
            (Some(re), Some(im)) => Ok((re, im)),
            _ => Err(Error::Parse(format!("matrix entry {v} is not [re, im]"))),
        },
        _ => Err(Error::Parse(format!("matrix entry {v} is not a number or [re, im]"))),
    }
}

pub fn matrix_from_value(v: &Value) -> Result<CMat> {
    if v.is_number() {
        let (re, im) = entry(v)?;
        return Ok(CMat::from_element(1, 1, c64(re, im)));
    }
    let rows = v.as_array().ok_or_else(|| Error::Parse(format!("expected a matrix, found {v}")))?;
    let mut parsed: Vec<Vec<(f64, f64)>> = Vec::with_capacity(rows.len());
    for row in rows {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Parse(format!("expected a matrix row, found {row}")))?;
        parsed.push(row.iter().map(entry).collect::<Result<_>>()?);
    }
    let ncols = parsed.first().map_or(0, Vec::len);
    if parsed.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse("matrix rows have different lengths".into()));
    }
    if parsed.iter().flatten().any(|(re, im)| !re.is_finite() || !im.is_finite()) {
        return Err(Error::Parse("matrix has a non-finite entry".into()));
    }
    Ok(CMat::from_fn(parsed.len(), ncols, |i, j| c64(parsed[i][j].0, parsed[i][j].1)))
}

/// `#[serde(with = "json::matrix")]`
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_to_value(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<CMat, D::Error> {
        let v = Value::deserialize(d)?;
        matrix_from_value(&v).map_err(D::Error::custom)
    }
}

/// `#[serde(with = "json::matrix_list")]`
pub mod matrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[CMat], s: S) -> std::result::Result<S::Ok, S::Error> {
        Value::Array(ms.iter().map(matrix_to_value).collect()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<CMat>, D::Error> {
        let vs = Vec::<Value>::deserialize(d)?;
        vs.iter().map(|v| matrix_from_value(v).map_err(D::Error::custom)).collect()
    }
}

/// `#[serde(with = "json::coeff_map")]`: word keys in dot notation.
pub mod coeff_map {
    use super::*;

    pub fn serialize<S: Serializer>(m: &BTreeMap<Word, CMat>, s: S) -> std::result::Result<S::Ok, S::Error> {
        let obj: serde_json::Map<String, Value> =
            m.iter().map(|(w, c)| (w.to_string(), matrix_to_value(c))).collect();
        Value::Object(obj).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<Word, CMat>, D::Error> {
        let raw = BTreeMap::<String, Value>::deserialize(d)?;
        let mut out = BTreeMap::new();
        for (k, v) in raw {
            let w: Word = k.parse().map_err(D::Error::custom)?;
            let c = matrix_from_value(&v).map_err(D::Error::custom)?;
            out.insert(w, c);
        }
        Ok(out)
    }
}
