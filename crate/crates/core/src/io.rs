//! Text formats: form expressions, the curvature JSON schema, canonical JSON
//! output and the levels CSV.

use std::io::Write;

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{One, Pow, Zero};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::exterior::{DiffForm, MultiIndex};
use crate::linalg::Matrix;
use crate::model_heat::{CurvatureData, PiMultiple};
use crate::scalar::{rational_to_string, Rational, RealScalar};
use crate::torus::Spectrum;

/// Parse `"3"`, `"-1/2"`, `"0.25"` or `"1.5e-3"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a number: {text:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {text:?}")));
        }
        return Ok(Rational::new(num, den));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let ten = Rational::from_integer(BigInt::from(10));
    let mut v = Rational::from_integer(all) / ten.clone();
    let shift = exponent - frac_part.len() as i32;
    v *= Pow::pow(&ten, shift);
    Ok(if negative { -v } else { v })
}

/// Parse `"3 e123 - e145 + 1/2 e12"` (or `"0"`) into a form on `R^n`.
/// Indices are single digits; a term without a basis element is a 0-form.
pub fn parse_form(expr: &str, n: usize) -> Result<DiffForm<Rational>> {
    let compact: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(Error::Parse("empty form expression".into()));
    }
    let mut form = DiffForm::zero(n);
    let mut rest = compact.as_str();
    let mut first = true;
    while !rest.is_empty() {
        let mut negative = false;
        if let Some(r) = rest.strip_prefix('-') {
            negative = true;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        } else if !first {
            return Err(Error::Parse(format!("expected '+' or '-' before {rest:?}")));
        }
        first = false;
        let end = rest.find(['+', '-']).unwrap_or(rest.len());
        let (term, tail) = rest.split_at(end);
        rest = tail;
        let (coeff_text, basis_text) = match term.find('e') {
            Some(p) => (&term[..p], Some(&term[p + 1..])),
            None => (term, None),
        };
        let coeff_text = coeff_text.trim_end_matches('*');
        let mut coeff = if coeff_text.is_empty() {
            Rational::one()
        } else {
            parse_rational(coeff_text)?
        };
        if negative {
            coeff = -coeff;
        }
        let index = match basis_text {
            None => MultiIndex::EMPTY,
            Some(digits) => {
                if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
                    return Err(Error::Parse(format!("bad basis element in {term:?}")));
                }
                let idx: Vec<usize> = digits.bytes().map(|b| (b - b'0') as usize).collect();
                MultiIndex::new(&idx, n)?
            }
        };
        form.add_term(index, coeff);
    }
    Ok(form)
}

fn value_rational(v: &Value) -> Result<Rational> {
    match v {
        Value::Number(num) => parse_rational(&num.to_string()),
        Value::String(s) => parse_rational(s),
        other => Err(Error::Parse(format!("expected a number, found {other}"))),
    }
}

fn value_index(v: &Value) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| Error::Parse(format!("expected a 1-based index, found {v}")))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Option<&'a Value> {
    obj.get(key)
}

/// Parse the curvature JSON document
/// `{"n", "rank", "R": [[i,j,k,l,v],…], "F": [[i,j,[[re,im],… r×r row-major]],…]}`.
pub fn parse_curvature_json(text: &str) -> Result<CurvatureData<Rational>> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::Parse("curvature file must be a JSON object".into()))?;
    let n = field(obj, "n")
        .map(value_index)
        .transpose()?
        .ok_or_else(|| Error::Parse("missing \"n\"".into()))?;
    if n != 7 && n != 8 {
        return Err(Error::UnsupportedDimension(n));
    }
    let rank = field(obj, "rank").map(value_index).transpose()?.unwrap_or(1);
    let mut r_entries = Vec::new();
    if let Some(r) = field(obj, "R") {
        let rows = r
            .as_array()
            .ok_or_else(|| Error::Parse("\"R\" must be an array".into()))?;
        for row in rows {
            let items = row
                .as_array()
                .filter(|a| a.len() == 5)
                .ok_or_else(|| Error::Parse(format!("R entry must be [i,j,k,l,value]: {row}")))?;
            let idx = [
                value_index(&items[0])?,
                value_index(&items[1])?,
                value_index(&items[2])?,
                value_index(&items[3])?,
            ];
            r_entries.push((idx, value_rational(&items[4])?));
        }
    }
    let mut f_entries = Vec::new();
    if let Some(f) = field(obj, "F") {
        let rows = f
            .as_array()
            .ok_or_else(|| Error::Parse("\"F\" must be an array".into()))?;
        for row in rows {
            let items = row
                .as_array()
                .filter(|a| a.len() == 3)
                .ok_or_else(|| Error::Parse(format!("F entry must be [i,j,matrix]: {row}")))?;
            let idx = [value_index(&items[0])?, value_index(&items[1])?];
            let cells = items[2]
                .as_array()
                .filter(|c| c.len() == rank * rank)
                .ok_or_else(|| Error::Parse(format!("F matrix must list {} [re,im] pairs", rank * rank)))?;
            let mut m = Matrix::zeros(rank, rank);
            for (pos, cell) in cells.iter().enumerate() {
                let pair = cell
                    .as_array()
                    .filter(|p| p.len() == 2)
                    .ok_or_else(|| Error::Parse(format!("matrix entry must be [re, im]: {cell}")))?;
                m.set(
                    pos / rank,
                    pos % rank,
                    Complex::new(value_rational(&pair[0])?, value_rational(&pair[1])?),
                );
            }
            f_entries.push((idx, m));
        }
    }
    CurvatureData::from_entries(n, rank, &r_entries, &f_entries)
}

/// Serialize curvature data back into the input schema (independent entries only).
pub fn curvature_to_json(cd: &CurvatureData<Rational>) -> Value {
    let n = cd.n();
    let mut r = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in 0..n {
                for l in (k + 1)..n {
                    if (i, j) > (k, l) {
                        continue;
                    }
                    let v = cd.riem(i, j, k, l);
                    if !v.is_zero() {
                        r.push(Value::Array(vec![
                            (i + 1).into(),
                            (j + 1).into(),
                            (k + 1).into(),
                            (l + 1).into(),
                            Value::String(rational_to_string(v)),
                        ]));
                    }
                }
            }
        }
    }
    let mut f = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let m = cd.f_matrix(i, j);
            if m.is_zero() {
                continue;
            }
            let cells = m
                .entries()
                .map(|(_, _, z)| {
                    Value::Array(vec![
                        Value::String(rational_to_string(&z.re)),
                        Value::String(rational_to_string(&z.im)),
                    ])
                })
                .collect();
            f.push(Value::Array(vec![(i + 1).into(), (j + 1).into(), Value::Array(cells)]));
        }
    }
    let mut obj = Map::new();
    obj.insert("n".into(), n.into());
    obj.insert("rank".into(), cd.rank().into());
    obj.insert("R".into(), Value::Array(r));
    obj.insert("F".into(), Value::Array(f));
    Value::Object(obj)
}

/// Floats at 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("\"{x}\"")
    }
}

fn write_canonical(v: &Value, indent: usize, out: &mut String) {
    let pad = |k: usize| "  ".repeat(k);
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(num) => match (num.as_i64(), num.as_u64(), num.as_f64()) {
            (Some(i), _, _) => out.push_str(&i.to_string()),
            (_, Some(u), _) => out.push_str(&u.to_string()),
            (_, _, Some(f)) => out.push_str(&format_float(f)),
            _ => out.push_str(&num.to_string()),
        },
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_canonical(item, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, key) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                write_canonical(&map[*key], indent + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Pretty JSON with sorted keys and fixed float formatting, for byte-stable output.
pub fn to_canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_canonical(v, 0, &mut out);
    out.push('\n');
    out
}

pub fn float_value(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(x.to_string()))
}

/// `{"coefficient": "4/9", "pi_power": "-2", "value": …}` for an exact multiple of a power of π.
pub fn pi_multiple_json<T: RealScalar>(p: &PiMultiple<T>, exact: Option<String>) -> Value {
    let mut obj = Map::new();
    let power = Rational::new(BigInt::from(p.pi_half), BigInt::from(2));
    if let Some(c) = exact {
        obj.insert("coefficient".into(), Value::String(c));
    } else {
        obj.insert("coefficient".into(), float_value(p.coeff.to_f64()));
    }
    obj.insert("pi_power".into(), Value::String(rational_to_string(&power)));
    obj.insert("value".into(), float_value(p.to_f64()));
    Value::Object(obj)
}

pub fn exact_pi_json(p: &PiMultiple<Rational>) -> Value {
    pi_multiple_json(p, Some(rational_to_string(&p.coeff)))
}

/// One CSV row per level: `q, lambda, lattice_count, mult_7, mult_big, N_7, N_big`,
/// where the cumulative counts exclude zero modes.
pub fn write_levels_csv<W: Write>(spectrum: &Spectrum, out: W) -> Result<()> {
    let io_err = |e: csv::Error| Error::InvalidArgument(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["q", "lambda", "lattice_count", "mult_7", "mult_big", "cumulative_n7", "cumulative_nbig"])
        .map_err(io_err)?;
    let (mut n7, mut nbig) = (0u64, 0u64);
    for l in &spectrum.levels {
        if !l.is_zero_mode() {
            n7 += l.mult_7;
            nbig += l.mult_big;
        }
        w.write_record([
            rational_to_string(&l.q),
            format_float(l.lambda),
            l.lattice_count.to_string(),
            l.mult_7.to_string(),
            l.mult_big.to_string(),
            n7.to_string(),
            nbig.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_rational("-3/6").unwrap(), q(-1, 2));
        assert_eq!(parse_rational("1.5e-3").unwrap(), q(3, 2000));
        assert_eq!(parse_rational("2E2").unwrap(), q(200, 1));
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn forms() {
        let f = parse_form("3 e123 - e145", 7).unwrap();
        assert_eq!(f.coefficient(MultiIndex::new(&[1, 2, 3], 7).unwrap()), q(3, 1));
        assert_eq!(f.coefficient(MultiIndex::new(&[1, 4, 5], 7).unwrap()), q(-1, 1));
        assert!(parse_form("0", 7).unwrap().is_zero());
        assert_eq!(parse_form("e1", 7).unwrap().degree(), Some(1));
        assert!(parse_form("e21", 7).is_err());
        assert!(parse_form("e18", 7).is_err());
        assert_eq!(parse_form("1/2e12+0.5 e12", 7).unwrap().coefficient(MultiIndex::new(&[1, 2], 7).unwrap()), q(1, 1));
    }

    #[test]
    fn canonical_json_sorts_keys() {
        let v = serde_json::json!({"b": 1.5, "a": [1, "x"]});
        assert_eq!(
            to_canonical_json(&v),
            "{\n  \"a\": [\n    1,\n    \"x\"\n  ],\n  \"b\": 1.5000000000000000e0\n}\n"
        );
    }
}
