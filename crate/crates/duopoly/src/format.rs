//! Number rendering and small JSON helpers.

use std::str::FromStr;

use duopoly_core::{JacobianData, State};
use serde_json::{Map, Number, Value};

/// 17 significant digits in scientific notation; `nan`/`inf` spelled out.
pub fn float(x: f64) -> String {
    if x.is_finite() {
        // Adding zero maps -0 to +0.
        format!("{:.16e}", x + 0.0)
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON number with 17 significant digits, or `null` when not finite.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::Number(Number::from_str(&float(x)).expect("valid number literal"))
    } else {
        Value::Null
    }
}

pub fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

pub fn state(s: &State) -> Value {
    obj([("u", num(s.u)), ("v", num(s.v))])
}

pub fn obj<const N: usize>(fields: [(&str, Value); N]) -> Value {
    let mut m = Map::new();
    for (k, v) in fields {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

pub fn jacobian(j: &JacobianData) -> Value {
    obj([
        ("a11", num(j.a11)),
        ("a12", num(j.a12)),
        ("a21", num(j.a21)),
        ("a22", num(j.a22)),
        ("I0", num(j.trace)),
        ("A0", num(j.det)),
        ("disc", num(j.disc)),
        ("eigenvalues", j.eigenvalues.map_or(Value::Null, |(l1, l2)| Value::Array(vec![num(l1), num(l2)]))),
    ])
}

/// Pretty JSON with a trailing newline.
pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Joins cells with commas and terminates the row.
pub fn csv_row<I, S>(cells: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = String::new();
    for (i, c) in cells.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(c.as_ref());
    }
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(float(0.8), "8.0000000000000004e-1");
        assert_eq!(float(1.0 / 3.0), "3.3333333333333331e-1");
        assert_eq!(float(f64::NAN), "nan");
        assert_eq!(float(-0.0), "0.0000000000000000e0");
        assert_eq!(num(0.6).to_string(), "5.9999999999999998e-1");
        assert_eq!(num(f64::INFINITY), Value::Null);
    }

    #[test]
    fn round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300, 6.02e23, -2.5] {
            assert_eq!(float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
