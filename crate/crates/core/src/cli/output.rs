//! Artifact serialization: floats with 17 significant digits, and a refusal
//! to write any non-finite number.

use crate::error::{Error, Result};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};
use std::io;
use std::path::Path;

/// Pretty JSON with every float written as `{:.16e}`.
struct FixedDigits<'a>(PrettyFormatter<'a>);

impl FixedDigits<'_> {
    fn new() -> Self {
        FixedDigits(PrettyFormatter::with_indent(b"  "))
    }
}

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", float(value))
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{}", float(value as f64))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// 17 significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn has_null(v: &serde_json::Value) -> bool {
    match v {
        serde_json::Value::Null => true,
        serde_json::Value::Array(a) => a.iter().any(has_null),
        serde_json::Value::Object(m) => m.values().any(has_null),
        _ => false,
    }
}

/// Serializes `value`; artifacts never contain nulls, so a null can only be a
/// NaN or infinity and is rejected.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let tree = serde_json::to_value(value).map_err(|e| Error::Io(e.to_string()))?;
    if has_null(&tree) {
        return Err(Error::InvariantViolation(format!("non-finite number in artifact: {tree}")));
    }
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits::new());
    value.serialize(&mut ser).map_err(|e| Error::Io(e.to_string()))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("JSON is UTF-8"))
}

/// Rejects CSV text containing NaN or inf fields.
pub fn check_csv(text: &str) -> Result<()> {
    for (k, line) in text.lines().enumerate().skip(1) {
        for field in line.split(',') {
            if let Ok(x) = field.parse::<f64>() {
                if !x.is_finite() {
                    return Err(Error::InvariantViolation(format!("non-finite value '{field}' on CSV line {}", k + 1)));
                }
            }
        }
    }
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        a: f64,
        b: Vec<f64>,
        n: usize,
    }

    #[test]
    fn seventeen_digits() {
        let s = to_json(&Row { a: 0.1, b: vec![1.0, -2.5e-300], n: 3 }).unwrap();
        assert!(s.contains("\"a\": 1.0000000000000001e-1"), "{s}");
        assert!(s.contains("-2.5000000000000000e-300"));
        assert!(s.contains("\"n\": 3"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64().unwrap().to_bits(), 0.1f64.to_bits());
    }

    #[test]
    fn non_finite_rejected() {
        assert!(to_json(&Row { a: f64::NAN, b: vec![], n: 0 }).is_err());
        assert!(to_json(&Row { a: 0.0, b: vec![f64::INFINITY], n: 0 }).is_err());
        assert!(check_csv("x,y\n1,NaN\n").is_err());
        assert!(check_csv("x,y\n1,-inf\n").is_err());
        assert!(check_csv("x,y\n1,2.5e-3\n").is_ok());
    }
}
