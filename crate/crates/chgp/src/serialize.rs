//! Stable-ordered serialization helpers: every float is written with 17
//! significant digits so files round-trip bit-exactly and golden tests can
//! compare bytes.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// 17-significant-digit scientific form, the shortest that round-trips f64.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    format!("{v:.16e}")
}

struct SeventeenDigits;

impl serde_json::ser::Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            // JSON has no inf/nan; fall back to null like serde_json does
            writer.write_all(b"null")
        }
    }
}

/// Serialize to JSON with 17-significant-digit floats and a trailing newline.
pub fn to_json_17<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SeventeenDigits);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::invalid(format!("JSON serialization failed: {e}")))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::invalid(format!("non-UTF8 JSON: {e}")))
}

/// Write a value as JSON to a file.
pub fn write_json_17<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let s = to_json_17(value)?;
    std::fs::write(path, s).map_err(|e| Error::invalid(format!("cannot write {path:?}: {e}")))
}
