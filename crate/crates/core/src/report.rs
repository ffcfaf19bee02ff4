//! Deterministic serialization of results and reports.
//!
//! All binary64 values are rendered with 17 significant digits in scientific
//! notation, both in JSON and CSV, so identical runs emit byte-identical
//! output regardless of platform or thread count.

use std::io;

use serde::Serialize;

/// Formats a binary64 value with 17 significant digits.
pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.8e}")
    }
}

/// Serializes a report to JSON with fixed float formatting.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value
        .serialize(&mut ser)
        .expect("report serialization cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

/// One verified inequality: `pass` states whether `lhs >= rhs - margin`
/// held, with the slack actually available recorded in `margin`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CheckRow {
    pub pass: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}
