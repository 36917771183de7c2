//! Text formats: CSV tables and flat `key=value` records.
//!
//! Floats are written with 17 significant digits in scientific notation so
//! that every value reads back bit-exactly.

use std::fmt;
use std::io::{self, Write};

use crate::current::CurrentTrace;
use crate::ensemble::DeltaHistogram;
use crate::geometry::CurveSample;

pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Ordered `key=value` lines. Keys may repeat; `#` starts a comment line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValueRecord {
    entries: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordParseError {
    pub line: usize,
    pub text: String,
}

impl fmt::Display for RecordParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "line {}: expected `key=value`, got `{}`",
            self.line, self.text
        )
    }
}

impl std::error::Error for RecordParseError {}

impl KeyValueRecord {
    pub fn push(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.push((key.into(), value.into()));
    }

    pub fn push_float(&mut self, key: impl Into<String>, value: f64) {
        self.push(key, format_float(value));
    }

    pub fn extend(&mut self, other: &KeyValueRecord) {
        self.entries.extend(other.entries.iter().cloned());
    }

    /// First value stored under `key`.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn get_all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.entries
            .iter()
            .filter(move |(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn parse(text: &str) -> Result<Self, RecordParseError> {
        let mut record = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| RecordParseError {
                line: i + 1,
                text: line.to_string(),
            })?;
            record.push(k.trim(), v.trim());
        }
        Ok(record)
    }
}

impl fmt::Display for KeyValueRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

fn write_rows<W, I, const N: usize>(mut w: W, header: &str, rows: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = [f64; N]>,
{
    writeln!(w, "{header}")?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()
}

/// `theta,x,y,z`
pub fn write_curve_csv<W: Write>(w: W, samples: &[CurveSample]) -> io::Result<()> {
    write_rows(
        w,
        "theta,x,y,z",
        samples
            .iter()
            .map(|s| [s.theta, s.point.x, s.point.y, s.point.z]),
    )
}

/// `theta,eps`
pub fn write_profile_csv<W: Write>(w: W, table: &[(f64, f64)]) -> io::Result<()> {
    write_rows(w, "theta,eps", table.iter().map(|&(t, e)| [t, e]))
}

/// `bz,phi_over_phi0,current_over_I0`
pub fn write_trace_csv<W: Write>(w: W, trace: &CurrentTrace) -> io::Result<()> {
    write_rows(
        w,
        "bz,phi_over_phi0,current_over_I0",
        trace
            .rows()
            .iter()
            .map(|r| [r.bz, r.phi_over_phi0, r.current_over_i0]),
    )
}

/// `bin_left,bin_right,density`
pub fn write_histogram_csv<W: Write>(w: W, hist: &DeltaHistogram) -> io::Result<()> {
    write_rows(
        w,
        "bin_left,bin_right,density",
        hist.density
            .iter()
            .enumerate()
            .map(|(i, &d)| [hist.bin_edges[i], hist.bin_edges[i + 1], d]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_bit_exactly() {
        for v in [
            0.1,
            1.0 / 3.0,
            -2.5e-300,
            6.02214076e23,
            std::f64::consts::PI,
        ] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
        assert_eq!(format_float(1.5), "1.5000000000000000e0");
    }

    #[test]
    fn record_parse_and_display() {
        let rec = KeyValueRecord::parse("# comment\na=1\n\nb = two\na=3\n").unwrap();
        assert_eq!(rec.get("a"), Some("1"));
        assert_eq!(rec.get_all("a").collect::<Vec<_>>(), ["1", "3"]);
        assert_eq!(rec.get("b"), Some("two"));
        assert_eq!(rec.to_string(), "a=1\nb=two\na=3\n");
        assert_eq!(
            KeyValueRecord::parse("ok=1\nnope").unwrap_err(),
            RecordParseError {
                line: 2,
                text: "nope".into()
            }
        );
    }

    #[test]
    fn csv_header_and_rows() {
        let mut buf = Vec::new();
        write_profile_csv(&mut buf, &[(0.0, 0.5), (1.0, 0.25)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("theta,eps"));
        assert_eq!(
            lines.next(),
            Some("0.0000000000000000e0,5.0000000000000000e-1")
        );
        assert_eq!(lines.count(), 1);
    }
}
