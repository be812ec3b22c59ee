//! Deterministic JSON and CSV emission.
//!
//! Floating-point values are written with 17 significant digits, `.` decimal
//! separator and LF line endings, so identical runs produce byte-identical
//! files.

use std::io::Write;
use std::path::Path;

use serde::{Serialize, Serializer};

use crate::error::Result;

/// `f64` wrapper serialized as a JSON number with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

impl From<f64> for F17 {
    fn from(v: f64) -> Self {
        F17(v)
    }
}

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            serde_json::Number::from_string_unchecked(fmt17(self.0)).serialize(s)
        } else {
            s.serialize_f64(self.0)
        }
    }
}

/// 17-significant-digit scientific notation (valid JSON number syntax).
pub fn fmt17(v: f64) -> String {
    format!("{:.16e}", v)
}

/// Write a uniform-grid series as CSV: header row, one row per grid point.
pub fn write_series_csv(path: &Path, columns: &[(&str, &[f64])]) -> Result<()> {
    assert!(!columns.is_empty());
    let n = columns[0].1.len();
    assert!(columns.iter().all(|(_, v)| v.len() == n), "column length mismatch");
    let mut out = Vec::with_capacity(n * columns.len() * 26);
    let header: Vec<&str> = columns.iter().map(|(name, _)| *name).collect();
    out.extend_from_slice(header.join(",").as_bytes());
    out.push(b'\n');
    for i in 0..n {
        let row: Vec<String> = columns.iter().map(|(_, v)| fmt17(v[i])).collect();
        out.extend_from_slice(row.join(",").as_bytes());
        out.push(b'\n');
    }
    write_atomically(path, &out)
}

/// Serialize a summary as pretty JSON with a trailing newline.
pub fn write_summary_json<T: Serialize>(path: &Path, summary: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary)
        .map_err(|e| crate::error::Error::config(format!("summary serialization failed: {e}")))?;
    text.push('\n');
    write_atomically(path, text.as_bytes())
}

fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f17_round_trips_through_json() {
        #[derive(Serialize)]
        struct S {
            v: F17,
        }
        let x = -0.004_033_079_723_4f64;
        let text = serde_json::to_string(&S { v: F17(x) }).unwrap();
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        let back: f64 = parsed["v"].as_str().map(|s| s.parse().unwrap()).unwrap_or_else(|| {
            parsed["v"].to_string().parse().unwrap()
        });
        assert_eq!(back, x);
    }

    #[test]
    fn fmt17_is_json_number_syntax() {
        for v in [0.0, 1.0, -4.5e-21, 3.2e19, -1.0 / 3.0] {
            let s = fmt17(v);
            let parsed: serde_json::Value = serde_json::from_str(&s).unwrap();
            assert!(parsed.is_number(), "{s}");
        }
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("series.csv");
        write_series_csv(&path, &[("t", &[0.0, 0.5]), ("J", &[1.0, 2.0])]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,J");
        assert!(lines[1].starts_with("0.0000000000000000e0,"));
        assert!(!text.contains('\r'));
    }
}
