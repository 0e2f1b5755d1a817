//! CSV and JSON output shared by the campaigns.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{CknError, Result};

/// Seventeen significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// A report row with a fixed column layout.
pub trait Tabular {
    fn header() -> Vec<&'static str>;
    fn record(&self) -> Vec<String>;
}

/// Writes `rows` as CSV, preceded by `# generated <unix secs>` when a
/// timestamp is given.
pub fn write_csv<W: Write, T: Tabular>(mut out: W, rows: &[T], timestamp: Option<u64>) -> Result<()> {
    if let Some(t) = timestamp {
        writeln!(out, "# generated {t}").map_err(io_err)?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(T::header()).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.record()).map_err(csv_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn csv_string<T: Tabular>(rows: &[T], timestamp: Option<u64>) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows, timestamp)?;
    String::from_utf8(buf).map_err(|e| CknError::Io(e.to_string()))
}

fn io_err(e: std::io::Error) -> CknError {
    CknError::Io(e.to_string())
}

fn csv_err(e: csv::Error) -> CknError {
    CknError::Io(e.to_string())
}

/// Campaign summary written as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pass_count: usize,
    pub fail_count: usize,
    pub min_ratio: Option<f64>,
    pub excluded_count: usize,
}

impl Summary {
    pub fn all_pass(&self) -> bool {
        self.fail_count == 0
    }
}
