//! CSV and JSON result files.
//!
//! CSV cells carry 9 significant digits, LF line endings. JSON uses the
//! struct field order and shortest round-trip floats.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};

/// `%.9g`-style formatting.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let e = format!("{x:.8e}");
    let (mantissa, exp) = e.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// A numeric table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: &'static [&'static str],
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &'static [&'static str]) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(self.header)?;
        for (i, row) in self.rows.iter().enumerate() {
            if let Some(k) = row.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("row {}, column `{}`", i + 1, self.header[k])));
            }
            w.write_record(row.iter().map(|v| fmt_sig9(*v)))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("ASCII output"))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Collects rendered files and writes them only once a command has
/// produced all of them, so failed runs leave no partial output.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    pub fn csv(&mut self, name: &str, table: &Table) -> Result<()> {
        self.files.push((name.to_string(), table.to_csv()?));
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.files.push((name.to_string(), to_json(value)?));
        Ok(())
    }

    /// `(file name, contents)` in emission order.
    pub fn files(&self) -> &[(String, String)] {
        &self.files
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for (name, body) in &self.files {
            let p = dir.join(name);
            fs::write(&p, body)?;
            paths.push(p);
        }
        Ok(paths)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_sig9(0.0), "0");
        assert_eq!(fmt_sig9(1.0), "1");
        assert_eq!(fmt_sig9(455.38), "455.38");
        assert_eq!(fmt_sig9(std::f64::consts::PI), "3.14159265");
        assert_eq!(fmt_sig9(-67.6), "-67.6");
        assert_eq!(fmt_sig9(9.9e-7), "9.9e-07");
        assert_eq!(fmt_sig9(1.23456789012e10), "1.23456789e+10");
        assert_eq!(fmt_sig9(123456789.4), "123456789");
        assert_eq!(fmt_sig9(0.0001), "0.0001");
    }

    #[test]
    fn csv_shape() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![1.0, 0.5]);
        t.push(vec![2.0, 1e-9]);
        assert_eq!(t.to_csv().unwrap(), "a,b\n1,0.5\n2,1e-09\n");
        t.push(vec![f64::NAN, 0.0]);
        assert!(t.to_csv().is_err());
    }
}
