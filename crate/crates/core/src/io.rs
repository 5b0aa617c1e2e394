//! Numeric CSV tables with a leading `schema_version` column.
//!
//! Floats are written in shortest round-trip scientific notation so a table
//! read back reproduces every value bit for bit.

use std::path::Path;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut head = vec!["schema_version".to_string()];
        head.extend(self.header.iter().cloned());
        w.write_record(&head)?;
        let version = SCHEMA_VERSION.to_string();
        for row in &self.rows {
            let mut rec = Vec::with_capacity(row.len() + 1);
            rec.push(version.clone());
            rec.extend(row.iter().map(|&x| fmt_f64(x)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let head = r.headers()?.clone();
        if head.get(0) != Some("schema_version") {
            return Err(Error::Domain(format!("{}: missing schema_version column", path.display())));
        }
        let header: Vec<String> = head.iter().skip(1).map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let version: u32 = rec
                .get(0)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Domain("unreadable schema_version".into()))?;
            if version != SCHEMA_VERSION {
                return Err(Error::Domain(format!(
                    "schema_version {version} is not supported (expected {SCHEMA_VERSION})"
                )));
            }
            let row = rec
                .iter()
                .skip(1)
                .map(|s| s.parse::<f64>().map_err(|_| Error::Domain(format!("bad number `{s}`"))))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Ok(Self { header, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(&["a", "b"]);
        t.push(vec![0.1 + 0.2, -1.0e-300]);
        t.push(vec![f64::NAN, 123456.789]);
        t.write(&path).unwrap();
        let back = Table::read(&path).unwrap();
        assert_eq!(back.header, t.header);
        assert_eq!(back.rows[0][0].to_bits(), (0.1f64 + 0.2).to_bits());
        assert_eq!(back.rows[0][1].to_bits(), (-1.0e-300f64).to_bits());
        assert!(back.rows[1][0].is_nan());
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("schema_version,a,b\n1,"));
    }
}
