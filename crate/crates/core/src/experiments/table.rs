use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Unit written for dimensionless columns.
pub const DIMENSIONLESS: &str = "1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
}

impl Column {
    pub fn new(name: impl Into<String>, unit: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
        }
    }

    /// `name [unit]`.
    pub fn header(&self) -> String {
        format!("{} [{}]", self.name, self.unit)
    }

    pub fn parse_header(h: &str) -> Result<Self> {
        let h = h.trim();
        let bad = || Error::Config(format!("column header `{h}` is not of the form `name [unit]`"));
        let open = h.rfind(" [").ok_or_else(bad)?;
        let unit = h[open + 2..].strip_suffix(']').ok_or_else(bad)?;
        if open == 0 || unit.is_empty() {
            return Err(bad());
        }
        Ok(Self::new(&h[..open], unit))
    }
}

/// Provenance block written next to every table.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    pub experiment: String,
    pub tool_version: String,
    /// The configuration the table was produced from, verbatim.
    pub config: Value,
    /// Every parameter the run assumed rather than took from its input.
    pub assumptions: Vec<String>,
    pub seed: Option<u64>,
    /// Scalar results derived from the rows (fits, residuals, verdicts).
    pub summary: BTreeMap<String, Value>,
}

/// Rectangular numeric table with named, unit-tagged columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    columns: Vec<Column>,
    rows: Vec<Vec<f64>>,
    pub metadata: TableMetadata,
}

/// Shortest round-trip digits; exponent form outside `[1e-4, 1e16)`.
fn format_float(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e16).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

impl ResultTable {
    pub fn new(experiment: &str, columns: &[(&str, &str)]) -> Self {
        Self {
            columns: columns.iter().map(|(n, u)| Column::new(*n, *u)).collect(),
            rows: Vec::new(),
            metadata: TableMetadata {
                experiment: experiment.into(),
                tool_version: env!("CARGO_PKG_VERSION").into(),
                ..TableMetadata::default()
            },
        }
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::InvalidParameter {
                name: "row",
                reason: format!("{} values for {} columns", row.len(), self.columns.len()),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn with_config<T: Serialize>(mut self, config: &T) -> Result<Self> {
        self.metadata.config = serde_json::to_value(config)?;
        Ok(self)
    }

    pub fn assume(&mut self, note: impl Into<String>) {
        self.metadata.assumptions.push(note.into());
    }

    pub fn summarize(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.metadata.summary.insert(key.into(), serde_json::to_value(value)?);
        Ok(())
    }

    /// Floats are written in shortest round-trip form, so reading the CSV
    /// back reproduces every value bit for bit.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.columns.iter().map(Column::header))?;
        for r in &self.rows {
            out.write_record(r.iter().map(|&v| format_float(v)))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
    }

    /// Reads a CSV written by `write_csv`; metadata stays empty.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let columns = rdr
            .headers()?
            .iter()
            .map(Column::parse_header)
            .collect::<Result<Vec<_>>>()?;
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Config(format!("bad number `{s}` in CSV: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if row.len() != columns.len() {
                return Err(Error::Config(format!(
                    "CSV row with {} fields under {} columns",
                    row.len(),
                    columns.len()
                )));
            }
            rows.push(row);
        }
        Ok(Self {
            columns,
            rows,
            metadata: TableMetadata::default(),
        })
    }

    /// Writes `<dir>/<stem>.csv` and `<dir>/<stem>.json` (the metadata).
    pub fn save(&self, dir: &Path, stem: &str) -> Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        self.write_csv(fs::File::create(&csv_path)?)?;
        fs::write(&json_path, serde_json::to_string_pretty(&self.metadata)? + "\n")?;
        Ok((csv_path, json_path))
    }

    /// Inverse of `save`.
    pub fn load(dir: &Path, stem: &str) -> Result<Self> {
        let mut t = Self::read_csv(fs::File::open(dir.join(format!("{stem}.csv")))?)?;
        t.metadata = serde_json::from_str(&fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultTable {
        let mut t = ResultTable::new("demo", &[("t", "s"), ("overlap", DIMENSIONLESS), ("p1", "W")]);
        t.push(vec![0.0, 1.0, 1.2e-9]).unwrap();
        t.push(vec![0.1, 0.1 + 0.2, -3.0e-300]).unwrap();
        t
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = sample();
        let s = t.to_csv_string().unwrap();
        assert!(s.starts_with("t [s],overlap [1],p1 [W]\n"));
        let back = ResultTable::read_csv(s.as_bytes()).unwrap();
        assert_eq!(back.columns(), t.columns());
        assert_eq!(back.rows(), t.rows());
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let mut t = sample();
        assert!(t.push(vec![1.0]).is_err());
        assert!(ResultTable::read_csv("a [1],b [1]\n1,2,3\n".as_bytes()).is_err());
        assert!(ResultTable::read_csv("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn headers_with_spaces() {
        let c = Column::parse_header("L dk / T [1]").unwrap();
        assert_eq!(c, Column::new("L dk / T", "1"));
        assert_eq!(Column::parse_header(&c.header()).unwrap(), c);
    }
}
