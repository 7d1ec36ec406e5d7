//! CSV and JSON emission. Every file starts with a provenance line carrying
//! the library version and the configuration hash; CSV files follow it with
//! a single header row. Floats are written with 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Meta {
    pub library: &'static str,
    pub version: &'static str,
    pub experiment: String,
    pub config_hash: String,
}

impl Meta {
    pub fn new(experiment: &str, config_hash: &str) -> Self {
        Self { library: "weyl-lab", version: VERSION, experiment: experiment.into(), config_hash: config_hash.into() }
    }

    pub fn comment_line(&self) -> String {
        format!("# {} {} experiment={} config={}", self.library, self.version, self.experiment, self.config_hash)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

/// Points as space-separated coordinates.
pub fn format_point(x: &[f64]) -> String {
    x.iter().map(|&c| format_float(c)).collect::<Vec<_>>().join(" ")
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => format_float(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub fn write_csv(path: &Path, meta: &Meta, table: &Table) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", meta.comment_line())?;
    {
        let mut w = csv::Writer::from_writer(&mut out);
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(&table.columns).map_err(csv_err)?;
        for row in &table.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
        }
        w.flush()?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    meta: &'a Meta,
    #[serde(flatten)]
    body: &'a T,
}

/// Writes `body` (which must serialize to a JSON object) with a `meta` field added.
pub fn write_json<T: Serialize>(path: &Path, meta: &Meta, body: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, &Wrapped { meta, body })?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(-2.0), "-2.0000000000000000e0");
        let back: f64 = format_float(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        let mut t = Table::new(&["lambda", "count"]);
        t.push(vec![1.5.into(), 3u64.into()]);
        let meta = Meta::new("count", "abc");
        write_csv(&path, &meta, &t).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# weyl-lab"));
        assert_eq!(lines[1], "lambda,count");
        assert_eq!(lines[2], "1.5000000000000000e0,3");
    }

    #[test]
    fn json_has_meta() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.json");
        #[derive(Serialize)]
        struct B {
            x: f64,
        }
        write_json(&path, &Meta::new("bootstrap", "h"), &B { x: 0.5 }).unwrap();
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(v["x"], 0.5);
        assert_eq!(v["meta"]["config_hash"], "h");
    }
}
