//! Tabular writers for CSV and JSON, plus the run record.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{Map, Value};

use crate::args::Format;

/// How a numeric column is rounded under `--paper-rounding`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    Significant,
    OneDecimal,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(Option<i64>),
    Num(Option<f64>, Rounding),
}

impl Cell {
    pub fn num(v: Option<f64>) -> Self {
        Cell::Num(v, Rounding::Significant)
    }

    pub fn tax(v: Option<f64>) -> Self {
        Cell::Num(v, Rounding::OneDecimal)
    }

    pub fn exact(v: Option<f64>) -> Self {
        Cell::Num(v, Rounding::None)
    }

    pub fn text(s: impl Into<String>) -> Self {
        Cell::Text(s.into())
    }

    fn resolved(&self, paper: bool) -> Cell {
        match self {
            Cell::Num(Some(v), r) if paper => Cell::Num(Some(round(*v, *r)), *r),
            c => c.clone(),
        }
    }

    fn to_csv(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(v) => v.map(|v| v.to_string()).unwrap_or_default(),
            Cell::Num(v, _) => v.map(|v| v.to_string()).unwrap_or_default(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Int(v) => v.map_or(Value::Null, Value::from),
            Cell::Num(v, _) => v
                .and_then(serde_json::Number::from_f64)
                .map_or(Value::Null, Value::Number),
        }
    }
}

pub fn round(v: f64, rounding: Rounding) -> f64 {
    match rounding {
        Rounding::None => v,
        Rounding::OneDecimal => (v * 10.0).round() / 10.0,
        Rounding::Significant => {
            if v == 0.0 || !v.is_finite() {
                return v;
            }
            format!("{v:.3e}").parse().unwrap_or(v)
        }
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Writes tables into the output directory and remembers what was written.
pub struct Writer {
    dir: PathBuf,
    format: Format,
    paper: bool,
    written: Vec<String>,
}

impl Writer {
    pub fn new(dir: &Path, format: Format, paper: bool) -> Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Writer {
            dir: dir.to_path_buf(),
            format,
            paper,
            written: Vec::new(),
        })
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    /// Writes `stem.csv` or `stem.json` depending on the format.
    pub fn table(&mut self, stem: &str, table: &Table) -> Result<()> {
        let ext = match self.format {
            Format::Csv => "csv",
            Format::Json => "json",
        };
        let name = format!("{stem}.{ext}");
        let path = self.dir.join(&name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        match self.format {
            Format::Csv => write_csv(file, table, self.paper)?,
            Format::Json => write_json(file, table, self.paper)?,
        }
        self.written.push(name);
        Ok(())
    }

    /// Always CSV, whatever the format.
    pub fn csv(&mut self, name: &str, table: &Table) -> Result<()> {
        let path = self.dir.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        write_csv(file, table, self.paper)?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Writes `run.json` with the resolved settings and the list of outputs.
    pub fn run_record(
        &self,
        command: &str,
        settings: &impl serde::Serialize,
        timestamp: bool,
    ) -> Result<()> {
        let mut record = Map::new();
        record.insert("command".into(), command.into());
        record.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        record.insert("settings".into(), serde_json::to_value(settings)?);
        record.insert("outputs".into(), self.written.clone().into());
        if timestamp {
            record.insert(
                "generated_at".into(),
                chrono::Utc::now().to_rfc3339().into(),
            );
        }
        let path = self.dir.join("run.json");
        let mut out = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut out, &Value::Object(record))?;
        writeln!(out)?;
        out.flush()?;
        Ok(())
    }
}

pub fn write_csv<W: Write>(out: W, table: &Table, paper: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| c.resolved(paper).to_csv()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(out: W, table: &Table, paper: bool) -> Result<()> {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = table
                .columns
                .iter()
                .zip(row)
                .map(|(k, c)| (k.to_string(), c.resolved(paper).to_json()))
                .collect();
            Value::Object(obj)
        })
        .collect();
    let mut out = BufWriter::new(out);
    serde_json::to_writer_pretty(&mut out, &rows)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
