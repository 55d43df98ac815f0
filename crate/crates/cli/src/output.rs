use std::io::Write;

use logloss_core::num::{fmt12, round12};
use serde_json::Value;

use crate::config::{Format, RunConfig};

/// A finished run: JSON body, CSV body and whether every check passed.
pub struct Report {
    pub json: Value,
    pub csv: String,
    pub pass: bool,
}

/// Rounds every float to 12 significant digits; non-finite values become null.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            serde_json::Number::from_f64(round12(x)).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_floats).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_floats(v))).collect()),
        other => other,
    }
}

/// CSV with a header row, LF endings and floats printed with 12 significant digits.
pub struct Table {
    w: csv::Writer<Vec<u8>>,
}

pub enum Cell {
    F(f64),
    U(u64),
    S(String),
    B(bool),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::U(x as u64)
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::B(x)
    }
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(header).expect("in-memory write");
        Table { w }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        let rec: Vec<String> = cells
            .into_iter()
            .map(|c| match c {
                Cell::F(x) => fmt12(x),
                Cell::U(x) => x.to_string(),
                Cell::S(s) => s,
                Cell::B(b) => b.to_string(),
            })
            .collect();
        self.w.write_record(&rec).expect("in-memory write");
    }

    pub fn finish(self) -> String {
        String::from_utf8(self.w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
    }
}

pub fn write(cfg: &RunConfig, report: &Report) -> Result<(), String> {
    let body = match cfg.format {
        Format::Json => {
            serde_json::to_string_pretty(&round_floats(report.json.clone())).map_err(|e| e.to_string())? + "\n"
        }
        Format::Csv => report.csv.clone(),
    };
    match &cfg.out {
        Some(path) => std::fs::write(path, body).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout().write_all(body.as_bytes()).map_err(|e| e.to_string()),
    }
}
