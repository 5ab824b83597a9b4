//! CSV and JSON rendering.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Value};

use super::config::OutputFormat;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(&'static str),
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Float)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Shortest text of `x` rounded to 12 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let r = round12(x);
    if (1e-5..1e15).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Int(i) => i.to_string(),
        Cell::Float(x) => format_float(*x),
        Cell::Text(s) => (*s).to_string(),
        Cell::Missing => String::new(),
    }
}

fn json_cell(c: &Cell) -> Value {
    match c {
        Cell::Int(i) => Value::from(*i),
        Cell::Float(x) if x.is_finite() => Value::from(round12(*x)),
        Cell::Float(x) => Value::from(format_float(*x)),
        Cell::Text(s) => Value::from(*s),
        Cell::Missing => Value::Null,
    }
}

pub fn render_csv(table: &Table, meta: &Value) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {}\n", meta["version"].as_str().unwrap_or_default()));
    out.push_str(&format!("# config: {}\n", meta["config"]));
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(csv_cell).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn render_json(table: &Table, meta: &Value) -> String {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let obj: Map<String, Value> = table
                .columns
                .iter()
                .zip(row)
                .map(|(k, c)| ((*k).to_string(), json_cell(c)))
                .collect();
            Value::Object(obj)
        })
        .collect();
    let mut meta = meta.clone();
    meta["columns"] = Value::from(table.columns.to_vec());
    let doc = serde_json::json!({ "meta": meta, "rows": rows });
    let mut s = serde_json::to_string_pretty(&doc).expect("json renders");
    s.push('\n');
    s
}

pub fn render(table: &Table, meta: &Value, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => render_csv(table, meta),
        OutputFormat::Json => render_json(table, meta),
    }
}

/// Writes `content` to `path` or stdout; a partially written file is removed.
pub fn write_output(path: Option<&Path>, content: &str) -> std::io::Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
            out.flush()
        }
        Some(p) => {
            let res = std::fs::File::create(p).and_then(|mut f| {
                f.write_all(content.as_bytes())?;
                f.sync_all()
            });
            if res.is_err() {
                let _ = std::fs::remove_file(p);
            }
            res
        }
    }
}
