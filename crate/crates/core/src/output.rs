//! CSV and JSON emitters with round-trip float formatting.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;
use serde_json::{Number, Value};

use crate::VERSION;

/// 17 significant digits; `nan`, `inf`, `-inf` for non-finite values.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

/// A CSV table preceded by `#` comment lines: tool version, the effective
/// configuration, and the seed.
#[derive(Debug, Clone)]
pub struct CsvTable {
    config: Vec<(String, String)>,
    seed: Option<u64>,
    notes: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// A CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => fmt_float(*x),
            Cell::Int(x) => x.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl CsvTable {
    pub fn new(columns: &[&str]) -> Self {
        CsvTable {
            config: Vec::new(),
            seed: None,
            notes: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn config(mut self, config: &[(String, String)]) -> Self {
        self.config = config.to_vec();
        self
    }

    pub fn seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    /// A derived quantity echoed as a `# key: value` line below the seed.
    pub fn note(&mut self, key: &str, value: impl std::fmt::Display) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width must match the header"
        );
        self.rows.push(row.iter().map(Cell::render).collect());
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# walklab {VERSION}");
        for (k, v) in &self.config {
            let _ = writeln!(out, "# {k} = {}", v.replace('\n', " "));
        }
        match self.seed {
            Some(s) => {
                let _ = writeln!(out, "# seed = {s}");
            }
            None => out.push_str("# seed = none\n"),
        }
        for (k, v) in &self.notes {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Rewrites every float in a JSON tree with 17 significant digits.
fn widen_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("float");
            Number::from_str(&fmt_float(x))
                .map(Value::Number)
                .unwrap_or(Value::Null)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(widen_floats).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, widen_floats(v))).collect())
        }
        other => other,
    }
}

/// Pretty JSON with 17-digit floats; non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let tree = serde_json::to_value(value).expect("serializable report");
    let mut s = serde_json::to_string_pretty(&widen_floats(tree)).expect("valid json");
    s.push('\n');
    s
}

/// Wraps a JSON report with the tool name, version, configuration and seed.
/// Fields of an object result are merged into the top level; any other
/// result goes under `result`.
pub fn json_envelope<T: Serialize>(
    config: &[(String, String)],
    seed: Option<u64>,
    result: &T,
) -> String {
    let mut top = serde_json::Map::new();
    top.insert("tool".into(), Value::String("walklab".into()));
    top.insert("version".into(), Value::String(VERSION.into()));
    let config = config
        .iter()
        .map(|(k, v)| (k.clone(), Value::String(v.clone())))
        .collect();
    top.insert("config".into(), Value::Object(config));
    top.insert("seed".into(), seed.map_or(Value::Null, Value::from));
    match serde_json::to_value(result).expect("serializable report") {
        Value::Object(fields) => {
            for (k, v) in fields {
                top.entry(k).or_insert(v);
            }
        }
        other => {
            top.insert("result".into(), other);
        }
    }
    to_json(&Value::Object(top))
}
