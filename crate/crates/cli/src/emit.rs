//! Run context and output assembly.

use std::io::Write;
use std::path::PathBuf;

use serde_json::{Map, Number, Value};
use walklab::output::{json_envelope, Cell, CsvTable};
use walklab::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Everything a command needs besides its own arguments.
pub struct Context {
    pub config: Vec<(String, String)>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub progress: bool,
    pub cache_dir: Option<PathBuf>,
    pub cap: usize,
    pub time_cap: u64,
    pub tol: f64,
}

impl Context {
    pub fn note(&self, msg: impl AsRef<str>) {
        if self.progress {
            eprintln!("walklab: {}", msg.as_ref());
        }
    }
}

pub fn parse_format(s: &str) -> Result<Format> {
    match s {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        _ => Err(Error::InvalidParameter(format!(
            "unknown format '{s}' (csv | json)"
        ))),
    }
}

/// A command result: a table plus a JSON summary.
pub struct Report {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// `# key: value` lines under the CSV header.
    pub notes: Vec<(String, String)>,
    pub summary: Map<String, Value>,
    /// Whether JSON output carries the rows as well as the summary.
    pub json_rows: bool,
    pub default_format: Format,
}

impl Report {
    pub fn new(columns: &[&str]) -> Self {
        Report {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
            summary: Map::new(),
            json_rows: true,
            default_format: Format::Csv,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    pub fn set(&mut self, key: &str, value: impl serde::Serialize) {
        let v = serde_json::to_value(value).expect("serializable summary");
        self.summary.insert(key.to_string(), v);
    }
}

fn cell_value(c: &Cell) -> Value {
    match c {
        Cell::Float(x) => Number::from_f64(*x).map_or(Value::Null, Value::Number),
        Cell::Int(x) => Value::from(*x),
        Cell::Bool(b) => Value::Bool(*b),
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Empty => Value::Null,
    }
}

fn csv(ctx: &Context, r: &Report) -> String {
    let cols: Vec<&str> = r.columns.iter().map(String::as_str).collect();
    let mut table = CsvTable::new(&cols).config(&ctx.config).seed(ctx.seed);
    for (k, v) in &r.notes {
        table.note(k, v);
    }
    for row in &r.rows {
        table.push(row.clone());
    }
    table.render()
}

fn json(ctx: &Context, r: &Report) -> String {
    let mut body = r.summary.clone();
    if r.json_rows {
        let rows: Vec<Value> = r
            .rows
            .iter()
            .map(|row| {
                Value::Object(
                    r.columns
                        .iter()
                        .zip(row)
                        .map(|(k, c)| (k.clone(), cell_value(c)))
                        .collect(),
                )
            })
            .collect();
        body.insert("rows".into(), Value::Array(rows));
    }
    json_envelope(&ctx.config, ctx.seed, &Value::Object(body))
}

fn write_to(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Error::InvalidParameter(format!("cannot write to stdout: {e}")))
        }
    }
}

pub fn emit(ctx: &Context, r: &Report) -> Result<()> {
    match ctx.format.unwrap_or(r.default_format) {
        Format::Csv => {
            write_to(ctx.output.as_ref(), &csv(ctx, r))?;
            if let Some(path) = &ctx.summary {
                let summary =
                    json_envelope(&ctx.config, ctx.seed, &Value::Object(r.summary.clone()));
                write_to(Some(path), &summary)?;
            }
            Ok(())
        }
        Format::Json => write_to(ctx.output.as_ref(), &json(ctx, r)),
    }
}
