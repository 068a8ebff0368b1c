//! Table assembly and serialization. Every subcommand produces one table
//! plus a summary object; this module renders them as CSV (stable
//! snake_case header, floats printed with 17 significant digits so they
//! round-trip exactly) or as a single JSON object `{config, rows, summary}`.
//!
//! Rendering is single threaded and consumes rows in the order the command
//! assembled them, so identical configurations produce byte-identical
//! output no matter how many workers evaluated the cells. In CSV mode the
//! summary goes to standard error; JSON embeds it.

use std::fs;
use std::io::{self, Write};

use serde_json::{json, Value};

use crate::config::{OutputFormat, RunConfig};

/// One table entry. `Empty` marks a field that is intentionally absent
/// (for example numeric columns of a skipped cell); it renders as an empty
/// CSV field and a JSON `null`, so nonfinite values never masquerade as
/// numbers.
#[derive(Clone, Debug)]
pub enum Field {
    Float(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Empty,
}

impl Field {
    pub fn text(s: impl Into<String>) -> Self {
        Field::Text(s.into())
    }

    /// A float that is only reported when finite; infinities and NaNs are
    /// flagged by the caller and rendered empty.
    pub fn finite(v: f64) -> Self {
        if v.is_finite() {
            Field::Float(v)
        } else {
            Field::Empty
        }
    }

    fn csv(&self) -> String {
        match self {
            Field::Float(v) => format!("{v:.16e}"),
            Field::Int(v) => v.to_string(),
            Field::Text(s) => s.clone(),
            Field::Bool(b) => b.to_string(),
            Field::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Field::Float(v) => json!(v),
            Field::Int(v) => json!(v),
            Field::Text(s) => json!(s),
            Field::Bool(b) => json!(b),
            Field::Empty => Value::Null,
        }
    }
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<Field>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Field>) {
        assert_eq!(row.len(), self.header.len(), "row width matches header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Field::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    fn to_json_rows(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, Value> = self
                    .header
                    .iter()
                    .zip(row)
                    .map(|(k, f)| ((*k).to_string(), f.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        Value::Array(rows)
    }
}

/// The complete result of one subcommand run.
pub struct CommandResult {
    pub echo: Value,
    pub table: Table,
    pub summary: Value,
    pub all_pass: bool,
}

/// Serialize and route the result, then log a one-line digest to standard
/// error. Returns whether every non-flagged check passed.
pub fn emit(result: &CommandResult, cfg: &RunConfig) -> io::Result<bool> {
    let body = match cfg.format {
        OutputFormat::Csv => result.table.to_csv(),
        OutputFormat::Json => {
            let doc = json!({
                "config": result.echo,
                "rows": result.table.to_json_rows(),
                "summary": result.summary,
            });
            let mut s = serde_json::to_string_pretty(&doc)?;
            s.push('\n');
            s
        }
    };
    match &cfg.out {
        Some(path) => fs::write(path, body)?,
        None => io::stdout().lock().write_all(body.as_bytes())?,
    }
    if matches!(cfg.format, OutputFormat::Csv) {
        eprintln!("[bgeo] summary: {}", serde_json::to_string(&result.summary)?);
    }
    eprintln!(
        "[bgeo] {} rows written, all checks pass: {}",
        result.table.len(),
        result.all_pass
    );
    Ok(result.all_pass)
}
