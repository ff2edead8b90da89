//! Tabular and document output with an embedded provenance header.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_sha256: String,
    pub params: Value,
}

impl Provenance {
    pub fn new<T: Serialize>(command: &str, params: &T) -> Result<Self> {
        let params = serde_json::to_value(params).map_err(|e| Error::Schema(e.to_string()))?;
        Ok(Provenance {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            config_sha256: config_hash(&params),
            params,
        })
    }

    /// True if the echoed parameters still hash to the recorded value.
    pub fn verify(&self) -> bool {
        config_hash(&self.params) == self.config_sha256
    }
}

/// SHA-256 of the compact JSON text of a parameter record.
pub fn config_hash(params: &Value) -> String {
    let text = serde_json::to_string(params).unwrap_or_default();
    let digest = Sha256::digest(text.as_bytes());
    let mut s = String::with_capacity(64);
    for b in digest {
        let _ = write!(s, "{b:02x}");
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Schema {
    pub name: &'static str,
    pub columns: &'static [&'static str],
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
    Null,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Null, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
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

/// Round to `digits` significant digits; `None` keeps the value.
pub fn round_sig(x: f64, digits: Option<usize>) -> f64 {
    match digits {
        Some(d) if x.is_finite() && x != 0.0 => {
            let d = d.clamp(1, 17);
            format!("{:.*e}", d - 1, x).parse().unwrap_or(x)
        }
        _ => x,
    }
}

/// Shortest text that parses back to the (rounded) value.
pub fn format_num(x: f64, digits: Option<usize>) -> String {
    let x = round_sig(x, digits);
    // no negative zero in output
    let x = if x == 0.0 { 0.0 } else { x };
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = x.abs();
    if a != 0.0 && !(1e-5..1e16).contains(&a) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

fn cell_text(c: &Cell, digits: Option<usize>) -> String {
    match c {
        Cell::Num(x) => format_num(*x, digits),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) => {
            if s.contains([',', '"', '\n']) {
                format!("\"{}\"", s.replace('"', "\"\""))
            } else {
                s.clone()
            }
        }
        Cell::Bool(b) => b.to_string(),
        Cell::Null => String::new(),
    }
}

fn cell_json(c: &Cell, digits: Option<usize>) -> Value {
    match c {
        Cell::Num(x) => serde_json::Number::from_f64(round_sig(*x, digits)).map_or(Value::Null, Value::Number),
        Cell::Int(i) => Value::from(*i),
        Cell::Text(s) => Value::String(s.clone()),
        Cell::Bool(b) => Value::Bool(*b),
        Cell::Null => Value::Null,
    }
}

fn check_rows(schema: &Schema, rows: &[Vec<Cell>]) -> Result<()> {
    for (i, row) in rows.iter().enumerate() {
        if row.len() != schema.columns.len() {
            return Err(Error::Schema(format!(
                "{}: row {i} has {} fields, schema has {} ({})",
                schema.name,
                row.len(),
                schema.columns.len(),
                schema.columns.join(",")
            )));
        }
    }
    Ok(())
}

fn round_value(v: &mut Value, digits: Option<usize>) {
    if digits.is_none() {
        return;
    }
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => {
            if let Some(x) = n
                .as_f64()
                .and_then(|x| serde_json::Number::from_f64(round_sig(x, digits)))
            {
                *n = x;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(|x| round_value(x, digits)),
        Value::Object(o) => o.values_mut().for_each(|x| round_value(x, digits)),
        _ => {}
    }
}

fn json_text(prov: &Provenance, key: &str, body: Value) -> Result<String> {
    let mut doc = Map::new();
    doc.insert(
        "provenance".into(),
        serde_json::to_value(prov).map_err(|e| Error::Schema(e.to_string()))?,
    );
    doc.insert(key.into(), body);
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).map_err(|e| Error::Schema(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// CSV: `# key: value` provenance lines, the header row, then one line per
/// row. JSON: `{"provenance": …, "records": [...]}`.
pub fn render_table(
    schema: &Schema,
    rows: &[Vec<Cell>],
    format: Format,
    prov: &Provenance,
    digits: Option<usize>,
) -> Result<String> {
    check_rows(schema, rows)?;
    match format {
        Format::Csv => {
            let mut s = String::new();
            let _ = writeln!(s, "# tool: {}", prov.tool);
            let _ = writeln!(s, "# version: {}", prov.version);
            let _ = writeln!(s, "# command: {}", prov.command);
            let _ = writeln!(s, "# config_sha256: {}", prov.config_sha256);
            let _ = writeln!(
                s,
                "# params: {}",
                serde_json::to_string(&prov.params).map_err(|e| Error::Schema(e.to_string()))?
            );
            s.push_str(&schema.columns.join(","));
            s.push('\n');
            for row in rows {
                let line: Vec<String> = row.iter().map(|c| cell_text(c, digits)).collect();
                s.push_str(&line.join(","));
                s.push('\n');
            }
            Ok(s)
        }
        Format::Json => {
            let records = rows
                .iter()
                .map(|row| {
                    let mut m = Map::new();
                    for (k, c) in schema.columns.iter().zip(row) {
                        m.insert((*k).into(), cell_json(c, digits));
                    }
                    Value::Object(m)
                })
                .collect();
            json_text(prov, "records", Value::Array(records))
        }
    }
}

/// A single JSON result document with provenance.
pub fn render_document<T: Serialize>(result: &T, prov: &Provenance, digits: Option<usize>) -> Result<String> {
    let mut v = serde_json::to_value(result).map_err(|e| Error::Schema(e.to_string()))?;
    round_value(&mut v, digits);
    json_text(prov, "result", v)
}

/// Recover the provenance block from a CSV or JSON output.
pub fn parse_provenance(text: &str) -> Result<Provenance> {
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        let p = v
            .get("provenance")
            .cloned()
            .ok_or_else(|| Error::Schema("missing provenance".into()))?;
        return serde_json::from_value(p).map_err(|e| Error::Schema(e.to_string()));
    }
    let mut m = Map::new();
    for line in text.lines() {
        let Some(rest) = line.strip_prefix("# ") else { break };
        let Some((k, v)) = rest.split_once(": ") else {
            return Err(Error::Schema(format!("bad provenance line: {line}")));
        };
        let v = if k == "params" {
            serde_json::from_str(v).map_err(|e| Error::Schema(e.to_string()))?
        } else {
            Value::String(v.to_string())
        };
        m.insert(k.to_string(), v);
    }
    serde_json::from_value(Value::Object(m)).map_err(|e| Error::Schema(e.to_string()))
}

/// Write through a temporary sibling file and rename into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| io(std::io::Error::new(std::io::ErrorKind::InvalidInput, "no file name")))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io(e));
    }
    Ok(())
}
