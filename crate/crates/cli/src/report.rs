//! Versioned report envelope and its JSON, CSV and text renderings.

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

pub const SCHEMA: &str = "fdchk/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Provenance {
    pub version: &'static str,
    /// SHA-256 of the configuration text, or of the inline φ shorthand.
    pub config_sha256: Option<String>,
    pub grid: Option<Vec<usize>>,
    pub tolerances: Map<String, Value>,
    pub seed: Option<u64>,
    pub budget: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl Provenance {
    pub fn new(input: Option<&str>, timestamp: bool) -> Self {
        Provenance {
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: input.map(sha256_hex),
            timestamp: timestamp.then(|| chrono::Utc::now().to_rfc3339()),
            ..Default::default()
        }
    }

    pub fn tolerance(&mut self, name: &str, v: f64) {
        self.tolerances.insert(name.to_string(), Value::from(v));
    }
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// A finished command: the JSON result plus an optional table that the CSV
/// and text renderings prefer over the flattened result.
pub struct Report {
    pub command: &'static str,
    pub provenance: Provenance,
    pub result: Value,
    pub table: Option<Table>,
    /// One-line summary leading the text rendering.
    pub headline: String,
}

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut env = Map::new();
                env.insert("schema".into(), SCHEMA.into());
                env.insert("command".into(), self.command.into());
                env.insert("provenance".into(), serde_json::to_value(&self.provenance).expect("provenance serializes"));
                env.insert("result".into(), self.result.clone());
                let mut s = serde_json::to_string_pretty(&Value::Object(env)).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Csv => match &self.table {
                Some(t) => t.to_csv(),
                None => {
                    let mut out = String::from("key,value\n");
                    for (k, v) in flatten(&self.result) {
                        out.push_str(&format!("{k},{}\n", csv_cell(&v)));
                    }
                    out
                }
            },
            Format::Text => {
                let mut out = format!("{}\n", self.headline);
                match &self.table {
                    Some(t) => out.push_str(&t.to_csv().replace(',', "\t")),
                    None => {
                        for (k, v) in flatten(&self.result) {
                            out.push_str(&format!("  {k}: {v}\n"));
                        }
                    }
                }
                out
            }
        }
    }
}

fn csv_cell(v: &str) -> String {
    if v.contains([',', '"', '\n']) {
        format!("\"{}\"", v.replace('"', "\"\""))
    } else {
        v.to_string()
    }
}

/// Dotted-path leaves of a JSON value, objects in key order.
pub fn flatten(v: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    walk(v, String::new(), &mut out);
    out
}

fn walk(v: &Value, path: String, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if path.is_empty() { k.to_string() } else { format!("{path}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| walk(x, join(k), out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| walk(x, join(&i.to_string()), out)),
        Value::String(s) => out.push((path, s.clone())),
        other => out.push((path, other.to_string())),
    }
}
