//! CSV and JSON artifact writers.
//!
//! CSV files start with a `# tool=glekit <version> config_hash=<sha256>`
//! comment, then a header row; numbers use `.` as decimal separator and
//! lines end in `\n`. JSON documents carry `schema_version` and a `meta`
//! block with the same provenance.

use crate::error::Result;
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::Path;

pub const TOOL: &str = "glekit";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SCHEMA_VERSION: u32 = 1;

/// Provenance stamped on every artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
}

impl Meta {
    pub fn new(config_hash: impl Into<String>) -> Self {
        Meta {
            tool: TOOL,
            version: VERSION,
            config_hash: config_hash.into(),
        }
    }
}

/// Shortest round-tripping representation in exponent form.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        "nan".to_string()
    }
}

/// Renders a CSV document; each row is a list of already formatted cells.
pub fn csv_string(meta: &Meta, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# tool={} {} config_hash={}", meta.tool, meta.version, meta.config_hash);
    out.push_str(&header.join(","));
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, meta: &Meta, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    std::fs::write(path, csv_string(meta, header, rows))?;
    Ok(())
}

/// Wraps `body` (a JSON object) with `schema_version` and `meta`.
pub fn json_document(meta: &Meta, body: Value) -> Value {
    let mut doc = json!({
        "schema_version": SCHEMA_VERSION,
        "meta": meta,
    });
    if let (Some(d), Value::Object(b)) = (doc.as_object_mut(), body) {
        d.extend(b);
    }
    doc
}

pub fn write_json(path: &Path, meta: &Meta, body: Value) -> Result<()> {
    let mut s = serde_json::to_string_pretty(&json_document(meta, body)).expect("serializable");
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}
