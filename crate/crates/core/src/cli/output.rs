//! Artifact writers. JSON is printed by hand from a `serde_json::Value` so
//! that every float carries exactly 17 significant digits and the bytes do
//! not depend on the formatter's shortest-representation choices.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    format!("{x:.16e}")
}

fn write_string(out: &mut String, s: &str) {
    // serde_json's escaping is already canonical.
    out.push_str(&serde_json::to_string(s).expect("string serialization cannot fail"));
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => write_string(out, s),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // Short numeric arrays stay on one line.
            if items.len() <= 8 && items.iter().all(|i| i.is_number()) {
                out.push('[');
                for (j, item) in items.iter().enumerate() {
                    if j > 0 {
                        out.push_str(", ");
                    }
                    write_value(out, item, indent);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (j, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, item, indent + 1);
                if j + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (j, (k, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_string(out, k);
                out.push_str(": ");
                write_value(out, item, indent + 1);
                if j + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Deterministic pretty JSON with sorted keys and 17-digit floats.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("artifact types serialize to JSON");
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    out
}

/// SHA-256 of the canonical JSON of the effective configuration and the
/// command name.
pub fn config_hash(command: &str, cfg: &RunConfig) -> String {
    let canonical = to_json(&serde_json::json!({ "command": command, "config": cfg }));
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

/// Common header of every artifact.
#[derive(Debug, Clone, Serialize)]
pub struct Meta<'a> {
    pub command: &'a str,
    pub version: &'static str,
    pub config_hash: String,
    pub config: &'a RunConfig,
}

impl<'a> Meta<'a> {
    pub fn new(command: &'a str, cfg: &'a RunConfig) -> Self {
        Self {
            command,
            version: VERSION,
            config_hash: config_hash(command, cfg),
            config: cfg,
        }
    }

    fn csv_header(&self) -> String {
        format!(
            "# neumann-layers {} {}\n# config_hash {}\n",
            self.version, self.command, self.config_hash
        )
    }
}

/// Writes `{"meta": …, "<key>": payload}` as JSON.
pub fn json_document<T: Serialize>(meta: &Meta<'_>, key: &str, payload: &T) -> String {
    let mut map = serde_json::Map::new();
    map.insert("meta".into(), serde_json::to_value(meta).expect("meta serializes"));
    map.insert(key.into(), serde_json::to_value(payload).expect("payload serializes"));
    to_json(&Value::Object(map))
}

/// CSV with the artifact header as `#` comment lines.
pub fn csv_document(meta: &Meta<'_>, columns: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = meta.csv_header();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn num(x: f64) -> String {
    format_float(x)
}

/// Output directory handle; writes are sequential.
pub struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    pub fn create(dir: &Path) -> io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn write(&self, name: &str, contents: &str) -> io::Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)?;
        Ok(path)
    }
}
