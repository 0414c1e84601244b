//! Artifacts and the files they are written to.
//!
//! Every file carries a metadata block: tool version, SHA-256 of the
//! effective config, a timestamp, and the config itself. CSV files keep the
//! block in `#` comment lines above a single header row.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::config::{Format, RunConfig};
use crate::error::{CliError, Result};

pub const CSV_CONFIG_PREFIX: &str = "# config: ";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Appended to the output stem; empty for the main table.
    pub suffix: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(suffix: &str, columns: &[&str]) -> Self {
        Self {
            suffix: suffix.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&v| number(v)).collect());
    }
}

/// Result of one job: a summary object, a one-line verdict and data tables.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub summary: Map<String, Value>,
    pub line: String,
    pub tables: Vec<Table>,
}

/// JSON number, or null for NaN and infinities.
pub fn number(v: f64) -> Value {
    serde_json::Number::from_f64(v)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

pub fn config_hash(config_text: &str) -> String {
    let digest = Sha256::digest(config_text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn metadata(config_text: &str) -> Value {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "version": VERSION,
        "config_hash": config_hash(config_text),
        "timestamp": timestamp,
        "config": config_text,
    })
}

fn format_cell(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => format!("{f:.12e}"),
            _ => n.to_string(),
        },
        Value::Null => "NaN".to_string(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Creates the output directory and checks that it accepts files.
pub fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let probe = dir.join(".wavecross-write-check");
    fs::write(&probe, b"").map_err(|e| CliError::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| CliError::io(&probe, e))
}

fn table_json(table: &Table) -> Value {
    json!({ "columns": table.columns, "rows": table.rows })
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(contents).map_err(|e| CliError::io(path, e))
}

/// Writes `artifact` under the configured directory; returns the paths written.
pub fn emit(artifact: &Artifact, config: &RunConfig) -> Result<Vec<PathBuf>> {
    let config_text = config.to_toml();
    let meta = metadata(&config_text);
    let stem = &config.output.name;
    let mut written = Vec::new();

    let mut doc = Map::new();
    doc.insert("metadata".into(), meta.clone());
    doc.insert("summary".into(), Value::Object(artifact.summary.clone()));
    match config.output.format {
        Format::Json => {
            let tables: Map<String, Value> = artifact
                .tables
                .iter()
                .map(|t| {
                    (
                        if t.suffix.is_empty() {
                            "main".to_string()
                        } else {
                            t.suffix.clone()
                        },
                        table_json(t),
                    )
                })
                .collect();
            doc.insert("tables".into(), Value::Object(tables));
        }
        Format::Csv => {
            for table in &artifact.tables {
                let path = config.out_dir.join(format!("{stem}{}.csv", table.suffix));
                write_file(&path, csv_bytes(table, &meta, &config_text)?.as_slice())?;
                written.push(path);
            }
        }
    }
    let path = config.out_dir.join(format!("{stem}.json"));
    let mut text =
        serde_json::to_string_pretty(&Value::Object(doc)).expect("JSON document serializes");
    text.push('\n');
    write_file(&path, text.as_bytes())?;
    written.insert(0, path);
    Ok(written)
}

fn csv_bytes(table: &Table, meta: &Value, config_text: &str) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(
        format!(
            "# wavecross {}\n",
            meta["version"].as_str().unwrap_or(VERSION)
        )
        .as_bytes(),
    );
    out.extend_from_slice(
        format!(
            "# config_hash: {}\n",
            meta["config_hash"].as_str().unwrap_or("")
        )
        .as_bytes(),
    );
    out.extend_from_slice(format!("# timestamp: {}\n", meta["timestamp"]).as_bytes());
    for line in config_text.lines() {
        out.extend_from_slice(format!("{CSV_CONFIG_PREFIX}{line}\n").as_bytes());
    }
    let mut writer = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::io("<csv buffer>", std::io::Error::other(e));
    writer.write_record(&table.columns).map_err(io)?;
    for row in &table.rows {
        writer
            .write_record(row.iter().map(format_cell))
            .map_err(io)?;
    }
    writer
        .into_inner()
        .map_err(|e| CliError::io("<csv buffer>", std::io::Error::other(e.to_string())))
}
