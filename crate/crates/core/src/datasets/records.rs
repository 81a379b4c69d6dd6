//! Line-delimited JSON record files.
//!
//! A file may open with a `{"config": ...}` line holding the resolved
//! generation settings; every other line is one [`DatasetRecord`].

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::Split;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub task: String,
    pub input: String,
    pub target: String,
    pub length: usize,
    pub seed: u64,
    pub split: Split,
    #[serde(default)]
    pub meta: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snippet: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub revert: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cherrypick: Option<String>,
}

impl Default for DatasetRecord {
    fn default() -> Self {
        DatasetRecord {
            id: String::new(),
            task: String::new(),
            input: String::new(),
            target: String::new(),
            length: 0,
            seed: 0,
            split: Split::Test,
            meta: BTreeMap::new(),
            snippet: None,
            revert: None,
            cherrypick: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}, line {line}: malformed record: {message}")]
    Malformed { path: PathBuf, line: usize, message: String },
}

#[derive(Serialize, Deserialize)]
struct Header {
    config: Value,
}

/// Serializes records (and an optional config header) to JSONL text.
pub fn to_jsonl(records: &[DatasetRecord], config: Option<&Value>) -> String {
    let mut out = String::new();
    if let Some(c) = config {
        out.push_str(&serde_json::to_string(&Header { config: c.clone() }).expect("json value"));
        out.push('\n');
    }
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn write_records(path: &Path, records: &[DatasetRecord], config: Option<&Value>) -> Result<(), RecordError> {
    let io_err = |source| RecordError::Io { path: path.to_path_buf(), source };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    w.write_all(to_jsonl(records, config).as_bytes()).map_err(io_err)?;
    w.flush().map_err(io_err)
}

/// Parses JSONL text. Blank lines are skipped; a config header is only
/// recognised on the first non-blank line.
pub fn parse_records(text: &str, path: &Path) -> Result<(Option<Value>, Vec<DatasetRecord>), RecordError> {
    let mut config = None;
    let mut records = Vec::new();
    let mut first = true;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |e: serde_json::Error| RecordError::Malformed {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        };
        if first {
            first = false;
            if let Ok(h) = serde_json::from_str::<Header>(line) {
                config = Some(h.config);
                continue;
            }
        }
        records.push(serde_json::from_str(line).map_err(malformed)?);
    }
    Ok((config, records))
}

pub fn read_records(path: &Path) -> Result<(Option<Value>, Vec<DatasetRecord>), RecordError> {
    let text = fs::read_to_string(path).map_err(|source| RecordError::Io { path: path.to_path_buf(), source })?;
    parse_records(&text, path)
}
