//! Exact-match accuracy of externally produced outputs.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::datasets::DatasetRecord;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScoreError {
    #[error("prediction id '{0}' appears more than once")]
    DuplicatePredictionKey(String),
    #[error("predictions line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Reads `{"id": ..., "output": ...}` lines. `prediction` and `target` are
/// accepted in place of `output`; blank lines and a config header are skipped.
pub fn parse_predictions(text: &str) -> Result<Vec<(String, String)>, ScoreError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| ScoreError::Malformed { line: i + 1, message };
        let v: Value = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        if v.get("config").is_some() && v.get("id").is_none() {
            continue;
        }
        let id = v.get("id").and_then(Value::as_str).ok_or_else(|| bad("missing string field 'id'".into()))?;
        let output = ["output", "prediction", "target"]
            .iter()
            .find_map(|k| v.get(*k).and_then(Value::as_str))
            .ok_or_else(|| bad("missing string field 'output'".into()))?;
        out.push((id.to_string(), output.to_string()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreRow {
    pub task: String,
    pub min: usize,
    pub max: usize,
    pub total: usize,
    pub correct: usize,
    pub missing: usize,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub rows: Vec<ScoreRow>,
    /// Records without a prediction; they count as errors.
    pub missing: Vec<String>,
    /// Predictions whose id matches no record.
    pub unknown: Vec<String>,
}

impl ScoreTable {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<12} {:<11} {:>7} {:>7} {:>7} {:>9}", "task", "bin", "total", "correct", "missing", "accuracy");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<12} {:<11} {:>7} {:>7} {:>7} {:>9.4}",
                r.task,
                format!("{}:{}", r.min, r.max),
                r.total,
                r.correct,
                r.missing,
                r.accuracy
            );
        }
        if !self.missing.is_empty() {
            let _ = writeln!(out, "missing predictions ({}): {}", self.missing.len(), self.missing.join(", "));
        }
        if !self.unknown.is_empty() {
            let _ = writeln!(out, "predictions for unknown ids ({}): {}", self.unknown.len(), self.unknown.join(", "));
        }
        out
    }
}

fn normalize(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Accuracy per (task, length bin). Without `bins` every distinct length
/// is its own bin; records outside all given bins are ignored.
pub fn score_outputs(
    records: &[DatasetRecord],
    predictions: &[(String, String)],
    bins: Option<&[(usize, usize)]>,
) -> Result<ScoreTable, ScoreError> {
    let mut by_id: HashMap<&str, &str> = HashMap::with_capacity(predictions.len());
    for (id, out) in predictions {
        if by_id.insert(id.as_str(), out.as_str()).is_some() {
            return Err(ScoreError::DuplicatePredictionKey(id.clone()));
        }
    }
    let mut cells: BTreeMap<(String, usize, usize), (usize, usize, usize)> = BTreeMap::new();
    let mut missing = Vec::new();
    for r in records {
        let bin = match bins {
            None => Some((r.length, r.length)),
            Some(bs) => bs.iter().copied().find(|&(lo, hi)| lo <= r.length && r.length <= hi),
        };
        let Some((lo, hi)) = bin else { continue };
        let cell = cells.entry((r.task.clone(), lo, hi)).or_default();
        cell.0 += 1;
        match by_id.get(r.id.as_str()) {
            Some(out) => {
                if normalize(out) == normalize(&r.target) {
                    cell.1 += 1;
                }
            }
            None => {
                cell.2 += 1;
                missing.push(r.id.clone());
            }
        }
    }
    let known: std::collections::HashSet<&str> = records.iter().map(|r| r.id.as_str()).collect();
    let unknown = predictions.iter().filter(|(id, _)| !known.contains(id.as_str())).map(|(id, _)| id.clone()).collect();
    let rows = cells
        .into_iter()
        .map(|((task, min, max), (total, correct, miss))| ScoreRow {
            task,
            min,
            max,
            total,
            correct,
            missing: miss,
            accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
        })
        .collect();
    Ok(ScoreTable { rows, missing, unknown })
}
