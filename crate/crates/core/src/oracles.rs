//! Brute-force ground truth for every task variant.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::symbol::Symbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskKind {
    UL,
    UR,
    NLFirst,
    NRFirst,
    NLLast,
    NRLast,
    UF,
    UB,
    NF,
    NB,
    WordReverse,
}

impl TaskKind {
    pub const ALL: [TaskKind; 11] = [
        TaskKind::UL,
        TaskKind::UR,
        TaskKind::NLFirst,
        TaskKind::NRFirst,
        TaskKind::NLLast,
        TaskKind::NRLast,
        TaskKind::UF,
        TaskKind::UB,
        TaskKind::NF,
        TaskKind::NB,
        TaskKind::WordReverse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::UL => "UL",
            TaskKind::UR => "UR",
            TaskKind::NLFirst => "NLFirst",
            TaskKind::NRFirst => "NRFirst",
            TaskKind::NLLast => "NLLast",
            TaskKind::NRLast => "NRLast",
            TaskKind::UF => "UF",
            TaskKind::UB => "UB",
            TaskKind::NF => "NF",
            TaskKind::NB => "NB",
            TaskKind::WordReverse => "WordReverse",
        }
    }

    pub fn is_retrieval(self) -> bool {
        matches!(
            self,
            TaskKind::UL | TaskKind::UR | TaskKind::NLFirst | TaskKind::NRFirst | TaskKind::NLLast | TaskKind::NRLast
        )
    }

    pub fn is_copy(self) -> bool {
        matches!(self, TaskKind::UF | TaskKind::UB | TaskKind::NF | TaskKind::NB)
    }

    /// Whether the task requires a unique query (retrieval) or injective source (copy).
    pub fn is_unique(self) -> bool {
        matches!(self, TaskKind::UL | TaskKind::UR | TaskKind::UF | TaskKind::UB)
    }

    /// Whether the answer lies left of the query (retrieval) or the copy runs backwards.
    pub fn is_leftward(self) -> bool {
        matches!(self, TaskKind::UL | TaskKind::NLFirst | TaskKind::NLLast | TaskKind::UB | TaskKind::NB)
    }

    /// Tasks that share sampled strings with this one.
    pub fn group(self) -> &'static [TaskKind] {
        match self {
            TaskKind::UL | TaskKind::UR => &[TaskKind::UL, TaskKind::UR],
            TaskKind::NLFirst | TaskKind::NRFirst | TaskKind::NLLast | TaskKind::NRLast => {
                &[TaskKind::NLFirst, TaskKind::NRFirst, TaskKind::NLLast, TaskKind::NRLast]
            }
            TaskKind::UF | TaskKind::UB => &[TaskKind::UF, TaskKind::UB],
            TaskKind::NF | TaskKind::NB => &[TaskKind::NF, TaskKind::NB],
            TaskKind::WordReverse => &[TaskKind::WordReverse],
        }
    }

    /// Shortest instance length the generators accept: context length for
    /// retrieval (query excluded), source length for copying.
    pub fn min_length(self) -> usize {
        match self {
            TaskKind::UL | TaskKind::UR => 3,
            TaskKind::NLFirst | TaskKind::NRFirst | TaskKind::NLLast | TaskKind::NRLast => 4,
            TaskKind::UF | TaskKind::UB | TaskKind::NF | TaskKind::NB | TaskKind::WordReverse => 1,
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown task '{0}' (expected one of UL, UR, NLFirst, NRFirst, NLLast, NRLast, UF, UB, NF, NB, WordReverse)")]
pub struct UnknownTask(pub String);

impl FromStr for TaskKind {
    type Err = UnknownTask;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownTask(s.to_string()))
    }
}

/// A retrieval context with its query. Occurrence indices (0-based, into
/// the context) are computed on construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RetrievalInstance {
    context: Vec<Symbol>,
    query: Symbol,
    occurrences: Vec<usize>,
}

impl RetrievalInstance {
    pub fn new(context: Vec<Symbol>, query: Symbol) -> Self {
        let occurrences = context.iter().enumerate().filter(|(_, s)| **s == query).map(|(i, _)| i).collect();
        RetrievalInstance { context, query, occurrences }
    }

    pub fn context(&self) -> &[Symbol] {
        &self.context
    }

    pub fn query(&self) -> &Symbol {
        &self.query
    }

    pub fn occurrences(&self) -> &[usize] {
        &self.occurrences
    }

    /// The same query against the reversed context.
    pub fn reversed(&self) -> Self {
        RetrievalInstance::new(self.context.iter().rev().cloned().collect(), self.query.clone())
    }

    /// Index of the context position whose neighbour is the answer, and the
    /// answer index itself, if both exist.
    fn relevant(&self, kind: TaskKind) -> Option<(usize, Option<usize>)> {
        let q = match kind {
            TaskKind::UL | TaskKind::UR | TaskKind::NLFirst | TaskKind::NRFirst => *self.occurrences.first()?,
            TaskKind::NLLast | TaskKind::NRLast => *self.occurrences.last()?,
            _ => return None,
        };
        let answer = if kind.is_leftward() {
            q.checked_sub(1)
        } else {
            Some(q + 1).filter(|&a| a < self.context.len())
        };
        Some((q, answer))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CopyInstance {
    pub source: Vec<Symbol>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TaskInstance {
    Retrieval(RetrievalInstance),
    Copy(CopyInstance),
    Words { tokens: Vec<Symbol>, separator: Symbol },
}

/// A violated instance constraint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstanceDiagnostic {
    WrongShape { kind: TaskKind },
    OccurrenceCount { kind: TaskKind, required: &'static str, found: usize },
    Boundary { kind: TaskKind, occurrence: usize, context_len: usize },
    DuplicateSymbol { symbol: Symbol, first: usize, second: usize },
    SpecialSymbol { position: usize, symbol: Symbol },
    OutsideFirstHalf { occurrence: usize, limit: usize },
    MalformedWords(String),
}

impl fmt::Display for InstanceDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceDiagnostic::WrongShape { kind } => write!(f, "instance shape does not fit task {kind}"),
            InstanceDiagnostic::OccurrenceCount { kind, required, found } => {
                write!(f, "occurrence count: {kind} needs the query {required} in the context, found {found}")
            }
            InstanceDiagnostic::Boundary { kind, occurrence, context_len } => write!(
                f,
                "boundary: {kind} answer for the occurrence at index {occurrence} falls outside the context of length {context_len}"
            ),
            InstanceDiagnostic::DuplicateSymbol { symbol, first, second } => {
                write!(f, "duplicate symbol: {symbol:?} at indices {first} and {second}")
            }
            InstanceDiagnostic::SpecialSymbol { position, symbol } => {
                write!(f, "reserved symbol {symbol:?} at index {position}")
            }
            InstanceDiagnostic::OutsideFirstHalf { occurrence, limit } => {
                write!(f, "placement: query occurrence at index {occurrence} is not below {limit}")
            }
            InstanceDiagnostic::MalformedWords(m) => write!(f, "malformed word string: {m}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("invalid instance: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidInstance(Vec<InstanceDiagnostic>),
    #[error("malformed word string at token {position}: {reason}")]
    MalformedWordString { position: usize, reason: String },
}

/// Checks the constraints `kind` places on `inst`. Empty means valid.
pub fn validate_instance(kind: TaskKind, inst: &TaskInstance) -> Vec<InstanceDiagnostic> {
    let mut out = Vec::new();
    match (inst, kind) {
        (TaskInstance::Retrieval(r), k) if k.is_retrieval() => {
            for (position, s) in r.context.iter().chain(std::iter::once(&r.query)).enumerate() {
                if s.is_special() {
                    out.push(InstanceDiagnostic::SpecialSymbol { position, symbol: s.clone() });
                }
            }
            let t = r.occurrences.len();
            if k.is_unique() && t != 1 {
                out.push(InstanceDiagnostic::OccurrenceCount { kind: k, required: "exactly once", found: t });
            } else if !k.is_unique() && t < 2 {
                out.push(InstanceDiagnostic::OccurrenceCount { kind: k, required: "at least twice", found: t });
            }
            if let Some((q, None)) = r.relevant(k) {
                out.push(InstanceDiagnostic::Boundary { kind: k, occurrence: q, context_len: r.context.len() });
            }
        }
        (TaskInstance::Copy(c), k) if k.is_copy() => {
            for (position, s) in c.source.iter().enumerate() {
                if s.is_special() {
                    out.push(InstanceDiagnostic::SpecialSymbol { position, symbol: s.clone() });
                }
            }
            if k.is_unique() {
                out.extend(duplicates(&c.source));
            }
        }
        (TaskInstance::Words { tokens, separator }, TaskKind::WordReverse) => {
            if let Err(OracleError::MalformedWordString { position, reason }) = split_words(tokens, separator) {
                out.push(InstanceDiagnostic::MalformedWords(format!("token {position}: {reason}")));
            }
        }
        _ => out.push(InstanceDiagnostic::WrongShape { kind }),
    }
    out
}

fn duplicates(source: &[Symbol]) -> Vec<InstanceDiagnostic> {
    let mut seen = std::collections::HashMap::new();
    let mut out = Vec::new();
    for (i, s) in source.iter().enumerate() {
        if let Some(&first) = seen.get(s) {
            out.push(InstanceDiagnostic::DuplicateSymbol { symbol: s.clone(), first, second: i });
        } else {
            seen.insert(s, i);
        }
    }
    out
}

/// Occurrences at or beyond `ceil(context_len / 2)`, for first-half placement.
pub fn first_half_violations(inst: &RetrievalInstance) -> Vec<InstanceDiagnostic> {
    let limit = inst.context.len().div_ceil(2);
    inst.occurrences
        .iter()
        .filter(|&&q| q >= limit)
        .map(|&occurrence| InstanceDiagnostic::OutsideFirstHalf { occurrence, limit })
        .collect()
}

pub fn oracle_retrieval(kind: TaskKind, inst: &RetrievalInstance) -> Result<Symbol, OracleError> {
    let diags = validate_instance(kind, &TaskInstance::Retrieval(inst.clone()));
    if !diags.is_empty() {
        return Err(OracleError::InvalidInstance(diags));
    }
    let (_, answer) = inst.relevant(kind).expect("validated");
    Ok(inst.context[answer.expect("validated")].clone())
}

pub fn oracle_copy(kind: TaskKind, inst: &CopyInstance) -> Result<Vec<Symbol>, OracleError> {
    let diags = validate_instance(kind, &TaskInstance::Copy(inst.clone()));
    if !diags.is_empty() {
        return Err(OracleError::InvalidInstance(diags));
    }
    let mut out = inst.source.clone();
    if kind.is_leftward() {
        out.reverse();
    }
    Ok(out)
}

fn split_words<'a>(tokens: &'a [Symbol], separator: &Symbol) -> Result<Vec<&'a [Symbol]>, OracleError> {
    let bad = |position: usize, reason: &str| OracleError::MalformedWordString { position, reason: reason.to_string() };
    if tokens.is_empty() {
        return Err(bad(0, "empty input"));
    }
    if tokens[0] == *separator {
        return Err(bad(0, "leading separator"));
    }
    if tokens[tokens.len() - 1] == *separator {
        return Err(bad(tokens.len() - 1, "trailing separator"));
    }
    if let Some(i) = tokens.windows(2).position(|w| w[0] == *separator && w[1] == *separator) {
        return Err(bad(i + 1, "doubled separator"));
    }
    Ok(tokens.split(|t| t == separator).collect())
}

/// Reverses the order of separator-delimited words, keeping each word intact.
pub fn oracle_word_reverse(tokens: &[Symbol], separator: &Symbol) -> Result<Vec<Symbol>, OracleError> {
    let words = split_words(tokens, separator)?;
    let mut out = Vec::with_capacity(tokens.len());
    for (i, w) in words.iter().rev().enumerate() {
        if i > 0 {
            out.push(separator.clone());
        }
        out.extend_from_slice(w);
    }
    Ok(out)
}

/// Ground truth for any instance: one symbol for retrieval, a sequence otherwise.
pub fn oracle(kind: TaskKind, inst: &TaskInstance) -> Result<Vec<Symbol>, OracleError> {
    match inst {
        TaskInstance::Retrieval(r) if kind.is_retrieval() => oracle_retrieval(kind, r).map(|s| vec![s]),
        TaskInstance::Copy(c) if kind.is_copy() => oracle_copy(kind, c),
        TaskInstance::Words { tokens, separator } if kind == TaskKind::WordReverse => {
            oracle_word_reverse(tokens, separator)
        }
        _ => Err(OracleError::InvalidInstance(vec![InstanceDiagnostic::WrongShape { kind }])),
    }
}
