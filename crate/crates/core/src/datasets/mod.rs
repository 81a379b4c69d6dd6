//! Seeded generation of every dataset family: retrieval and copy strings,
//! prompt grids, Lorem-Ipsum paragraphs and Git histories.

pub mod git;
pub mod lorem;
pub mod prompt;
pub mod records;
pub mod rng;
pub mod sample;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

pub use records::{read_records, write_records, DatasetRecord, RecordError};

use crate::oracles::{
    oracle_copy, oracle_retrieval, oracle_word_reverse, CopyInstance, OracleError, RetrievalInstance, TaskKind,
};
use crate::symbol::{tokenize, Alphabet, Symbol};
use rng::{cell_rng, label};

#[derive(Debug, Error)]
pub enum GenError {
    #[error("infeasible spec: {0}")]
    InfeasibleSpec(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "val" | "valid" | "validation" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            _ => Err(format!("unknown split '{s}' (expected train, val or test)")),
        }
    }
}

/// Which lengths to generate: `count` records at each listed length, or
/// `count` records in total with lengths uniform over a range.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lengths {
    Each(Vec<usize>),
    Uniform { min: usize, max: usize },
}

impl FromStr for Lengths {
    type Err = String;

    /// `10,20,30` lists lengths; `4:100` is an inclusive range.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad length '{t}'"));
        if let Some((a, b)) = s.split_once(':') {
            let (min, max) = (num(a)?, num(b)?);
            if min > max {
                return Err(format!("empty length range {min}:{max}"));
            }
            Ok(Lengths::Uniform { min, max })
        } else {
            let v = s.split(',').filter(|t| !t.trim().is_empty()).map(num).collect::<Result<Vec<_>, _>>()?;
            if v.is_empty() {
                return Err("no lengths given".into());
            }
            Ok(Lengths::Each(v))
        }
    }
}

/// Parameters of a retrieval/copy/word-reversal corpus.
#[derive(Clone, Debug)]
pub struct GenSpec {
    pub task: TaskKind,
    pub alphabet: Alphabet,
    pub lengths: Lengths,
    /// Per listed length, or in total for a range.
    pub count: usize,
    pub seed: u64,
    pub split: Split,
    pub first_half_ood: bool,
    /// Token between context and query; empty renders without one.
    pub separator: String,
    /// Token closing a copy source.
    pub delimiter: String,
    /// Upper bound on source plus target length for copy records.
    pub combined_cap: Option<usize>,
    /// Separator between words for word reversal, and the longest word.
    pub word_separator: String,
    pub max_word: usize,
}

impl GenSpec {
    pub fn new(task: TaskKind, lengths: Lengths, count: usize, seed: u64) -> Self {
        GenSpec {
            task,
            alphabet: Alphabet::default_ascii(),
            lengths,
            count,
            seed,
            split: Split::Test,
            first_half_ood: false,
            separator: "||".into(),
            delimiter: ">".into(),
            combined_cap: None,
            word_separator: "|".into(),
            max_word: 4,
        }
    }

    /// Resolved configuration, for record file headers.
    pub fn describe(&self) -> Value {
        json!({
            "task": self.task.name(),
            "alphabet": self.alphabet.symbols().iter().map(Symbol::as_str).collect::<Vec<_>>(),
            "lengths": self.lengths,
            "count": self.count,
            "seed": self.seed,
            "split": self.split,
            "first_half_ood": self.first_half_ood,
            "separator": self.separator,
            "delimiter": self.delimiter,
            "combined_cap": self.combined_cap,
            "word_separator": self.word_separator,
            "max_word": self.max_word,
        })
    }

    fn bounds(&self) -> Vec<usize> {
        match &self.lengths {
            Lengths::Each(v) => v.clone(),
            Lengths::Uniform { min, max } => vec![*min, *max],
        }
    }

    fn check(&self) -> Result<(), GenError> {
        let reserved = [&self.separator, &self.delimiter, &self.word_separator];
        if let Some(r) = reserved.iter().find(|r| !r.is_empty() && self.alphabet.contains(&Symbol::new(r.as_str()))) {
            return Err(GenError::InfeasibleSpec(format!("marker '{r}' is also an alphabet symbol")));
        }
        if self.first_half_ood && !self.task.is_retrieval() {
            return Err(GenError::InfeasibleSpec("first-half placement applies to retrieval tasks only".into()));
        }
        for len in self.bounds() {
            sample::check_feasible(self.task, len, &self.alphabet, self.first_half_ood)?;
            if let (Some(cap), true) = (self.combined_cap, self.task.is_copy()) {
                if 2 * len > cap {
                    return Err(GenError::InfeasibleSpec(format!(
                        "{} at length {len}: source plus target is {} tokens, over the cap of {cap}",
                        self.task,
                        2 * len
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One generation slot: a fixed length, or `None` to draw it from the range.
struct Slot {
    length: Option<usize>,
    index: usize,
}

fn slots(spec: &GenSpec) -> Vec<Slot> {
    match &spec.lengths {
        Lengths::Each(v) => v
            .iter()
            .flat_map(|&l| (0..spec.count).map(move |i| (l, i)))
            .enumerate()
            .map(|(index, (l, _))| Slot { length: Some(l), index })
            .collect(),
        Lengths::Uniform { .. } => (0..spec.count).map(|index| Slot { length: None, index }).collect(),
    }
}

/// Fills every slot with a distinct item. Each attempt for a slot draws from
/// its own stream, so the result is the same for any worker count.
fn fill<T, F>(spec: &GenSpec, make: F) -> Result<Vec<(usize, T)>, GenError>
where
    T: std::hash::Hash + Eq + Clone + Send,
    F: Fn(usize, &mut ChaCha8Rng) -> Result<T, GenError> + Sync,
{
    const MAX_ATTEMPTS: u64 = 1000;
    let group = label(spec.task.group()[0].name());
    let draw = |slot: &Slot, attempt: u64| -> Result<(usize, T), GenError> {
        let mut rng = cell_rng(spec.seed, &[group, label(spec.split.name()), slot.index as u64, attempt]);
        let len = match (slot.length, &spec.lengths) {
            (Some(l), _) => l,
            (None, Lengths::Uniform { min, max }) => rng.gen_range(*min..=*max),
            (None, Lengths::Each(_)) => unreachable!("listed lengths are fixed per slot"),
        };
        Ok((len, make(len, &mut rng)?))
    };
    let slots = slots(spec);
    let first: Vec<(usize, T)> = slots.par_iter().map(|s| draw(s, 0)).collect::<Result<_, _>>()?;
    let mut seen = HashSet::with_capacity(first.len());
    let mut out = Vec::with_capacity(first.len());
    for (slot, mut item) in slots.iter().zip(first) {
        let mut attempt = 0;
        while seen.contains(&item.1) {
            attempt += 1;
            if attempt > MAX_ATTEMPTS {
                return Err(GenError::InfeasibleSpec(format!(
                    "could not find {} distinct {} instances at length {}",
                    spec.count, spec.task, item.0
                )));
            }
            item = draw(slot, attempt)?;
        }
        seen.insert(item.1.clone());
        out.push(item);
    }
    Ok(out)
}

fn join(symbols: &[Symbol]) -> String {
    symbols.iter().map(Symbol::as_str).collect::<Vec<_>>().join(" ")
}

fn record_id(spec: &GenSpec, i: usize) -> String {
    format!("{}-{}-{:06}", spec.task.name(), spec.split, i)
}

/// Renders `context [sep] query` the way records store it.
pub fn retrieval_input(inst: &RetrievalInstance, separator: &str) -> String {
    let mut parts: Vec<&str> = inst.context().iter().map(Symbol::as_str).collect();
    if !separator.is_empty() {
        parts.push(separator);
    }
    parts.push(inst.query().as_str());
    parts.join(" ")
}

pub fn gen_retrieval(spec: &GenSpec) -> Result<Vec<DatasetRecord>, GenError> {
    if !spec.task.is_retrieval() {
        return Err(GenError::InfeasibleSpec(format!("{} is not a retrieval task", spec.task)));
    }
    spec.check()?;
    let items = fill(spec, |len, rng| sample::sample_retrieval(spec.task, len, &spec.alphabet, spec.first_half_ood, rng))?;
    items
        .into_iter()
        .enumerate()
        .map(|(i, (len, inst))| {
            let answer = oracle_retrieval(spec.task, &inst)?;
            let mut meta = BTreeMap::new();
            meta.insert("query".into(), json!(inst.query().as_str()));
            meta.insert("occurrences".into(), json!(inst.occurrences()));
            meta.insert("separator".into(), json!(spec.separator));
            meta.insert("first_half_ood".into(), json!(spec.first_half_ood));
            Ok(DatasetRecord {
                id: record_id(spec, i),
                task: spec.task.name().into(),
                input: retrieval_input(&inst, &spec.separator),
                target: answer.to_string(),
                length: len,
                seed: spec.seed,
                split: spec.split,
                meta,
                ..DatasetRecord::default()
            })
        })
        .collect()
}

pub fn gen_copy(spec: &GenSpec) -> Result<Vec<DatasetRecord>, GenError> {
    if !spec.task.is_copy() {
        return Err(GenError::InfeasibleSpec(format!("{} is not a copy task", spec.task)));
    }
    spec.check()?;
    let items = fill(spec, |len, rng| sample::sample_copy(spec.task, len, &spec.alphabet, rng).map(|c| c.source))?;
    items
        .into_iter()
        .enumerate()
        .map(|(i, (len, source))| {
            let target = oracle_copy(spec.task, &CopyInstance { source: source.clone() })?;
            let mut input = join(&source);
            if !input.is_empty() {
                input.push(' ');
            }
            input.push_str(&spec.delimiter);
            let mut meta = BTreeMap::new();
            meta.insert("delimiter".into(), json!(spec.delimiter));
            Ok(DatasetRecord {
                id: record_id(spec, i),
                task: spec.task.name().into(),
                input,
                target: join(&target),
                length: len,
                seed: spec.seed,
                split: spec.split,
                meta,
                ..DatasetRecord::default()
            })
        })
        .collect()
}

/// Word-order reversal strings; `length` counts words.
pub fn gen_word_reverse(spec: &GenSpec) -> Result<Vec<DatasetRecord>, GenError> {
    if spec.task != TaskKind::WordReverse {
        return Err(GenError::InfeasibleSpec(format!("{} is not word reversal", spec.task)));
    }
    spec.check()?;
    let sep = Symbol::new(&spec.word_separator);
    let items = fill(spec, |len, rng| Ok(sample::sample_words(len, spec.max_word, &spec.alphabet, &sep, rng)))?;
    items
        .into_iter()
        .enumerate()
        .map(|(i, (len, tokens))| {
            let target = oracle_word_reverse(&tokens, &sep)?;
            let mut meta = BTreeMap::new();
            meta.insert("delimiter".into(), json!(spec.delimiter));
            meta.insert("word_separator".into(), json!(spec.word_separator));
            Ok(DatasetRecord {
                id: record_id(spec, i),
                task: spec.task.name().into(),
                input: format!("{} {}", join(&tokens), spec.delimiter),
                target: join(&target),
                length: len,
                seed: spec.seed,
                split: spec.split,
                meta,
                ..DatasetRecord::default()
            })
        })
        .collect()
}

/// Dispatches on the task family.
pub fn generate(spec: &GenSpec) -> Result<Vec<DatasetRecord>, GenError> {
    if spec.task.is_retrieval() {
        gen_retrieval(spec)
    } else if spec.task.is_copy() {
        gen_copy(spec)
    } else {
        gen_word_reverse(spec)
    }
}

fn meta_str<'a>(r: &'a DatasetRecord, key: &str, default: &'a str) -> &'a str {
    r.meta.get(key).and_then(Value::as_str).unwrap_or(default)
}

/// Re-derives a record's target from its input with the oracles.
pub fn check_record(r: &DatasetRecord) -> Result<(), String> {
    let expect = |derived: String| {
        if derived == r.target {
            Ok(())
        } else {
            Err(format!("{}: stored target \"{}\" but the oracle gives \"{}\"", r.id, r.target, derived))
        }
    };
    match r.task.as_str() {
        "lorem" => expect(r.input.clone()),
        "git" => {
            let snippet = r.snippet.as_deref().ok_or("git record without snippet")?;
            let revert = r.revert.as_deref().ok_or("git record without revert")?;
            let cherry = r.cherrypick.as_deref().ok_or("git record without cherrypick")?;
            let reversed: Vec<&str> = revert.lines().rev().collect();
            if revert != snippet || cherry != reversed.join("\n") {
                return Err(format!("{}: revert/cherrypick do not follow the snippet", r.id));
            }
            expect(revert.to_string())
        }
        name => {
            let task: TaskKind = name.parse().map_err(|e| format!("{}: {e}", r.id))?;
            let tokens = tokenize(&r.input);
            if task.is_retrieval() {
                let sep = meta_str(r, "separator", "||");
                let (context, query) = if sep.is_empty() {
                    let (q, c) = tokens.split_last().ok_or("empty input")?;
                    (c.to_vec(), q.clone())
                } else {
                    let at = tokens.iter().position(|t| t.as_str() == sep).ok_or("no separator in input")?;
                    if at + 2 != tokens.len() {
                        return Err(format!("{}: expected exactly one query token after the separator", r.id));
                    }
                    (tokens[..at].to_vec(), tokens[at + 1].clone())
                };
                let inst = RetrievalInstance::new(context, query);
                expect(oracle_retrieval(task, &inst).map_err(|e| format!("{}: {e}", r.id))?.to_string())
            } else {
                let delim = meta_str(r, "delimiter", ">");
                let body = match tokens.split_last() {
                    Some((d, body)) if d.as_str() == delim => body,
                    _ => return Err(format!("{}: input does not end with the delimiter", r.id)),
                };
                let out = if task.is_copy() {
                    oracle_copy(task, &CopyInstance { source: body.to_vec() })
                } else {
                    oracle_word_reverse(body, &Symbol::new(meta_str(r, "word_separator", "|")))
                };
                expect(join(&out.map_err(|e| format!("{}: {e}", r.id))?))
            }
        }
    }
}
