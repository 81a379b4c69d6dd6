//! Checking constructions against the oracles on sampled and enumerated inputs.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::build_program;
use crate::crasp::{continue_generation, EvalError, Next, Program, Runner};
use crate::datasets::rng::{cell_rng, label};
use crate::datasets::sample::{sample_copy, sample_retrieval};
use crate::datasets::GenError;
use crate::oracles::{oracle_copy, oracle_retrieval, validate_instance, CopyInstance, RetrievalInstance, TaskInstance, TaskKind};
use crate::symbol::{detokenize, Alphabet, Symbol};

/// Evaluation-style bins plus a stress bin well past them.
pub const DEFAULT_BINS: [(usize, usize); 4] = [(4, 50), (51, 100), (101, 150), (201, 500)];

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("{task} is {note}")]
    NotExpressible { task: TaskKind, note: &'static str },
    #[error("invalid length bin {min}:{max}")]
    InvalidBin { min: usize, max: usize },
    #[error("cannot build a program over an empty alphabet")]
    EmptyAlphabet,
    #[error("construction failed to compile: {0}")]
    Construction(String),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mismatch {
    pub input: String,
    pub program_output: String,
    pub oracle_output: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinResult {
    pub min: usize,
    pub max: usize,
    pub samples: usize,
    pub alphabet_size: usize,
    pub mismatches: usize,
}

/// Outcome of checking one task. Wall time is kept out of the serialized
/// form so reports are reproducible byte for byte.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub task: TaskKind,
    pub mode: String,
    pub seed: u64,
    pub samples_per_bin: usize,
    pub bins: Vec<BinResult>,
    pub mismatches: Vec<Mismatch>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl VerificationReport {
    pub fn passes(&self) -> bool {
        self.mismatches.is_empty()
    }

    pub fn length_bins(&self) -> Vec<(usize, usize)> {
        self.bins.iter().map(|b| (b.min, b.max)).collect()
    }
}

fn marker(task: TaskKind) -> Symbol {
    if task == TaskKind::UF {
        Symbol::sep()
    } else {
        Symbol::bos()
    }
}

fn show(symbols: &[Symbol]) -> String {
    detokenize(symbols)
}

/// Runner that has consumed the leading `<bos>` every input starts with.
fn primed(p: &Program) -> Result<Runner<'_>, EvalError> {
    let mut r = Runner::new(p)?;
    r.push(&Symbol::bos())?;
    Ok(r)
}

fn check_retrieval(task: TaskKind, base: &Runner<'_>, inst: &RetrievalInstance) -> Option<Mismatch> {
    let expected = oracle_retrieval(task, inst).expect("sampled instances are valid");
    let mut input = vec![Symbol::bos()];
    input.extend_from_slice(inst.context());
    input.push(Symbol::sep());
    input.push(inst.query().clone());
    let mut r = base.clone();
    let got = r.extend(&input[1..]).and_then(|_| r.next());
    let program_output = match got {
        Ok(Next::Token(t)) if t == expected => return None,
        Ok(Next::Token(t)) => t.to_string(),
        Ok(Next::Halt) => "(halt)".to_string(),
        Err(e) => format!("error: {e}"),
    };
    Some(Mismatch { input: show(&input), program_output, oracle_output: expected.to_string() })
}

fn check_copy(task: TaskKind, base: &Runner<'_>, inst: &CopyInstance) -> Option<Mismatch> {
    let expected = oracle_copy(task, inst).expect("sampled instances are valid");
    let mut input = vec![Symbol::bos()];
    input.extend_from_slice(&inst.source);
    input.push(Symbol::sep());
    let mut r = base.clone();
    let budget = inst.source.len() + 2;
    let got = r.extend(&input[1..]).and_then(|_| continue_generation(&mut r, budget));
    let end = marker(task);
    let program_output = match got {
        Ok(mut out) if out.last() == Some(&end) => {
            out.pop();
            if out == expected {
                return None;
            }
            show(&out)
        }
        Ok(out) => format!("{} (no end marker)", show(&out)),
        Err(e) => format!("error: {e}"),
    };
    Some(Mismatch { input: show(&input), program_output, oracle_output: show(&expected) })
}

fn check(task: TaskKind, base: &Runner<'_>, inst: &TaskInstance) -> Option<Mismatch> {
    match inst {
        TaskInstance::Retrieval(r) => check_retrieval(task, base, r),
        TaskInstance::Copy(c) => check_copy(task, base, c),
        TaskInstance::Words { .. } => unreachable!("no construction for word reversal"),
    }
}

/// Alphabet used for a bin: the default one, widened for injective copies.
fn bin_alphabet(task: TaskKind, max: usize) -> Alphabet {
    if task.is_copy() && task.is_unique() {
        Alphabet::extended(max.max(62))
    } else {
        Alphabet::default_ascii()
    }
}

/// Samples `samples_per_bin` instances per bin (length uniform within the
/// bin) and compares the construction with the oracle on each. Sibling
/// tasks see the same strings under the same seed.
pub fn verify_program(
    task: TaskKind,
    bins: &[(usize, usize)],
    samples_per_bin: usize,
    seed: u64,
) -> Result<VerificationReport, VerifyError> {
    let started = Instant::now();
    if let Some(note) = super::not_expressible_note(task) {
        return Err(VerifyError::NotExpressible { task, note });
    }
    for &(min, max) in bins {
        if min > max || min < task.min_length() {
            return Err(VerifyError::InvalidBin { min, max });
        }
    }
    let group = label(task.group()[0].name());
    let mut results = Vec::new();
    let mut mismatches = Vec::new();
    let mut program_cache: Option<(usize, Program)> = None;
    for (b, &(min, max)) in bins.iter().enumerate() {
        let alphabet = bin_alphabet(task, max);
        if program_cache.as_ref().map(|(n, _)| *n) != Some(alphabet.len()) {
            program_cache = Some((alphabet.len(), build_program(task, &alphabet)?));
        }
        let program = &program_cache.as_ref().expect("just built").1;
        let base = primed(program)?;
        let instances: Vec<TaskInstance> = (0..samples_per_bin)
            .into_par_iter()
            .map(|i| {
                let mut rng = cell_rng(seed, &[label("verify"), group, b as u64, i as u64]);
                let len = rng.gen_range(min..=max);
                if task.is_retrieval() {
                    sample_retrieval(task, len, &alphabet, false, &mut rng).map(TaskInstance::Retrieval)
                } else {
                    sample_copy(task, len, &alphabet, &mut rng).map(TaskInstance::Copy)
                }
            })
            .collect::<Result<_, _>>()?;
        let found: Vec<Mismatch> = instances.par_iter().filter_map(|inst| check(task, &base, inst)).collect();
        results.push(BinResult { min, max, samples: samples_per_bin, alphabet_size: alphabet.len(), mismatches: found.len() });
        mismatches.extend(found);
    }
    Ok(VerificationReport {
        task,
        mode: "sampled".into(),
        seed,
        samples_per_bin,
        bins: results,
        mismatches,
        elapsed: started.elapsed(),
    })
}

/// Checks every valid instance of exactly `length` over `alphabet`:
/// all contexts and queries for retrieval, all sources for copying.
pub fn verify_exhaustive(task: TaskKind, alphabet: &Alphabet, length: usize) -> Result<VerificationReport, VerifyError> {
    let started = Instant::now();
    if let Some(note) = super::not_expressible_note(task) {
        return Err(VerifyError::NotExpressible { task, note });
    }
    let program = build_program(task, alphabet)?;
    let base = primed(&program)?;
    let k = alphabet.len();
    let slots = if task.is_retrieval() { length + 1 } else { length };
    let total = k.checked_pow(slots as u32).filter(|&t| t <= 50_000_000).ok_or(VerifyError::InvalidBin { min: length, max: length })?;
    let instances: Vec<TaskInstance> = (0..total)
        .filter_map(|mut code| {
            let mut seq = Vec::with_capacity(slots);
            for _ in 0..slots {
                seq.push(alphabet.symbols()[code % k].clone());
                code /= k;
            }
            seq.reverse();
            let inst = if task.is_retrieval() {
                let query = seq.pop().expect("slots > 0");
                TaskInstance::Retrieval(RetrievalInstance::new(seq, query))
            } else {
                TaskInstance::Copy(CopyInstance { source: seq })
            };
            validate_instance(task, &inst).is_empty().then_some(inst)
        })
        .collect();
    let mismatches: Vec<Mismatch> = instances.par_iter().filter_map(|inst| check(task, &base, inst)).collect();
    Ok(VerificationReport {
        task,
        mode: "exhaustive".into(),
        seed: 0,
        samples_per_bin: instances.len(),
        bins: vec![BinResult {
            min: length,
            max: length,
            samples: instances.len(),
            alphabet_size: k,
            mismatches: mismatches.len(),
        }],
        mismatches,
        elapsed: started.elapsed(),
    })
}

/// Plain-text table with one row per (task, bin).
pub fn render_reports(reports: &[VerificationReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<8} {:<11} {:>8} {:>9} {:>10}  result", "task", "bin", "samples", "alphabet", "mismatches");
    for r in reports {
        for b in &r.bins {
            let _ = writeln!(
                out,
                "{:<8} {:<11} {:>8} {:>9} {:>10}  {}",
                r.task.name(),
                format!("{}:{}", b.min, b.max),
                b.samples,
                b.alphabet_size,
                b.mismatches,
                if b.mismatches == 0 { "PASS" } else { "FAIL" }
            );
        }
    }
    if reports.len() > 1 {
        let _ = writeln!(out, "\n{:<8} {:>8} {:>10}  result", "task", "samples", "mismatches");
        for r in reports {
            let samples: usize = r.bins.iter().map(|b| b.samples).sum();
            let result = if r.passes() { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{:<8} {:>8} {:>10}  {result}", r.task.name(), samples, r.mismatches.len());
        }
    }
    for r in reports {
        for m in r.mismatches.iter().take(20) {
            let _ = writeln!(
                out,
                "mismatch {}: input \"{}\" program \"{}\" oracle \"{}\"",
                r.task, m.input, m.program_output, m.oracle_output
            );
        }
    }
    out
}
