//! Few-shot prompt rendering over the separator x pool x template grid.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::records::DatasetRecord;
use super::rng::{cell_rng, label};
use crate::oracles::{RetrievalInstance, TaskKind};
use crate::symbol::{tokenize, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SepMode {
    Sep,
    NoSep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FewShot {
    /// Demonstrations shorter than the query record.
    Small,
    /// Demonstrations of the query record's own length.
    Same,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TemplateKind {
    Bare,
    SimpleRule,
    SimpleRuleExplained,
    MathRule,
    MathRuleExplained,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 5] = [
        TemplateKind::Bare,
        TemplateKind::SimpleRule,
        TemplateKind::SimpleRuleExplained,
        TemplateKind::MathRule,
        TemplateKind::MathRuleExplained,
    ];

    fn explained(self) -> bool {
        matches!(self, TemplateKind::SimpleRuleExplained | TemplateKind::MathRuleExplained)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub separator: SepMode,
    pub fewshot: FewShot,
    pub template: TemplateKind,
    pub k: usize,
}

impl PromptTemplate {
    /// Every combination of the three factors.
    pub fn grid(k: usize) -> Vec<PromptTemplate> {
        let mut out = Vec::with_capacity(20);
        for separator in [SepMode::Sep, SepMode::NoSep] {
            for fewshot in [FewShot::Small, FewShot::Same] {
                for template in TemplateKind::ALL {
                    out.push(PromptTemplate { separator, fewshot, template, k });
                }
            }
        }
        out
    }

    pub fn name(&self) -> String {
        format!("{}-{}-{}", name_of_sep(self.separator), name_of_fewshot(self.fewshot), name_of_template(self.template))
    }
}

fn name_of_sep(s: SepMode) -> &'static str {
    match s {
        SepMode::Sep => "SEP",
        SepMode::NoSep => "NOSEP",
    }
}

fn name_of_fewshot(f: FewShot) -> &'static str {
    match f {
        FewShot::Small => "SMALL",
        FewShot::Same => "SAME",
    }
}

fn name_of_template(t: TemplateKind) -> &'static str {
    match t {
        TemplateKind::Bare => "BARE",
        TemplateKind::SimpleRule => "SIMPLE_RULE",
        TemplateKind::SimpleRuleExplained => "SIMPLE_RULE_EXPLAINED",
        TemplateKind::MathRule => "MATH_RULE",
        TemplateKind::MathRuleExplained => "MATH_RULE_EXPLAINED",
    }
}

impl fmt::Display for PromptTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for SepMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        [SepMode::Sep, SepMode::NoSep]
            .into_iter()
            .find(|m| name_of_sep(*m).eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown separator mode '{s}' (SEP or NOSEP)"))
    }
}

impl FromStr for FewShot {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        [FewShot::Small, FewShot::Same]
            .into_iter()
            .find(|m| name_of_fewshot(*m).eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown few-shot mode '{s}' (SMALL or SAME)"))
    }
}

impl FromStr for TemplateKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        TemplateKind::ALL
            .into_iter()
            .find(|m| name_of_template(*m).eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown template '{s}'"))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("pool too small: {needed} demonstrations needed, {available} eligible")]
    PoolTooSmall { needed: usize, available: usize },
    #[error("cannot build a prompt for record {id}: {reason}")]
    UnsupportedRecord { id: String, reason: String },
}

pub fn rule_simple(task: TaskKind) -> &'static str {
    match task {
        TaskKind::UL => "The answer is the token immediately to the left of the single instance of the query token.",
        TaskKind::UR => "The answer is the token immediately to the right of the single instance of the query token.",
        TaskKind::NLLast => "When the query appears multiple times, the answer is the token just to the left of its last appearance.",
        TaskKind::NRLast => "When the query appears multiple times, the answer is the token just to the right of its last appearance.",
        TaskKind::NLFirst => "When the query appears multiple times, the answer is the token just to the left of its first appearance.",
        TaskKind::NRFirst => "When the query appears multiple times, the answer is the token just to the right of its first appearance.",
        TaskKind::UF | TaskKind::NF => "The output is exactly the same sequence as the input.",
        TaskKind::UB | TaskKind::NB => "The output is the input sequence written in reverse order.",
        TaskKind::WordReverse => "The output lists the words of the input in reverse order.",
    }
}

pub fn rule_math(task: TaskKind) -> &'static str {
    match task {
        TaskKind::UL => "t = 1 and x_{n+1} = x_{q_1-1}",
        TaskKind::UR => "t = 1 and x_{n+1} = x_{q_1+1}",
        TaskKind::NLLast => "t > 1 and x_{n+1} = x_{q_t-1}",
        TaskKind::NRLast => "t > 1 and x_{n+1} = x_{q_t+1}",
        TaskKind::NLFirst => "t > 1 and x_{n+1} = x_{q_1-1}",
        TaskKind::NRFirst => "t > 1 and x_{n+1} = x_{q_1+1}",
        TaskKind::UF | TaskKind::NF => "y_i = x_i for i = 1, ..., n",
        TaskKind::UB | TaskKind::NB => "y_i = x_{n+1-i} for i = 1, ..., n",
        TaskKind::WordReverse => "Y = w_m | ... | w_1 when X = w_1 | ... | w_m",
    }
}

/// A record split back into its parts.
enum Parsed {
    Retrieval { inst: RetrievalInstance, answer: String },
    Sequence { source: Vec<Symbol>, target: String },
}

fn parse(r: &DatasetRecord) -> Result<(TaskKind, Parsed), PromptError> {
    let bad = |reason: &str| PromptError::UnsupportedRecord { id: r.id.clone(), reason: reason.into() };
    let task: TaskKind = r.task.parse().map_err(|_| bad("not a retrieval or copy record"))?;
    let tokens = tokenize(&r.input);
    if task.is_retrieval() {
        let sep = r.meta.get("separator").and_then(|v| v.as_str()).unwrap_or("||");
        let (q, rest) = tokens.split_last().ok_or_else(|| bad("empty input"))?;
        let context = match rest.split_last() {
            Some((s, c)) if !sep.is_empty() && s.as_str() == sep => c.to_vec(),
            _ => rest.to_vec(),
        };
        Ok((task, Parsed::Retrieval { inst: RetrievalInstance::new(context, q.clone()), answer: r.target.clone() }))
    } else {
        let (_, source) = tokens.split_last().ok_or_else(|| bad("empty input"))?;
        Ok((task, Parsed::Sequence { source: source.to_vec(), target: r.target.clone() }))
    }
}

fn join(symbols: &[Symbol]) -> String {
    symbols.iter().map(Symbol::as_str).collect::<Vec<_>>().join(" ")
}

/// The part of a line before the answer.
fn stem(p: &Parsed, sep: SepMode) -> String {
    match (p, sep) {
        (Parsed::Retrieval { inst, .. }, SepMode::Sep) => format!("<bos> {} || {} :", join(inst.context()), inst.query()),
        (Parsed::Retrieval { inst, .. }, SepMode::NoSep) => format!("<bos> {} {} :", join(inst.context()), inst.query()),
        (Parsed::Sequence { source, .. }, SepMode::Sep) => format!("<bos> {} :", join(source)),
        (Parsed::Sequence { source, .. }, SepMode::NoSep) => format!("<bos> {}", join(source)),
    }
}

fn answer(p: &Parsed) -> &str {
    match p {
        Parsed::Retrieval { answer, .. } => answer,
        Parsed::Sequence { target, .. } => target,
    }
}

fn demo_line(p: &Parsed, sep: SepMode) -> String {
    format!("{} {} <eos>", stem(p, sep), answer(p))
}

fn header(task: TaskKind, t: &PromptTemplate) -> Vec<String> {
    let retrieval = task.is_retrieval();
    match t.template {
        TemplateKind::Bare => vec![],
        TemplateKind::SimpleRule | TemplateKind::SimpleRuleExplained => {
            let mut h = vec![];
            if retrieval {
                h.push("Each line gives a context, then a query token, then ':' and the answer.".to_string());
                h.push(match t.separator {
                    SepMode::Sep => "The marker '||' separates the context from the query token.".to_string(),
                    SepMode::NoSep => "The query token is the last token before ':'.".to_string(),
                });
            } else {
                h.push("Each line gives an input sequence followed by its output.".to_string());
            }
            h.push(format!("Rule: {}", rule_simple(task)));
            h
        }
        TemplateKind::MathRule | TemplateKind::MathRuleExplained => {
            if retrieval {
                vec![
                    "Notation: the input is X = x_1 ... x_n and its last token x_n is the query q.".to_string(),
                    "Inside the context x_1 ... x_{n-1}, q occurs t times, at indices q_1 < ... < q_t.".to_string(),
                    format!("The answer x_{{n+1}} is given by: {}", rule_math(task)),
                ]
            } else {
                vec![
                    "Notation: the input is X = x_1 ... x_n and the output is Y = y_1 ... y_n.".to_string(),
                    format!("The output is given by: {}", rule_math(task)),
                ]
            }
        }
    }
}

fn worked(task: TaskKind, p: &Parsed, t: &PromptTemplate) -> String {
    let line = demo_line(p, t.separator);
    let math = t.template == TemplateKind::MathRuleExplained;
    match p {
        Parsed::Retrieval { inst, answer } => {
            let occ: Vec<usize> = inst.occurrences().iter().map(|i| i + 1).collect();
            let pick = match task {
                TaskKind::NLLast | TaskKind::NRLast => *occ.last().unwrap_or(&0),
                _ => *occ.first().unwrap_or(&0),
            };
            let at = if task.is_leftward() { pick.saturating_sub(1) } else { pick + 1 };
            if math {
                let list: Vec<String> = occ.iter().map(ToString::to_string).collect();
                format!(
                    "Worked example: {line}\nHere n = {}, q = {}, t = {}, the occurrences are at indices {}, and x_{{n+1}} = x_{at} = {answer}.",
                    inst.context().len() + 1,
                    inst.query(),
                    occ.len(),
                    list.join(", ")
                )
            } else {
                let side = if task.is_leftward() { "left" } else { "right" };
                let which = match task {
                    TaskKind::UL | TaskKind::UR => "only",
                    TaskKind::NLLast | TaskKind::NRLast => "last",
                    _ => "first",
                };
                format!(
                    "Worked example: {line}\nThe query {} occurs {} time(s); the token to the {side} of its {which} occurrence (position {pick}) is {answer}, so the answer is {answer}.",
                    inst.query(),
                    occ.len()
                )
            }
        }
        Parsed::Sequence { source, target } => {
            let how = if task.is_leftward() { "reversed" } else { "unchanged" };
            if math {
                format!("Worked example: {line}\nHere n = {} and Y = {target}.", source.len())
            } else {
                format!("Worked example: {line}\nThe input {} is repeated {how}, giving {target}.", join(source))
            }
        }
    }
}

/// Records of `pool` usable as demonstrations for `record` under `fewshot`.
pub fn eligible<'a>(fewshot: FewShot, record: &DatasetRecord, pool: &'a [DatasetRecord]) -> Vec<&'a DatasetRecord> {
    pool.iter()
        .filter(|r| r.task == record.task && r.id != record.id && r.input != record.input)
        .filter(|r| match fewshot {
            FewShot::Small => r.length < record.length,
            FewShot::Same => r.length == record.length,
        })
        .collect()
}

/// Assembles the prompt: rule text (if any), a worked example for the
/// explained templates, demonstrations, then the unresolved line.
/// Demonstrations are drawn from the eligible pool with a stream seeded by
/// `seed` and the record id, and are the same across templates.
pub fn render_prompt(
    t: &PromptTemplate,
    record: &DatasetRecord,
    pool: &[DatasetRecord],
    seed: u64,
) -> Result<String, PromptError> {
    let (task, parsed) = parse(record)?;
    let mut candidates = eligible(t.fewshot, record, pool);
    if candidates.len() < t.k {
        return Err(PromptError::PoolTooSmall { needed: t.k, available: candidates.len() });
    }
    let mut rng = cell_rng(seed, &[label(&record.id), label(name_of_fewshot(t.fewshot))]);
    let (chosen, _) = candidates.partial_shuffle(&mut rng, t.k);
    let demos: Vec<Parsed> = chosen.iter().map(|r| parse(r).map(|(_, p)| p)).collect::<Result<_, _>>()?;
    let mut lines = header(task, t);
    let shown = if t.template.explained() && !demos.is_empty() {
        lines.push(worked(task, &demos[demos.len() - 1], t));
        &demos[..demos.len() - 1]
    } else {
        &demos[..]
    };
    if !matches!(t.template, TemplateKind::Bare) {
        lines.push("Examples:".to_string());
    }
    lines.extend(shown.iter().map(|d| demo_line(d, t.separator)));
    lines.push(format!("{} ", stem(&parsed, t.separator)));
    Ok(lines.join("\n"))
}
