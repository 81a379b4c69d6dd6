//! Perturbed Lorem-Ipsum paragraphs for copy-fidelity analysis.
//!
//! A corpus shares one base paragraph. Each sample draws base sentences and
//! perturbs them, consuming random draws in this fixed order per drawn
//! sentence: repeat decision (and copy count), then for each copy the
//! word-duplication decision (and positions), then the word shuffle.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde_json::json;

use super::records::DatasetRecord;
use super::rng::{cell_rng, label};
use super::Split;

const WORDS_TEXT: &str = include_str!("lorem_words.txt");

pub fn words() -> Vec<&'static str> {
    WORDS_TEXT.lines().map(str::trim).filter(|w| !w.is_empty()).collect()
}

/// Text to tokens. Must be a pure function.
pub type Tokenizer = dyn Fn(&str) -> Vec<String> + Sync;

pub fn whitespace_tokenizer(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

pub fn char_tokenizer(text: &str) -> Vec<String> {
    text.chars().map(|c| c.to_string()).collect()
}

#[derive(Clone, Debug)]
pub struct LoremSpec {
    pub count: usize,
    pub seed: u64,
    pub sentence_target: usize,
    pub token_budget: usize,
    pub base_sentences: usize,
    pub min_words: usize,
    pub max_words: usize,
    pub p_repeat: f64,
    pub max_copies: usize,
    pub p_duplicate: f64,
    pub p_shuffle: f64,
}

impl Default for LoremSpec {
    fn default() -> Self {
        LoremSpec {
            count: 1500,
            seed: 0,
            sentence_target: 45,
            token_budget: 500,
            base_sentences: 12,
            min_words: 4,
            max_words: 10,
            p_repeat: 0.3,
            max_copies: 4,
            p_duplicate: 0.5,
            p_shuffle: 1.0,
        }
    }
}

impl LoremSpec {
    pub fn describe(&self) -> serde_json::Value {
        json!({
            "task": "lorem",
            "count": self.count,
            "seed": self.seed,
            "sentence_target": self.sentence_target,
            "token_budget": self.token_budget,
            "base_sentences": self.base_sentences,
            "words_per_sentence": [self.min_words, self.max_words],
            "p_repeat": self.p_repeat,
            "max_copies": self.max_copies,
            "p_duplicate": self.p_duplicate,
            "p_shuffle": self.p_shuffle,
        })
    }
}

type Sentence = Vec<&'static str>;

fn base_paragraph(spec: &LoremSpec) -> Vec<Sentence> {
    let vocab = words();
    let mut rng = cell_rng(spec.seed, &[label("lorem-base")]);
    (0..spec.base_sentences.max(1))
        .map(|_| {
            let n = rng.gen_range(spec.min_words.max(1)..=spec.max_words.max(spec.min_words.max(1)));
            (0..n).map(|_| *vocab.choose(&mut rng).expect("word list")).collect()
        })
        .collect()
}

fn render(sentence: &[&str]) -> String {
    let mut out = String::new();
    for (i, w) in sentence.iter().enumerate() {
        if i == 0 {
            let mut c = w.chars();
            if let Some(f) = c.next() {
                out.extend(f.to_uppercase());
                out.push_str(c.as_str());
            }
        } else {
            out.push(' ');
            out.push_str(w);
        }
    }
    out.push('.');
    out
}

fn perturbed(spec: &LoremSpec, base: &[Sentence], index: usize) -> Vec<String> {
    let mut rng = cell_rng(spec.seed, &[label("lorem"), index as u64]);
    let mut out = Vec::with_capacity(spec.sentence_target);
    while out.len() < spec.sentence_target {
        let source = base.choose(&mut rng).expect("base paragraph");
        let copies = if rng.gen_bool(spec.p_repeat) { rng.gen_range(2..=spec.max_copies.max(2)) } else { 1 };
        for _ in 0..copies {
            let mut s = source.clone();
            if rng.gen_bool(spec.p_duplicate) {
                for _ in 0..rng.gen_range(1..=2) {
                    let j = rng.gen_range(0..s.len());
                    s.insert(j + 1, s[j]);
                }
            }
            if rng.gen_bool(spec.p_shuffle) && s.len() > 2 {
                s[1..].shuffle(&mut rng);
            }
            out.push(render(&s));
        }
    }
    out.truncate(spec.sentence_target);
    out
}

/// Sentences of paragraph `index` before truncation.
pub fn paragraph_sentences(spec: &LoremSpec, index: usize) -> Vec<String> {
    perturbed(spec, &base_paragraph(spec), index)
}

/// Longest whole-word prefix of `text` within `budget` tokens.
pub fn truncate_to_budget(text: &str, budget: usize, tokenizer: &Tokenizer) -> String {
    let words: Vec<&str> = text.split_whitespace().collect();
    if tokenizer(text).len() <= budget {
        return text.to_string();
    }
    let fits = |n: usize| tokenizer(&words[..n].join(" ")).len() <= budget;
    let (mut lo, mut hi) = (0usize, words.len());
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    words[..lo].join(" ")
}

pub fn gen_lorem(spec: &LoremSpec, tokenizer: &Tokenizer) -> Vec<DatasetRecord> {
    let base = base_paragraph(spec);
    (0..spec.count)
        .into_par_iter()
        .map(|i| {
            let sentences = perturbed(spec, &base, i);
            let full = sentences.join(" ");
            let before = tokenizer(&full).len();
            let text = truncate_to_budget(&full, spec.token_budget, tokenizer);
            let after = tokenizer(&text).len();
            let meta = BTreeMap::from([
                ("sentences".to_string(), json!(sentences.len())),
                ("tokens_before".to_string(), json!(before)),
                ("truncated".to_string(), json!(after < before)),
            ]);
            DatasetRecord {
                id: format!("lorem-s{}-{i:06}", spec.seed),
                task: "lorem".into(),
                input: text.clone(),
                target: text,
                length: after,
                seed: spec.seed,
                split: Split::Test,
                meta,
                ..DatasetRecord::default()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sentence_count_and_budget() {
        let spec = LoremSpec { count: 40, token_budget: 200, ..LoremSpec::default() };
        for (i, r) in gen_lorem(&spec, &whitespace_tokenizer).iter().enumerate() {
            assert_eq!(paragraph_sentences(&spec, i).len(), 45);
            assert!(whitespace_tokenizer(&r.input).len() <= 200);
            assert_eq!(r.meta["sentences"], json!(45));
        }
    }

    #[test]
    fn leading_word_stays_capitalised() {
        let spec = LoremSpec { count: 1, ..LoremSpec::default() };
        for s in paragraph_sentences(&spec, 0) {
            assert!(s.chars().next().unwrap().is_uppercase());
            assert!(s.ends_with('.'));
            assert_eq!(s.matches('.').count(), 1);
        }
    }

    #[test]
    fn truncation_keeps_whole_words() {
        let t = truncate_to_budget("ab cd ef", 5, &char_tokenizer);
        assert_eq!(t, "ab cd");
        assert_eq!(truncate_to_budget("ab", 0, &char_tokenizer), "");
    }
}
