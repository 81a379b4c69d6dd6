//! Copy-fidelity analysis: where does a copy go wrong, and was the source
//! token at that point predictive of its successor?

mod align;
pub mod score;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::ops::{Add, Range};

use serde::{Deserialize, Serialize};

pub use align::{align, score_of, AlignmentOp, OpKind, Scoring};
pub use score::{parse_predictions, score_outputs, ScoreError, ScoreRow, ScoreTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanKind {
    Aligned,
    Misaligned,
}

/// A maximal run of matches (aligned) or of non-matches (misaligned).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanGroup {
    pub kind: SpanKind,
    pub ops: Range<usize>,
}

pub fn group_spans(ops: &[AlignmentOp]) -> Vec<SpanGroup> {
    let kind_of = |o: &AlignmentOp| if o.kind == OpKind::Match { SpanKind::Aligned } else { SpanKind::Misaligned };
    let mut groups: Vec<SpanGroup> = Vec::new();
    for (i, o) in ops.iter().enumerate() {
        let k = kind_of(o);
        match groups.last_mut() {
            Some(g) if g.kind == k => g.ops.end = i + 1,
            _ => groups.push(SpanGroup { kind: k, ops: i..i + 1 }),
        }
    }
    groups
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenClass {
    pub successors: BTreeSet<String>,
    pub ambiguous: bool,
}

/// Successor sets of every token type in a source. A type with two or more
/// distinct successors is ambiguous; one with a single successor, or none
/// because it only ends the source, is not.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbiguityMap {
    pub types: BTreeMap<String, TokenClass>,
}

impl AmbiguityMap {
    pub fn is_ambiguous(&self, token: &str) -> Option<bool> {
        self.types.get(token).map(|c| c.ambiguous)
    }

    pub fn ambiguous_count(&self) -> usize {
        self.types.values().filter(|c| c.ambiguous).count()
    }

    pub fn unambiguous_count(&self) -> usize {
        self.types.len() - self.ambiguous_count()
    }
}

pub fn classify_tokens<S: AsRef<str>>(src: &[S]) -> AmbiguityMap {
    let mut types: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (i, t) in src.iter().enumerate() {
        let entry = types.entry(t.as_ref().to_string()).or_default();
        if let Some(next) = src.get(i + 1) {
            entry.insert(next.as_ref().to_string());
        }
    }
    AmbiguityMap {
        types: types
            .into_iter()
            .map(|(t, successors)| {
                let ambiguous = successors.len() >= 2;
                (t, TokenClass { successors, ambiguous })
            })
            .collect(),
    }
}

/// Where an aligned span hands over to a misaligned one. `src_index` is the
/// last matched source position, or -1 when the alignment opens misaligned.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub src_index: i64,
    pub token: Option<String>,
    pub ambiguous: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionReport {
    pub src_len: usize,
    pub out_len: usize,
    pub score: i64,
    pub alignment: Vec<AlignmentOp>,
    pub groups: Vec<SpanGroup>,
    pub transitions: Vec<Transition>,
    /// Output is at least 75% as long as the source.
    pub length_ok: bool,
}

impl TransitionReport {
    pub fn is_perfect(&self) -> bool {
        self.src_len == self.out_len && self.alignment.iter().all(|o| o.kind == OpKind::Match)
    }
}

pub fn transitions<S: AsRef<str>>(src: &[S], ops: &[AlignmentOp], groups: &[SpanGroup], map: &AmbiguityMap) -> Vec<Transition> {
    groups
        .iter()
        .enumerate()
        .filter(|(_, g)| g.kind == SpanKind::Misaligned)
        .map(|(gi, _)| {
            if gi == 0 {
                return Transition { src_index: -1, token: None, ambiguous: None };
            }
            let last = ops[groups[gi - 1].ops.end - 1];
            let i = last.src_index.expect("aligned groups hold matches");
            let token = src[i].as_ref().to_string();
            let ambiguous = map.is_ambiguous(&token);
            Transition { src_index: i as i64, token: Some(token), ambiguous }
        })
        .collect()
}

pub fn analyze<S: AsRef<str>>(src: &[S], out: &[S], scoring: &Scoring) -> TransitionReport {
    let a: Vec<&str> = src.iter().map(AsRef::as_ref).collect();
    let b: Vec<&str> = out.iter().map(AsRef::as_ref).collect();
    let alignment = align(&a, &b, scoring);
    let groups = group_spans(&alignment);
    let map = classify_tokens(&a);
    let transitions = transitions(&a, &alignment, &groups, &map);
    TransitionReport {
        src_len: a.len(),
        out_len: b.len(),
        score: score_of(&alignment, scoring),
        length_ok: b.len() * 4 >= a.len() * 3,
        alignment,
        groups,
        transitions,
    }
}

/// Corpus totals. Transitions are tallied only for pairs passing the
/// length filter; leading misalignments are kept apart.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pairs: usize,
    pub perfect: usize,
    pub filtered_out: usize,
    pub transitions: usize,
    pub ambiguous: usize,
    pub unambiguous: usize,
    pub leading: usize,
}

impl Summary {
    pub fn of(report: &TransitionReport) -> Summary {
        let mut s = Summary { pairs: 1, perfect: usize::from(report.is_perfect()), ..Summary::default() };
        if !report.length_ok {
            s.filtered_out = 1;
            return s;
        }
        for t in &report.transitions {
            match t.ambiguous {
                None => s.leading += 1,
                Some(true) => {
                    s.transitions += 1;
                    s.ambiguous += 1;
                }
                Some(false) => {
                    s.transitions += 1;
                    s.unambiguous += 1;
                }
            }
        }
        s
    }

    pub fn ambiguous_ratio(&self) -> Option<f64> {
        (self.transitions > 0).then(|| self.ambiguous as f64 / self.transitions as f64)
    }

    pub fn table(&self) -> String {
        let mut out = String::new();
        let ratio = self.ambiguous_ratio().map_or("n/a".to_string(), |r| format!("{r:.4}"));
        let rows = [
            ("pairs", self.pairs.to_string()),
            ("perfect copies", self.perfect.to_string()),
            ("below 75% length", self.filtered_out.to_string()),
            ("transitions", self.transitions.to_string()),
            ("ambiguous", self.ambiguous.to_string()),
            ("unambiguous", self.unambiguous.to_string()),
            ("leading misalignments", self.leading.to_string()),
            ("ambiguous ratio", ratio),
        ];
        for (k, v) in rows {
            let _ = writeln!(out, "{k:<22} {v:>10}");
        }
        out
    }
}

impl Add for Summary {
    type Output = Summary;

    fn add(self, o: Summary) -> Summary {
        Summary {
            pairs: self.pairs + o.pairs,
            perfect: self.perfect + o.perfect,
            filtered_out: self.filtered_out + o.filtered_out,
            transitions: self.transitions + o.transitions,
            ambiguous: self.ambiguous + o.ambiguous,
            unambiguous: self.unambiguous + o.unambiguous,
            leading: self.leading + o.leading,
        }
    }
}

impl std::iter::Sum for Summary {
    fn sum<I: Iterator<Item = Summary>>(iter: I) -> Summary {
        iter.fold(Summary::default(), Add::add)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn worked_pair() -> (Vec<&'static str>, Vec<&'static str>) {
        let src = vec![
            "Ġne", "am", "que", ".", "ĠNon", "Ġet", "inc", "idunt", "Ġdol", "orem", "Ġtemp", "ora", "Ġmagn", "am", ".",
        ];
        let mut out = src[..14].to_vec();
        out.extend([
            "Ġvelit", "Ġne", "que", ".", "ĠNon", "Ġet", "inc", "idunt", "Ġdol", "orem", "Ġtemp", "ora", "Ġmagn", "am", ".",
        ]);
        (src, out)
    }

    #[test]
    fn worked_example() {
        let (src, out) = worked_pair();
        assert_eq!(out.len(), 29);
        let r = analyze(&src, &out, &Scoring::default());
        assert_eq!(r.alignment.len(), 29);
        for (k, o) in r.alignment[..14].iter().enumerate() {
            assert_eq!((o.kind, o.src_index, o.out_index), (OpKind::Match, Some(k), Some(k)));
        }
        for (k, o) in r.alignment[14..28].iter().enumerate() {
            assert_eq!((o.kind, o.src_index, o.out_index), (OpKind::Insert, None, Some(14 + k)));
        }
        assert_eq!(r.alignment[28], AlignmentOp { kind: OpKind::Match, src_index: Some(14), out_index: Some(28) });
        assert_eq!(
            r.groups,
            vec![
                SpanGroup { kind: SpanKind::Aligned, ops: 0..14 },
                SpanGroup { kind: SpanKind::Misaligned, ops: 14..28 },
                SpanGroup { kind: SpanKind::Aligned, ops: 28..29 },
            ]
        );
        assert_eq!(
            r.transitions,
            vec![Transition { src_index: 13, token: Some("am".into()), ambiguous: Some(true) }]
        );
        assert!(r.length_ok);
    }

    #[test]
    fn classification() {
        let m = classify_tokens(&["a", "b", "a", "c"]);
        assert_eq!(m.is_ambiguous("a"), Some(true));
        assert_eq!(m.is_ambiguous("b"), Some(false));
        assert_eq!(m.is_ambiguous("c"), Some(false));
        assert_eq!(classify_tokens(&["x"]).is_ambiguous("x"), Some(false));
        let (src, _) = worked_pair();
        assert_eq!(classify_tokens(&src).is_ambiguous("am"), Some(true));
    }

    #[test]
    fn grouping() {
        let x = ["a", "b"];
        assert_eq!(group_spans(&align(&x, &x, &Scoring::default())).len(), 1);
        let alternating: Vec<AlignmentOp> = (0..6)
            .map(|k| {
                if k % 2 == 0 {
                    AlignmentOp { kind: OpKind::Match, src_index: Some(k / 2), out_index: Some(k) }
                } else {
                    AlignmentOp { kind: OpKind::Insert, src_index: None, out_index: Some(k) }
                }
            })
            .collect();
        let g = group_spans(&alternating);
        assert_eq!(g.len(), 6);
        assert!(g.iter().all(|s| s.ops.len() == 1));
    }

    #[test]
    fn perfect_copy_and_leading_misalignment() {
        let x = ["a", "b", "c"];
        let r = analyze(&x, &x, &Scoring::default());
        assert!(r.transitions.is_empty() && r.is_perfect());
        let r = analyze(&["a", "b", "c"], &["z", "b", "c"], &Scoring::default());
        assert_eq!(r.transitions, vec![Transition { src_index: -1, token: None, ambiguous: None }]);
        assert_eq!(Summary::of(&r).leading, 1);
    }

    #[test]
    fn length_filter() {
        let r = analyze(&["a", "b", "c", "d"], &["a", "b"], &Scoring::default());
        assert!(!r.length_ok);
        let s = Summary::of(&r);
        assert_eq!((s.filtered_out, s.transitions), (1, 0));
        assert!(analyze(&["a", "b", "c", "d"], &["a", "b", "c"], &Scoring::default()).length_ok);
    }
}
