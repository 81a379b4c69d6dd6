//! Global token alignment with a deterministic choice among optima.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scoring {
    pub matched: i32,
    pub mismatch: i32,
    pub gap: i32,
}

impl Default for Scoring {
    fn default() -> Self {
        Scoring { matched: 1, mismatch: -1, gap: -1 }
    }
}

impl std::str::FromStr for Scoring {
    type Err = String;

    /// `match,mismatch,gap`, e.g. `1,-1,-1`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<i32> = s
            .split(',')
            .map(|p| p.trim().parse().map_err(|_| format!("bad scoring component '{p}'")))
            .collect::<Result<_, _>>()?;
        match parts[..] {
            [matched, mismatch, gap] => Ok(Scoring { matched, mismatch, gap }),
            _ => Err(format!("scoring needs three comma-separated integers, got '{s}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Match,
    Substitute,
    Delete,
    Insert,
}

/// One alignment step. Delete consumes a source token only, insert an
/// output token only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentOp {
    pub kind: OpKind,
    pub src_index: Option<usize>,
    pub out_index: Option<usize>,
}

impl AlignmentOp {
    fn new(kind: OpKind, i: usize, j: usize) -> Self {
        let (src_index, out_index) = match kind {
            OpKind::Match | OpKind::Substitute => (Some(i), Some(j)),
            OpKind::Delete => (Some(i), None),
            OpKind::Insert => (None, Some(j)),
        };
        AlignmentOp { kind, src_index, out_index }
    }
}

/// Total score of an alignment.
pub fn score_of(ops: &[AlignmentOp], scoring: &Scoring) -> i64 {
    ops.iter()
        .map(|o| {
            i64::from(match o.kind {
                OpKind::Match => scoring.matched,
                OpKind::Substitute => scoring.mismatch,
                OpKind::Delete | OpKind::Insert => scoring.gap,
            })
        })
        .sum()
}

/// Class of the previous step, for counting span groups.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Prev {
    Start = 0,
    Aligned = 1,
    Misaligned = 2,
}

/// Best (score, -groups) for a suffix; larger is better.
type Value = (i64, i64);

const PREFERENCE: [OpKind; 4] = [OpKind::Match, OpKind::Substitute, OpKind::Delete, OpKind::Insert];

/// Needleman-Wunsch alignment of `src` against `out`.
///
/// Among all alignments of maximal score, the one with the fewest span
/// groups (maximal runs of matches or of non-matches) is chosen, and any
/// remaining tie is broken left to right preferring match, then substitute,
/// then delete, then insert.
pub fn align<T: PartialEq>(src: &[T], out: &[T], scoring: &Scoring) -> Vec<AlignmentOp> {
    let (n, m) = (src.len(), out.len());
    let w = m + 1;
    let idx = |i: usize, j: usize, p: Prev| ((i * w + j) * 3) + p as usize;
    // best[idx(i, j, p)]: optimum for src[i..], out[j..] after a step of class p.
    let mut best: Vec<Value> = vec![(0, 0); (n + 1) * w * 3];
    let step = |kind: OpKind| -> (i64, Prev) {
        match kind {
            OpKind::Match => (i64::from(scoring.matched), Prev::Aligned),
            OpKind::Substitute => (i64::from(scoring.mismatch), Prev::Misaligned),
            OpKind::Delete | OpKind::Insert => (i64::from(scoring.gap), Prev::Misaligned),
        }
    };
    let allowed = |kind: OpKind, i: usize, j: usize| -> bool {
        match kind {
            OpKind::Match => i < n && j < m && src[i] == out[j],
            OpKind::Substitute => i < n && j < m && src[i] != out[j],
            OpKind::Delete => i < n,
            OpKind::Insert => j < m,
        }
    };
    let next = |kind: OpKind, i: usize, j: usize| -> (usize, usize) {
        match kind {
            OpKind::Match | OpKind::Substitute => (i + 1, j + 1),
            OpKind::Delete => (i + 1, j),
            OpKind::Insert => (i, j + 1),
        }
    };
    for i in (0..=n).rev() {
        for j in (0..=m).rev() {
            if i == n && j == m {
                continue;
            }
            for p in [Prev::Start, Prev::Aligned, Prev::Misaligned] {
                let mut v: Option<Value> = None;
                for kind in PREFERENCE {
                    if !allowed(kind, i, j) {
                        continue;
                    }
                    let (s, class) = step(kind);
                    let (ni, nj) = next(kind, i, j);
                    let rest = best[idx(ni, nj, class)];
                    let cand = (s + rest.0, rest.1 - i64::from(class != p));
                    if v.is_none_or(|b| cand > b) {
                        v = Some(cand);
                    }
                }
                best[idx(i, j, p)] = v.expect("some step is allowed");
            }
        }
    }
    let mut ops = Vec::with_capacity(n.max(m));
    let (mut i, mut j, mut p) = (0, 0, Prev::Start);
    while i < n || j < m {
        let target = best[idx(i, j, p)];
        let kind = PREFERENCE
            .into_iter()
            .find(|&kind| {
                if !allowed(kind, i, j) {
                    return false;
                }
                let (s, class) = step(kind);
                let (ni, nj) = next(kind, i, j);
                let rest = best[idx(ni, nj, class)];
                (s + rest.0, rest.1 - i64::from(class != p)) == target
            })
            .expect("an optimal step exists");
        ops.push(AlignmentOp::new(kind, i, j));
        p = step(kind).1;
        (i, j) = next(kind, i, j);
    }
    ops
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_all_matches() {
        let x = ["a", "b", "c"];
        let ops = align(&x, &x, &Scoring::default());
        assert_eq!(ops.len(), 3);
        assert!(ops.iter().all(|o| o.kind == OpKind::Match));
    }

    #[test]
    fn single_insertion() {
        let ops = align(&["a", "b"], &["a", "c", "b"], &Scoring::default());
        let kinds: Vec<OpKind> = ops.iter().map(|o| o.kind).collect();
        assert_eq!(kinds, vec![OpKind::Match, OpKind::Insert, OpKind::Match]);
        assert_eq!(ops[1].out_index, Some(1));
    }

    #[test]
    fn empty_inputs() {
        assert!(align::<&str>(&[], &[], &Scoring::default()).is_empty());
        let ops = align(&["a"], &[], &Scoring::default());
        assert_eq!(ops, vec![AlignmentOp { kind: OpKind::Delete, src_index: Some(0), out_index: None }]);
    }

    #[test]
    fn scoring_parse() {
        assert_eq!("2,-1,-3".parse::<Scoring>().unwrap(), Scoring { matched: 2, mismatch: -1, gap: -3 });
        assert!("1,2".parse::<Scoring>().is_err());
    }
}
