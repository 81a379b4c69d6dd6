//! Random task instances.

use rand::seq::SliceRandom;
use rand::Rng;

use super::GenError;
use crate::oracles::{CopyInstance, RetrievalInstance, TaskKind};
use crate::symbol::{Alphabet, Symbol};

/// Context positions eligible for the query: interior ones, so every
/// sibling task has an answer, and only the first half under `first_half`.
fn query_slots(len: usize, first_half: bool) -> Vec<usize> {
    let end = if first_half { len.div_ceil(2) } else { len };
    (1..len.saturating_sub(1)).filter(|&i| i < end).collect()
}

/// Checks that instances of `kind` with context/source length `len` exist.
pub fn check_feasible(kind: TaskKind, len: usize, alphabet: &Alphabet, first_half: bool) -> Result<(), GenError> {
    let infeasible = |why: String| Err(GenError::InfeasibleSpec(format!("{kind} at length {len}: {why}")));
    if len < kind.min_length() {
        return infeasible(format!("shorter than the minimum length {}", kind.min_length()));
    }
    if kind.is_retrieval() {
        if alphabet.len() < 2 {
            return infeasible("retrieval needs at least two symbols".into());
        }
        let slots = query_slots(len, first_half).len();
        let need = if kind.is_unique() { 1 } else { 2 };
        if slots < need {
            let place = if first_half { "interior first-half" } else { "interior" };
            return infeasible(format!("needs {need} {place} query positions, only {slots} available"));
        }
    } else if kind.is_copy() {
        if alphabet.is_empty() {
            return infeasible("empty alphabet".into());
        }
        if kind.is_unique() && alphabet.len() < len {
            return infeasible(format!(
                "uniqueness requires an alphabet of at least {len} symbols, have {}",
                alphabet.len()
            ));
        }
    } else if alphabet.is_empty() {
        return infeasible("empty alphabet".into());
    }
    Ok(())
}

/// A context of length `len` with its query. Unique kinds place the query
/// once; non-unique kinds place it `t` times with `t` uniform in
/// `[2, max(2, len / 4)]` (capped by the available slots).
pub fn sample_retrieval<R: Rng>(
    kind: TaskKind,
    len: usize,
    alphabet: &Alphabet,
    first_half: bool,
    rng: &mut R,
) -> Result<RetrievalInstance, GenError> {
    check_feasible(kind, len, alphabet, first_half)?;
    let symbols = alphabet.symbols();
    let query = symbols.choose(rng).expect("non-empty").clone();
    let fillers: Vec<&Symbol> = symbols.iter().filter(|s| **s != query).collect();
    let mut slots = query_slots(len, first_half);
    let t = if kind.is_unique() { 1 } else { rng.gen_range(2..=slots.len().min((len / 4).max(2))) };
    let (chosen, _) = slots.partial_shuffle(rng, t);
    let mut is_query = vec![false; len];
    for &i in chosen.iter() {
        is_query[i] = true;
    }
    let context = is_query
        .into_iter()
        .map(|q| if q { query.clone() } else { (*fillers.choose(rng).expect("non-empty")).clone() })
        .collect();
    Ok(RetrievalInstance::new(context, query))
}

/// A source of length `len`: injective for unique kinds, uniform otherwise.
pub fn sample_copy<R: Rng>(kind: TaskKind, len: usize, alphabet: &Alphabet, rng: &mut R) -> Result<CopyInstance, GenError> {
    check_feasible(kind, len, alphabet, false)?;
    let source = if kind.is_unique() {
        let mut pool = alphabet.symbols().to_vec();
        let (head, _) = pool.partial_shuffle(rng, len);
        head.to_vec()
    } else {
        (0..len).map(|_| alphabet.symbols().choose(rng).expect("non-empty").clone()).collect()
    };
    Ok(CopyInstance { source })
}

/// Words of 1..=`max_word` symbols joined by `separator`, `len` words total.
pub fn sample_words<R: Rng>(len: usize, max_word: usize, alphabet: &Alphabet, separator: &Symbol, rng: &mut R) -> Vec<Symbol> {
    let mut out = Vec::new();
    for w in 0..len {
        if w > 0 {
            out.push(separator.clone());
        }
        for _ in 0..rng.gen_range(1..=max_word.max(1)) {
            out.push(alphabet.symbols().choose(rng).expect("non-empty").clone());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::rng::cell_rng;
    use crate::oracles::{first_half_violations, validate_instance, TaskInstance};

    #[test]
    fn sampled_instances_are_valid_for_every_sibling() {
        let a = Alphabet::default_ascii();
        for len in [3, 4, 5, 10, 57] {
            for i in 0..200 {
                let mut rng = cell_rng(1, &[len as u64, i]);
                for kind in [TaskKind::UL, TaskKind::NLFirst] {
                    if len < kind.min_length() {
                        assert!(sample_retrieval(kind, len, &a, false, &mut rng).is_err());
                        continue;
                    }
                    let inst = TaskInstance::Retrieval(sample_retrieval(kind, len, &a, false, &mut rng).unwrap());
                    for &sib in kind.group() {
                        assert!(validate_instance(sib, &inst).is_empty(), "{sib} {inst:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn first_half_placement() {
        let a = Alphabet::default_ascii();
        for i in 0..300 {
            let mut rng = cell_rng(2, &[i]);
            let r = sample_retrieval(TaskKind::NRLast, 200, &a, true, &mut rng).unwrap();
            assert!(first_half_violations(&r).is_empty());
            assert!(r.occurrences().len() >= 2);
        }
        assert!(sample_retrieval(TaskKind::NRLast, 4, &a, true, &mut cell_rng(0, &[])).is_err());
    }

    #[test]
    fn infeasible_lengths() {
        let a = Alphabet::default_ascii();
        assert!(matches!(check_feasible(TaskKind::NRLast, 3, &a, false), Err(GenError::InfeasibleSpec(_))));
        assert!(matches!(check_feasible(TaskKind::UF, 80, &a, false), Err(GenError::InfeasibleSpec(_))));
        assert!(check_feasible(TaskKind::NF, 80, &a, false).is_ok());
    }

    #[test]
    fn injective_sources() {
        let a = Alphabet::default_ascii();
        let mut rng = cell_rng(5, &[]);
        let s = sample_copy(TaskKind::UB, 62, &a, &mut rng).unwrap();
        let mut sorted = s.source.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 62);
    }
}
