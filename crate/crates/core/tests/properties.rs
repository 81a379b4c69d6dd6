mod common;

use std::collections::BTreeSet;

use crasp_kit::crasp::program::{CountWindow, Op};
use crasp_kit::crasp::{evaluate, OpId, Runner};
use crasp_kit::datasets::lorem::whitespace_tokenizer;
use crasp_kit::datasets::prompt::{render_prompt, PromptTemplate};
use crasp_kit::datasets::rng::cell_rng;
use crasp_kit::datasets::sample::{sample_copy, sample_retrieval};
use crasp_kit::datasets::{check_record, generate as gen_records, GenSpec, Lengths};
use crasp_kit::glitch::{align, analyze, classify_tokens, group_spans, score_of, AlignmentOp, OpKind, Scoring, SpanKind};
use crasp_kit::oracles::{oracle_copy, oracle_retrieval, oracle_word_reverse, CopyInstance, RetrievalInstance};
use crasp_kit::{Alphabet, Program, Symbol, TaskKind};
use proptest::prelude::*;

use common::{all_short, brute};

const LETTERS: [&str; 3] = ["a", "b", "c"];

type Gene = (u8, u16, u16, u16, u8);

/// Program text assembled from genes. Each gene adds one definition whose
/// arguments refer to earlier names of the right kind. With `local_only`
/// no positional or unbounded counting forms are emitted. Also returns, for
/// each named definition, how far back its value can look.
fn program_text(genes: &[Gene], local_only: bool) -> (String, Vec<(String, usize)>) {
    let mut bools: Vec<(String, usize)> = vec![("B0".into(), 0)];
    let mut counts: Vec<(String, usize)> = vec![("C0".into(), 0)];
    let mut lines = vec!["alphabet {'a','b','c'}".to_string(), "bool B0 := Q('a')".into(), "count C0 := ONE".into()];
    for (n, &(k, x, y, z, w)) in genes.iter().enumerate() {
        let b = |i: u16| bools[i as usize % bools.len()].clone();
        let c = |i: u16| counts[i as usize % counts.len()].clone();
        let window = |local: bool| -> (String, usize) {
            if !local {
                return ("all".into(), 0);
            }
            let d: BTreeSet<u16> = [z % 3, (z / 3) % 4].into();
            let list = d.iter().map(u16::to_string).collect::<Vec<_>>().join(",");
            (format!("dist={{{list}}}"), *d.iter().max().unwrap() as usize)
        };
        let want_local = local_only || z % 2 == 1;
        let kind = if local_only { [0, 1, 2, 3, 4, 6, 7, 8, 9, 10, 11, 12][k as usize % 12] } else { k % 13 };
        let (is_bool, expr, reach) = match kind {
            0 => (true, format!("Q('{}')", LETTERS[x as usize % 3]), 0),
            1 => {
                let (p, r) = b(x);
                (true, format!("NOT({p})"), r)
            }
            2 | 3 => {
                let ((p, r1), (q, r2)) = (b(x), b(y));
                (true, format!("{}({p}, {q})", if kind == 2 { "AND" } else { "OR" }), r1.max(r2))
            }
            4 => (true, "TRUE".into(), 0),
            5 => {
                let period = i64::from(w % 4) + 1;
                (true, format!("POS(period={period}, residues={{{}}})", i64::from(x) % period), 0)
            }
            6 => {
                let ((p, r1), (q, r2)) = (c(x), c(y));
                (true, format!("LE({p}, {q})"), r1.max(r2))
            }
            7 | 8 => {
                let (p, r) = b(x);
                let (win, d) = window(want_local);
                let head = if kind == 7 { "EXISTS" } else { "COUNT" };
                (kind == 7, format!("{head}[{win}]({p})"), r + d)
            }
            9 | 10 => {
                let ((p, r1), (q, r2)) = (c(x), c(y));
                (false, format!("{}({p}, {q})", if kind == 9 { "ADD" } else { "SUB" }), r1.max(r2))
            }
            11 => {
                let ((t, r0), (p, r1), (q, r2)) = (b(x), c(y), c(z));
                (false, format!("IF({t}, {p}, {q})"), r0.max(r1).max(r2))
            }
            _ => (false, "ONE".into(), 0),
        };
        let name = format!("{}{}", if is_bool { "B" } else { "C" }, n + 1);
        lines.push(format!("{} {name} := {expr}", if is_bool { "bool" } else { "count" }));
        if is_bool { &mut bools } else { &mut counts }.push((name, reach));
    }
    lines.push(format!("next 'a' := {}", bools.last().unwrap().0));
    let reaches = bools.into_iter().chain(counts).collect();
    (lines.join("\n"), reaches)
}

fn genes() -> impl Strategy<Value = Vec<Gene>> {
    prop::collection::vec(any::<Gene>(), 1..14)
}

fn word() -> impl Strategy<Value = Vec<Symbol>> {
    prop::collection::vec(0usize..3, 0..40).prop_map(|v| v.into_iter().map(|i| Symbol::new(LETTERS[i])).collect())
}

fn ids(p: &Program) -> impl Iterator<Item = OpId> {
    (0..p.ops().len() as u32).map(OpId)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn random_programs_are_valid(g in genes()) {
        let (text, _) = program_text(&g, false);
        let p = Program::parse(&text).unwrap();
        prop_assert!(p.is_valid(), "{:?}", p.diagnostics());
    }

    #[test]
    fn evaluation_is_deterministic(g in genes(), s in word()) {
        let p = Program::parse(&program_text(&g, false).0).unwrap();
        let (a, b) = (evaluate(&p, &s).unwrap(), evaluate(&p, &s).unwrap());
        for id in ids(&p) {
            prop_assert_eq!(a.column(id), b.column(id));
        }
    }

    #[test]
    fn incremental_runner_matches_dense(g in genes(), s in word()) {
        let p = Program::parse(&program_text(&g, false).0).unwrap();
        let dense = evaluate(&p, &s).unwrap();
        let mut r = Runner::new(&p).unwrap();
        for (i, sym) in s.iter().enumerate() {
            r.push(sym).unwrap();
            for id in ids(&p) {
                prop_assert_eq!(r.value(id), dense.column(id)[i], "op {} at {}", id.index(), i);
            }
        }
    }

    #[test]
    fn local_programs_are_translation_invariant(g in genes(), s in word(), pad in word()) {
        let (text, reaches) = program_text(&g, true);
        let p = Program::parse(&text).unwrap();
        let mut padded = pad.clone();
        padded.extend(s.iter().cloned());
        let (plain, shifted) = (evaluate(&p, &s).unwrap(), evaluate(&p, &padded).unwrap());
        for (name, reach) in &reaches {
            let (u, v) = (plain.values(name).unwrap(), shifted.values(name).unwrap());
            for i in *reach..s.len() {
                prop_assert_eq!(u[i], v[i + pad.len()], "{} at {}", name, i);
            }
        }
    }

    #[test]
    fn positional_ops_are_periodic(g in genes(), s in word()) {
        let p = Program::parse(&program_text(&g, false).0).unwrap();
        let v = evaluate(&p, &s).unwrap();
        for id in ids(&p) {
            if let Op::Positional(phi) = &p.op(id).op {
                let col = v.column(id);
                let d = phi.period as usize;
                for i in 0..s.len().saturating_sub(d) {
                    prop_assert_eq!(col[i], col[i + d]);
                }
            }
        }
    }

    #[test]
    fn counts_are_bounded_and_arithmetic_is_exact(g in genes(), s in word()) {
        let p = Program::parse(&program_text(&g, false).0).unwrap();
        let v = evaluate(&p, &s).unwrap();
        for id in ids(&p) {
            let col = v.column(id);
            for (i, &value) in col.iter().enumerate() {
                match &p.op(id).op {
                    Op::Count { window: CountWindow::All, .. } => prop_assert!((0..=i as i64 + 1).contains(&value)),
                    Op::Count { window: CountWindow::Local(psi), .. } => {
                        let room = psi.distances.iter().filter(|&&d| d >= 0 && d as usize <= i).count() as i64;
                        prop_assert!((0..=room).contains(&value));
                    }
                    Op::Add(x, y) => prop_assert_eq!(value, v.column(*x)[i] + v.column(*y)[i]),
                    Op::Sub(x, y) => prop_assert_eq!(value, v.column(*x)[i] - v.column(*y)[i]),
                    Op::Cond { test, then, otherwise } => {
                        let pick = if v.column(*test)[i] != 0 { then } else { otherwise };
                        prop_assert_eq!(value, v.column(*pick)[i]);
                    }
                    _ => {}
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn exists_is_le_one_count(g in genes(), s in word(), local in any::<bool>(), d in 0u8..4) {
        let (text, _) = program_text(&g, false);
        let win = if local { format!("dist={{{d}}}") } else { "all".into() };
        let p = Program::parse(&format!(
            "{}\nbool E1 := EXISTS[{win}](B0)\nbool E2 := LE(ONE, COUNT[{win}](B0))",
            text.rsplit_once('\n').unwrap().0
        ))
        .unwrap();
        let v = evaluate(&p, &s).unwrap();
        let b0 = v.bools("B0").unwrap();
        let direct: Vec<i64> = (0..s.len())
            .map(|i| {
                let hit = if local { i >= d as usize && b0[i - d as usize] } else { b0[..=i].iter().any(|&x| x) };
                i64::from(hit)
            })
            .collect();
        prop_assert_eq!(v.values("E1").unwrap(), v.values("E2").unwrap());
        prop_assert_eq!(v.values("E1").unwrap(), &direct[..]);
    }

    #[test]
    fn retrieval_mirror_symmetry(seed in any::<u64>(), len in 4usize..60) {
        let alphabet = Alphabet::default_ascii();
        let mut rng = cell_rng(seed, &[len as u64]);
        for (left, right) in [(TaskKind::UL, TaskKind::UR), (TaskKind::NLFirst, TaskKind::NRLast), (TaskKind::NLLast, TaskKind::NRFirst)] {
            let inst = sample_retrieval(left, len, &alphabet, false, &mut rng).unwrap();
            let mirrored = inst.reversed();
            prop_assert_eq!(oracle_retrieval(left, &inst), oracle_retrieval(right, &mirrored));
            let inst = sample_retrieval(right, len, &alphabet, false, &mut rng).unwrap();
            prop_assert_eq!(oracle_retrieval(right, &inst), oracle_retrieval(left, &inst.reversed()));
        }
    }

    #[test]
    fn copy_duality(seed in any::<u64>(), len in 1usize..62) {
        let alphabet = Alphabet::default_ascii();
        let mut rng = cell_rng(seed, &[len as u64]);
        for (fwd, back) in [(TaskKind::UF, TaskKind::UB), (TaskKind::NF, TaskKind::NB)] {
            let inst = sample_copy(fwd, len, &alphabet, &mut rng).unwrap();
            let f = oracle_copy(fwd, &inst).unwrap();
            prop_assert_eq!(&f, &inst.source);
            let mut b = oracle_copy(back, &inst).unwrap();
            b.reverse();
            prop_assert_eq!(&b, &f);
            let twice = oracle_copy(back, &CopyInstance { source: oracle_copy(back, &inst).unwrap() }).unwrap();
            prop_assert_eq!(&twice, &inst.source);
        }
    }

    #[test]
    fn word_reversal_of_single_token_words(s in prop::collection::vec(0usize..3, 1..30)) {
        let sep = Symbol::new("|");
        let tokens: Vec<Symbol> = s.iter().map(|&i| Symbol::new(LETTERS[i])).collect();
        let mut joined = Vec::new();
        for (i, t) in tokens.iter().enumerate() {
            if i > 0 {
                joined.push(sep.clone());
            }
            joined.push(t.clone());
        }
        let out: Vec<Symbol> = oracle_word_reverse(&joined, &sep).unwrap().into_iter().filter(|t| *t != sep).collect();
        prop_assert_eq!(out, tokens.into_iter().rev().collect::<Vec<_>>());
    }
}

fn text() -> impl Strategy<Value = Vec<&'static str>> {
    prop::collection::vec(0usize..3, 0..20).prop_map(|v| v.into_iter().map(|i| LETTERS[i]).collect())
}

fn check_projections(src: &[&str], out: &[&str], ops: &[AlignmentOp]) -> Result<(), TestCaseError> {
    let s: Vec<usize> = ops.iter().filter_map(|o| o.src_index).collect();
    let o: Vec<usize> = ops.iter().filter_map(|o| o.out_index).collect();
    prop_assert_eq!(s, (0..src.len()).collect::<Vec<_>>());
    prop_assert_eq!(o, (0..out.len()).collect::<Vec<_>>());
    for op in ops {
        match op.kind {
            OpKind::Match => prop_assert!(src[op.src_index.unwrap()] == out[op.out_index.unwrap()]),
            OpKind::Substitute => prop_assert!(src[op.src_index.unwrap()] != out[op.out_index.unwrap()]),
            OpKind::Delete => prop_assert!(op.out_index.is_none()),
            OpKind::Insert => prop_assert!(op.src_index.is_none()),
        }
    }
    Ok(())
}

fn short() -> impl Strategy<Value = Vec<&'static str>> {
    prop::collection::vec(0usize..3, 0..=8).prop_map(|v| v.into_iter().map(|i| LETTERS[i]).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn alignment_index_projections(a in text(), b in text()) {
        let ops = align(&a, &b, &Scoring::default());
        check_projections(&a, &b, &ops)?;
        for g in group_spans(&ops) {
            let all_match = ops[g.ops.clone()].iter().all(|o| o.kind == OpKind::Match);
            let no_match = ops[g.ops.clone()].iter().all(|o| o.kind != OpKind::Match);
            let ok = if g.kind == SpanKind::Aligned { all_match } else { no_match };
            prop_assert!(ok);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn alignment_is_optimal(a in short(), b in short(), m in 1i32..3, mm in -2i32..0, gap in -2i32..0) {
        let scoring = Scoring { matched: m, mismatch: mm, gap };
        let ops = align(&a, &b, &scoring);
        let (score, groups) = brute(&a, &b, &scoring);
        prop_assert_eq!(score_of(&ops, &scoring), score);
        prop_assert_eq!(group_spans(&ops).len(), groups);
    }

    #[test]
    fn identical_suffix_adds_no_transitions(a in text(), b in text(), t in text()) {
        let before = analyze(&a, &b, &Scoring::default()).transitions.len();
        let (mut a2, mut b2) = (a.clone(), b.clone());
        a2.extend(&t);
        b2.extend(&t);
        let after = analyze(&a2, &b2, &Scoring::default()).transitions.len();
        prop_assert!(after <= before, "{} -> {}", before, after);
    }

    #[test]
    fn bigram_partition(a in prop::collection::vec(0usize..6, 0..60)) {
        let toks: Vec<String> = a.iter().map(|i| format!("w{i}")).collect();
        let map = classify_tokens(&toks);
        let distinct: BTreeSet<&String> = toks.iter().collect();
        prop_assert_eq!(map.ambiguous_count() + map.unambiguous_count(), distinct.len());
    }

    #[test]
    fn generated_records_follow_the_oracles(seed in any::<u64>(), task in 0usize..11, len in 4usize..40) {
        let task = [
            TaskKind::UL, TaskKind::UR, TaskKind::NLFirst, TaskKind::NRFirst, TaskKind::NLLast, TaskKind::NRLast,
            TaskKind::UF, TaskKind::UB, TaskKind::NF, TaskKind::NB, TaskKind::WordReverse,
        ][task];
        let len = len.max(task.min_length());
        let recs = gen_records(&GenSpec::new(task, Lengths::Each(vec![len]), 5, seed)).unwrap();
        prop_assert_eq!(recs.len(), 5);
        for r in &recs {
            prop_assert!(check_record(r).is_ok(), "{:?}", check_record(r));
        }
    }
}

#[test]
fn exhaustive_small_alignments_are_optimal() {
    let words = all_short(&LETTERS);
    assert_eq!(words.len(), 121);
    let scoring = Scoring::default();
    for a in &words {
        for b in &words {
            let ops = align(a, b, &scoring);
            assert_eq!((score_of(&ops, &scoring), group_spans(&ops).len()), brute(a, b, &scoring), "{a:?} vs {b:?}");
        }
    }
}

#[test]
fn siblings_reuse_contexts_with_different_answers() {
    for group in [TaskKind::UL.group(), TaskKind::NLFirst.group(), TaskKind::UF.group(), TaskKind::NF.group()] {
        let corpora: Vec<_> = group
            .iter()
            .map(|&t| gen_records(&GenSpec::new(t, Lengths::Each(vec![12, 30]), 40, 11)).unwrap())
            .collect();
        for pair in corpora.windows(2) {
            assert!(pair[0].iter().zip(&pair[1]).all(|(x, y)| x.input == y.input && x.task != y.task));
            assert!(pair[0].iter().zip(&pair[1]).any(|(x, y)| x.target != y.target));
        }
    }
}

#[test]
fn generation_ignores_worker_count() {
    let spec = GenSpec::new(TaskKind::NRFirst, Lengths::Uniform { min: 4, max: 80 }, 400, 5);
    let run = |n: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        pool.install(|| gen_records(&spec).unwrap())
    };
    assert_eq!(run(1), run(4));
    let lorem = crasp_kit::datasets::lorem::LoremSpec { count: 50, ..Default::default() };
    let run = |n: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        pool.install(|| crasp_kit::datasets::lorem::gen_lorem(&lorem, &whitespace_tokenizer))
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn prompt_grid_renders_twenty_distinct_prompts() {
    let pool = gen_records(&GenSpec::new(TaskKind::UR, Lengths::Each(vec![6, 10]), 30, 2)).unwrap();
    let record = pool.iter().find(|r| r.length == 10).unwrap();
    let grid = PromptTemplate::grid(5);
    assert_eq!(grid.len(), 20);
    let rendered: BTreeSet<String> = grid.iter().map(|t| render_prompt(t, record, &pool, 7).unwrap()).collect();
    assert_eq!(rendered.len(), 20);
}

#[test]
fn mirror_helper_keeps_query() {
    let inst = RetrievalInstance::new(["x", "q", "y"].map(Symbol::new).to_vec(), Symbol::new("q"));
    assert_eq!(inst.reversed().occurrences(), &[1]);
}
