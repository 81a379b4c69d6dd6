//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Run with `cargo test --test acceptance`.

mod common;

use std::process::{Command, ExitCode};
use std::time::Instant;

use crasp_kit::crasp::{continue_generation, Runner};
use crasp_kit::datasets::git::gen_git_histories;
use crasp_kit::datasets::lorem::{gen_lorem, paragraph_sentences, whitespace_tokenizer, LoremSpec};
use crasp_kit::datasets::prompt::PromptTemplate;
use crasp_kit::datasets::records::to_jsonl;
use crasp_kit::datasets::rng::cell_rng;
use crasp_kit::datasets::sample::sample_retrieval;
use crasp_kit::datasets::{check_record, generate as gen_records, GenSpec, Lengths};
use crasp_kit::glitch::{align, analyze, group_spans, score_of, OpKind, Scoring, SpanKind};
use crasp_kit::oracles::{first_half_violations, oracle_copy, oracle_retrieval, CopyInstance, RetrievalInstance};
use crasp_kit::programs::{verify_exhaustive, verify_program, VerifyError, BUNDLED};
use crasp_kit::symbol::tokenize;
use crasp_kit::{Alphabet, Next, Program, Symbol, TaskKind};
use rand::Rng;
use regex::Regex;

const BINS: [(usize, usize); 4] = [(4, 50), (51, 100), (101, 200), (201, 500)];

type Outcome = Result<String, String>;

type Criterion = (&'static str, fn() -> Outcome);

/// Context, query and the expected answer per task.
type RetrievalRow = (&'static str, &'static str, &'static [(TaskKind, &'static str)]);

fn chars(s: &str) -> Vec<Symbol> {
    s.chars().map(Symbol::from).collect()
}

fn sampled(tasks: &[TaskKind], samples: usize) -> Outcome {
    let started = Instant::now();
    let mut bad = Vec::new();
    for &task in tasks {
        let report = verify_program(task, &BINS, samples, 3).map_err(|e| e.to_string())?;
        if !report.passes() {
            bad.push(format!("{task}: {} mismatches, first {:?}", report.mismatches.len(), report.mismatches[0]));
        }
    }
    if bad.is_empty() {
        Ok(format!("0 mismatches, {samples}/bin over {BINS:?}, {:.1}s", started.elapsed().as_secs_f64()))
    } else {
        Err(bad.join("; "))
    }
}

fn retrieval_equivalence() -> Outcome {
    sampled(&[TaskKind::UL, TaskKind::UR, TaskKind::NLFirst, TaskKind::NRFirst], 2000)
}

fn copy_constructions() -> Outcome {
    let sampled = sampled(&[TaskKind::UF, TaskKind::UB], 1000)?;
    let alphabet = Alphabet::from_chars("abcd");
    let mut total = 0;
    for task in [TaskKind::UF, TaskKind::UB] {
        let r = verify_exhaustive(task, &alphabet, 3).map_err(|e| e.to_string())?;
        if !r.passes() || r.samples_per_bin != 24 {
            return Err(format!("{task} exhaustive: {} sources, {} mismatches", r.samples_per_bin, r.mismatches.len()));
        }
        total += r.samples_per_bin;
    }
    Ok(format!("{sampled}; exhaustive length 3 over 4 symbols: {total} sources"))
}

fn bundled(task: TaskKind) -> Program {
    let (_, _, text) = BUNDLED.iter().find(|(k, _, _)| *k == task).expect("bundled");
    Program::parse(text).expect("bundled program parses")
}

fn program_answer(p: &Program, context: &[Symbol], query: &Symbol) -> Result<Symbol, String> {
    let mut r = Runner::new(p).map_err(|e| e.to_string())?;
    r.push(&Symbol::bos()).map_err(|e| e.to_string())?;
    r.extend(context).map_err(|e| e.to_string())?;
    r.push(&Symbol::sep()).map_err(|e| e.to_string())?;
    r.push(query).map_err(|e| e.to_string())?;
    match r.next().map_err(|e| e.to_string())? {
        Next::Token(t) => Ok(t),
        Next::Halt => Err("program halted".into()),
    }
}

fn program_copy(p: &Program, source: &[Symbol]) -> Result<Vec<Symbol>, String> {
    let mut r = Runner::new(p).map_err(|e| e.to_string())?;
    r.push(&Symbol::bos()).map_err(|e| e.to_string())?;
    r.extend(source).map_err(|e| e.to_string())?;
    r.push(&Symbol::sep()).map_err(|e| e.to_string())?;
    let mut out = continue_generation(&mut r, source.len() + 2).map_err(|e| e.to_string())?;
    match out.pop() {
        Some(end) if end.is_special() => Ok(out),
        _ => Err("no end marker".into()),
    }
}

fn golden_tables() -> Outcome {
    let retrieval: [RetrievalRow; 4] = [
        ("ns0w6up9v8", "u", &[(TaskKind::UL, "6"), (TaskKind::UR, "p")]),
        ("qyw283zd9411w8", "3", &[(TaskKind::UL, "8"), (TaskKind::UR, "z")]),
        (
            "q5o0o8b6v5o3",
            "o",
            &[(TaskKind::NLFirst, "5"), (TaskKind::NRFirst, "0"), (TaskKind::NLLast, "5"), (TaskKind::NRLast, "3")],
        ),
        (
            "c8r5r5r3r6r0",
            "r",
            &[(TaskKind::NLFirst, "8"), (TaskKind::NRFirst, "5"), (TaskKind::NLLast, "6"), (TaskKind::NRLast, "0")],
        ),
    ];
    let copies = [
        ("Syb5DEHihO", TaskKind::UF, "Syb5DEHihO"),
        ("Syb5DEHihO", TaskKind::UB, "OhiHED5byS"),
        ("LnvTs1qgMt", TaskKind::UF, "LnvTs1qgMt"),
        ("LnvTs1qgMt", TaskKind::UB, "tMgq1sTvnL"),
        ("9975813713", TaskKind::NF, "9975813713"),
        ("9975813713", TaskKind::NB, "3173185799"),
        ("525671167", TaskKind::NF, "525671167"),
        ("525671167", TaskKind::NB, "761176525"),
    ];
    let (mut by_oracle, mut by_program) = (0, 0);
    for (context, query, answers) in retrieval {
        let inst = RetrievalInstance::new(chars(context), Symbol::new(query));
        for &(task, want) in answers {
            let got = oracle_retrieval(task, &inst).map_err(|e| format!("{task} on {context}: {e}"))?;
            if got.as_str() != want {
                return Err(format!("oracle {task} on {context}||{query}: got {got}, want {want}"));
            }
            by_oracle += 1;
            if BUNDLED.iter().any(|(k, _, _)| *k == task) {
                let got = program_answer(&bundled(task), inst.context(), inst.query())?;
                if got.as_str() != want {
                    return Err(format!("program {task} on {context}||{query}: got {got}, want {want}"));
                }
                by_program += 1;
            }
        }
    }
    for (source, task, want) in copies {
        let inst = CopyInstance { source: chars(source) };
        let got: String = oracle_copy(task, &inst).map_err(|e| e.to_string())?.iter().map(Symbol::as_str).collect();
        if got != want {
            return Err(format!("oracle {task} on {source}: got {got}, want {want}"));
        }
        by_oracle += 1;
        if BUNDLED.iter().any(|(k, _, _)| *k == task) {
            let got: String = program_copy(&bundled(task), &inst.source)?.iter().map(Symbol::as_str).collect();
            if got != want {
                return Err(format!("program {task} on {source}: got {got}, want {want}"));
            }
            by_program += 1;
        }
    }
    Ok(format!("{by_oracle} oracle answers, {by_program} bundled-program answers"))
}

fn worked_alignment() -> Outcome {
    let src: Vec<&str> = "Ġne am que . ĠNon Ġet inc idunt Ġdol orem Ġtemp ora Ġmagn am .".split(' ').collect();
    let mut out = src[..14].to_vec();
    out.extend(["Ġvelit", src[0]]);
    out.extend(&src[2..]);
    let r = analyze(&src, &out, &Scoring::default());
    let head = &r.groups[0];
    let aligned_head = head.kind == SpanKind::Aligned
        && head.ops == (0..14)
        && r.alignment[..14].iter().enumerate().all(|(k, o)| o.src_index == Some(k));
    let inserts = r.groups.get(1).is_some_and(|g| {
        g.kind == SpanKind::Misaligned && r.alignment[g.ops.clone()].iter().all(|o| o.kind == OpKind::Insert)
    });
    let t = &r.transitions;
    let transition = t.len() == 1 && t[0].src_index == 13 && t[0].token.as_deref() == Some("am") && t[0].ambiguous == Some(true);
    if aligned_head && inserts && transition {
        Ok(format!(
            "aligned (0,13), insert block of {}, transition 13 on \"am\" (ambiguous), {} ops",
            r.groups[1].ops.len(),
            r.alignment.len()
        ))
    } else {
        Err(format!("groups {:?}, transitions {:?}", r.groups, r.transitions))
    }
}

fn alignment_optimality() -> Outcome {
    let letters = ["a", "b", "c"];
    let scoring = Scoring::default();
    let mut rng = cell_rng(7, &[]);
    fn draw<'a>(rng: &mut impl Rng, letters: &[&'a str]) -> Vec<&'a str> {
        let n = rng.gen_range(0..=8);
        (0..n).map(|_| letters[rng.gen_range(0..letters.len())]).collect()
    }
    let mut checked = 0;
    for _ in 0..500 {
        let (a, b) = (draw(&mut rng, &letters), draw(&mut rng, &letters));
        let ops = align(&a, &b, &scoring);
        if score_of(&ops, &scoring) != common::brute(&a, &b, &scoring).0 {
            return Err(format!("{a:?} vs {b:?}"));
        }
        checked += 1;
    }
    let words = common::all_short(&letters);
    for a in &words {
        for b in &words {
            let ops = align(a, b, &scoring);
            if (score_of(&ops, &scoring), group_spans(&ops).len()) != common::brute(a, b, &scoring) {
                return Err(format!("{a:?} vs {b:?}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} pairs match exhaustive search"))
}

fn mirror_symmetry() -> Outcome {
    let alphabet = Alphabet::default_ascii();
    let pairs = [(TaskKind::UL, TaskKind::UR), (TaskKind::NLFirst, TaskKind::NRLast), (TaskKind::NLLast, TaskKind::NRFirst)];
    for (p, &(left, right)) in pairs.iter().enumerate() {
        for i in 0..1000u64 {
            let mut rng = cell_rng(1, &[p as u64, i]);
            let len = rng.gen_range(4..=200);
            let inst = sample_retrieval(left, len, &alphabet, false, &mut rng).map_err(|e| e.to_string())?;
            let a = oracle_retrieval(left, &inst).map_err(|e| e.to_string())?;
            let b = oracle_retrieval(right, &inst.reversed()).map_err(|e| e.to_string())?;
            if a != b {
                return Err(format!("{left}/{right} on {:?}", inst));
            }
        }
    }
    Ok("3 x 1000 instances".into())
}

fn dataset_contracts() -> Outcome {
    let git = gen_git_histories(&[10, 15, 20, 25], &[0, 1, 2], 1500);
    let hash = Regex::new("^[0-9a-f]{7}$").unwrap();
    if git.len() != 18_000 {
        return Err(format!("{} git records", git.len()));
    }
    for r in &git {
        let revert: Vec<&str> = r.revert.as_deref().unwrap_or_default().lines().collect();
        let cherry: Vec<&str> = r.cherrypick.as_deref().unwrap_or_default().lines().collect();
        if revert.iter().rev().ne(cherry.iter()) || revert.len() != r.length {
            return Err(format!("{}: cherrypick is not the reversed revert", r.id));
        }
        if let Some(line) = revert.iter().find(|l| !l.split(' ').next().is_some_and(|h| hash.is_match(h))) {
            return Err(format!("{}: bad hash in '{line}'", r.id));
        }
        check_record(r)?;
    }

    let spec = LoremSpec::default();
    let lorem = gen_lorem(&spec, &whitespace_tokenizer);
    if lorem.len() != 1500 {
        return Err(format!("{} lorem paragraphs", lorem.len()));
    }
    for (i, r) in lorem.iter().enumerate() {
        let n = paragraph_sentences(&spec, i).len();
        let tokens = whitespace_tokenizer(&r.input).len();
        if n != 45 || tokens > 500 {
            return Err(format!("{}: {n} sentences, {tokens} tokens", r.id));
        }
    }

    let grid = PromptTemplate::grid(5);
    let names: std::collections::BTreeSet<String> = grid.iter().map(PromptTemplate::name).collect();
    if grid.len() != 20 || names.len() != 20 {
        return Err(format!("prompt grid has {} entries, {} distinct", grid.len(), names.len()));
    }

    let mut ood = 0;
    let mut violations = 0;
    for task in [TaskKind::UL, TaskKind::UR, TaskKind::NLFirst, TaskKind::NRFirst, TaskKind::NLLast, TaskKind::NRLast] {
        let mut spec = GenSpec::new(task, Lengths::Uniform { min: 101, max: 200 }, 1500, 3);
        spec.first_half_ood = true;
        for r in gen_records(&spec).map_err(|e| e.to_string())? {
            let tokens = tokenize(&r.input);
            let at = tokens.iter().position(|t| t.as_str() == "||").ok_or("no separator")?;
            let inst = RetrievalInstance::new(tokens[..at].to_vec(), tokens[at + 1].clone());
            violations += first_half_violations(&inst).len();
            check_record(&r)?;
            ood += 1;
        }
    }
    if violations > 0 {
        return Err(format!("{violations} first-half violations over {ood} records"));
    }
    Ok(format!("18000 git, 1500 lorem, 20 templates, {ood} first-half records with 0 violations"))
}

fn with_workers<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().expect("thread pool").install(f)
}

fn determinism() -> Outcome {
    let corpora = |spec: &GenSpec| to_jsonl(&gen_records(spec).expect("feasible"), Some(&spec.describe()));
    let mut checked = 0;
    for task in [TaskKind::NLFirst, TaskKind::UB, TaskKind::NF, TaskKind::WordReverse] {
        let spec = GenSpec::new(task, Lengths::Uniform { min: 4, max: 60 }, 1500, 3);
        if with_workers(1, || corpora(&spec)) != with_workers(8, || corpora(&spec)) {
            return Err(format!("{task} corpus differs between 1 and 8 workers"));
        }
        checked += 1;
    }
    let git = |n| with_workers(n, || to_jsonl(&gen_git_histories(&[10, 25], &[3, 4], 500), None));
    let lorem = |n| {
        let spec = LoremSpec { count: 300, ..LoremSpec::default() };
        with_workers(n, || to_jsonl(&gen_lorem(&spec, &whitespace_tokenizer), None))
    };
    if git(1) != git(8) || lorem(1) != lorem(8) {
        return Err("git or lorem corpus differs between 1 and 8 workers".into());
    }
    let report = |n| {
        with_workers(n, || {
            serde_json::to_string(&verify_program(TaskKind::UR, &[(4, 50), (51, 100)], 500, 3).expect("verifies"))
                .expect("serializes")
        })
    };
    if report(1) != report(8) {
        return Err("verification report differs between 1 and 8 workers".into());
    }
    Ok(format!("{} corpora and 1 verification report byte-identical at 1 and 8 workers", checked + 2))
}

fn negative_verify() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_crasp-kit");
    for task in [TaskKind::NLLast, TaskKind::NRLast, TaskKind::NF, TaskKind::NB] {
        if !matches!(verify_program(task, &BINS, 10, 3), Err(VerifyError::NotExpressible { .. })) {
            return Err(format!("{task}: library did not refuse"));
        }
        let o = Command::new(bin).args(["verify", "--task", task.name()]).output().map_err(|e| e.to_string())?;
        let stderr = String::from_utf8_lossy(&o.stderr);
        if o.status.code() != Some(1) || !stderr.contains("not expressible") {
            return Err(format!("{task}: exit {:?}, stderr {stderr}", o.status.code()));
        }
    }
    Ok("NLLast, NRLast, NF, NB refused as not expressible".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("retrieval programs match the oracles", retrieval_equivalence),
        ("copy programs match the oracles", copy_constructions),
        ("golden example tables", golden_tables),
        ("worked alignment example", worked_alignment),
        ("alignment optimality", alignment_optimality),
        ("mirror symmetry", mirror_symmetry),
        ("dataset contracts", dataset_contracts),
        ("determinism across worker counts", determinism),
        ("negative verify paths", negative_verify),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
