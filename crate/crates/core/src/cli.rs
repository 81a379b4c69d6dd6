//! Command-line front end. Every subcommand is a pure function of its
//! inputs, flags and seed.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use crasp_kit::crasp::{evaluate, Runner};
use crasp_kit::datasets::git::gen_git_histories;
use crasp_kit::datasets::lorem::{char_tokenizer, gen_lorem, whitespace_tokenizer, LoremSpec, Tokenizer};
use crasp_kit::datasets::prompt::{render_prompt, FewShot, PromptError, PromptTemplate, SepMode, TemplateKind};
use crasp_kit::datasets::{self, read_records, write_records, DatasetRecord, GenError, GenSpec, Lengths, RecordError, Split};
use crasp_kit::glitch::{analyze, parse_predictions, score_outputs, Scoring, Summary, TransitionReport};
use crasp_kit::programs::{render_reports, verify_exhaustive, verify_program, VerificationReport, VerifyError, BUNDLED, DEFAULT_BINS};
use crasp_kit::symbol::{detokenize, tokenize};
use crasp_kit::{Alphabet, Next, Program, TaskKind};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "crasp-kit", version, about = "C-RASP programs, task oracles, datasets and copy-error analysis")]
pub struct Cli {
    /// Plain-text `key = value` file supplying flag defaults; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads (outputs do not depend on this).
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a record file (retrieval, copy, WordReverse, git or lorem).
    Gen(GenArgs),
    /// Check reference programs against the oracles.
    Verify(VerifyArgs),
    /// Evaluate a program on one input.
    Run(RunArgs),
    /// Render few-shot prompts for records.
    Prompt(PromptArgs),
    /// Align copies against their sources and classify transition points.
    Analyze(AnalyzeArgs),
    /// Exact-match accuracy of predictions per task and length bin.
    Score(ScoreArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Task name (UL, UR, NLFirst, ..., UF, UB, WordReverse), `git` or `lorem`.
    #[arg(long)]
    pub task: String,
    /// Lengths: a list `10,20,30` (count per length) or a range `4:100` (count total).
    #[arg(long)]
    pub lengths: Option<String>,
    /// Records per length, per range, per (depth, seed) cell or paragraphs in total.
    #[arg(long, default_value_t = 1500)]
    pub count: usize,
    /// Base seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Split label stored on each record.
    #[arg(long, default_value = "test")]
    pub split: String,
    /// Place every query occurrence in the first half of the context.
    #[arg(long)]
    pub first_half_ood: bool,
    /// Alphabet as a string of single-character symbols.
    #[arg(long)]
    pub alphabet: Option<String>,
    /// Alphabet of this many symbols (default symbols, then u062, u063, ...).
    #[arg(long, conflicts_with = "alphabet")]
    pub alphabet_size: Option<usize>,
    /// Token between context and query; empty for none.
    #[arg(long, default_value = "||")]
    pub separator: String,
    /// Token closing a copy source.
    #[arg(long, default_value = ">")]
    pub delimiter: String,
    /// Upper bound on source plus target length for copy records.
    #[arg(long)]
    pub combined_cap: Option<usize>,
    /// Word separator for WordReverse.
    #[arg(long, default_value = "|")]
    pub word_separator: String,
    /// Longest word for WordReverse.
    #[arg(long, default_value_t = 4)]
    pub max_word: usize,
    /// Git history depths.
    #[arg(long, default_value = "10,15,20,25")]
    pub depths: String,
    /// Number of git seeds, counted up from --seed.
    #[arg(long, default_value_t = 3)]
    pub seeds: u64,
    /// Lorem sentences per paragraph before truncation.
    #[arg(long, default_value_t = 45)]
    pub sentences: usize,
    /// Lorem token budget.
    #[arg(long, default_value_t = 500)]
    pub budget: usize,
    /// Tokenizer for the lorem budget: whitespace or chars.
    #[arg(long, default_value = "whitespace")]
    pub tokenizer: String,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Task to verify.
    #[arg(long, required_unless_present = "all_expressible")]
    pub task: Option<String>,
    /// Verify every task that has a reference program.
    #[arg(long)]
    pub all_expressible: bool,
    /// Length bins `min:max,min:max`.
    #[arg(long)]
    pub bins: Option<String>,
    /// Sampled instances per bin.
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    /// Sampling seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Check every valid instance of this length instead of sampling.
    #[arg(long, value_name = "LENGTH")]
    pub exhaustive: Option<usize>,
    /// Alphabet size for --exhaustive.
    #[arg(long, default_value_t = 4)]
    pub alphabet_size: usize,
    /// Write the reports as JSON to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Program file.
    #[arg(long)]
    pub program: PathBuf,
    /// Whitespace-separated input tokens, e.g. "<bos> a b <sep> a".
    #[arg(long)]
    pub input: String,
    /// Print every operation's value at every position.
    #[arg(long)]
    pub trace: bool,
    /// Most tokens to generate.
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
}

#[derive(Args, Debug)]
pub struct PromptArgs {
    /// Records to prompt for.
    #[arg(long)]
    pub records: PathBuf,
    /// Demonstration pool; defaults to --records.
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// SEP or NOSEP; both when omitted.
    #[arg(long = "sep-mode")]
    pub sep_mode: Option<String>,
    /// SMALL or SAME; both when omitted.
    #[arg(long)]
    pub fewshot: Option<String>,
    /// BARE, SIMPLE_RULE, SIMPLE_RULE_EXPLAINED, MATH_RULE or MATH_RULE_EXPLAINED; all when omitted.
    #[arg(long)]
    pub template: Option<String>,
    /// Demonstrations per prompt.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Demonstration sampling seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Record file; each record's target is the source to be copied.
    #[arg(long, requires = "predictions")]
    pub records: Option<PathBuf>,
    /// Predictions file (`{"id": ..., "output": ...}` per line).
    #[arg(long, requires = "records")]
    pub predictions: Option<PathBuf>,
    /// A single source text (instead of files).
    #[arg(long, conflicts_with = "records", requires = "out_text")]
    pub src: Option<String>,
    /// A single output text to compare with --src.
    #[arg(long = "out-text", conflicts_with = "records", requires = "src")]
    pub out_text: Option<String>,
    /// whitespace, chars, or json (each text is a JSON array of tokens).
    #[arg(long, default_value = "whitespace")]
    pub tokenizer: String,
    /// Alignment scores `match,mismatch,gap`.
    #[arg(long, default_value = "1,-1,-1", allow_hyphen_values = true)]
    pub scoring: String,
    /// Per-pair report file (JSON lines).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Summary as JSON to this file.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    /// Record file with reference targets.
    #[arg(long)]
    pub records: PathBuf,
    /// Predictions file.
    #[arg(long)]
    pub preds: PathBuf,
    /// Length bins `min:max,...`; one bin per length when omitted.
    #[arg(long)]
    pub bins: Option<String>,
    /// Table as JSON to this file.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

/// Misuse of flags or inputs detectable before any work is done.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Usage(msg.into()).into()
}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Usage>() {
            return EXIT_USAGE;
        }
        if let Some(g) = cause.downcast_ref::<GenError>() {
            if matches!(g, GenError::InfeasibleSpec(_)) {
                return EXIT_USAGE;
            }
        }
        if let Some(RecordError::Io { .. }) = cause.downcast_ref::<RecordError>() {
            return EXIT_IO;
        }
        if cause.is::<io::Error>() {
            return EXIT_IO;
        }
    }
    EXIT_FAILURE
}

const SUBCOMMANDS: [&str; 6] = ["gen", "verify", "run", "prompt", "analyze", "score"];

/// Splices `key = value` lines from a `--config` file in right after the
/// subcommand. Keys also given as flags on the command line are dropped.
pub fn expand_config(args: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    let mut i = 0;
    while i < args.len() {
        if args[i] == "--config" {
            path = args.get(i + 1).cloned();
        } else if let Some(p) = args[i].strip_prefix("--config=") {
            path = Some(p.to_string());
        }
        i += 1;
    }
    let Some(path) = path else { return Ok(args) };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config file {path}"))?;
    let mut extra = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{path}:{}: expected `key = value`", n + 1)))?;
        let key = format!("--{}", k.trim().replace('_', "-"));
        let given = args.iter().any(|a| *a == key || a.starts_with(&format!("{key}=")));
        if given {
            continue;
        }
        match v.trim() {
            "true" => extra.push(key),
            "false" => {}
            v => {
                extra.push(key);
                extra.push(v.trim_matches('"').to_string());
            }
        }
    }
    let at = args
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.as_str()))
        .map_or(args.len(), |p| p + 1);
    let mut out = args[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

pub fn run(cli: Cli) -> Result<u8> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(usage("--workers must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker pool")?;
    }
    match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Run(a) => cmd_run(a),
        Command::Prompt(a) => cmd_prompt(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Score(a) => cmd_score(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|p| p.trim().parse().map_err(|_| usage(format!("bad {what} '{p}'"))))
        .collect()
}

pub fn parse_bins(text: &str) -> Result<Vec<(usize, usize)>> {
    text.split(',')
        .map(|b| {
            let (lo, hi) = b.trim().split_once(':').ok_or_else(|| usage(format!("bin '{b}' is not min:max")))?;
            let lo: usize = lo.parse().map_err(|_| usage(format!("bad bin bound '{lo}'")))?;
            let hi: usize = hi.parse().map_err(|_| usage(format!("bad bin bound '{hi}'")))?;
            if lo > hi {
                return Err(usage(format!("bin {lo}:{hi} is empty")));
            }
            Ok((lo, hi))
        })
        .collect()
}

fn lorem_tokenizer(name: &str) -> Result<&'static Tokenizer> {
    match name {
        "whitespace" => Ok(&whitespace_tokenizer),
        "chars" => Ok(&char_tokenizer),
        other => Err(usage(format!("unknown tokenizer '{other}' (whitespace or chars)"))),
    }
}

fn cmd_gen(a: GenArgs) -> Result<u8> {
    let out = a.out.as_deref();
    let (records, config) = match a.task.to_ascii_lowercase().as_str() {
        "git" => {
            let depths: Vec<usize> = parse_list(&a.depths, "depth")?;
            let seeds: Vec<u64> = (a.seed..a.seed + a.seeds).collect();
            let config = json!({"task": "git", "depths": depths, "seeds": seeds, "count": a.count});
            (gen_git_histories(&depths, &seeds, a.count), config)
        }
        "lorem" => {
            let spec = LoremSpec {
                count: a.count,
                seed: a.seed,
                sentence_target: a.sentences,
                token_budget: a.budget,
                ..LoremSpec::default()
            };
            let tokenizer = lorem_tokenizer(&a.tokenizer)?;
            let mut config = spec.describe();
            config["tokenizer"] = json!(a.tokenizer);
            (gen_lorem(&spec, tokenizer), config)
        }
        _ => {
            let task: TaskKind = a.task.parse().map_err(|e| usage(format!("{e}")))?;
            let lengths: Lengths = a
                .lengths
                .as_deref()
                .ok_or_else(|| usage(format!("--lengths is required for {task}")))?
                .parse::<Lengths>()
                .map_err(|e| usage(e.to_string()))?;
            let mut spec = GenSpec::new(task, lengths, a.count, a.seed);
            spec.split = a.split.parse::<Split>().map_err(|e| usage(e.to_string()))?;
            spec.first_half_ood = a.first_half_ood;
            if let Some(chars) = &a.alphabet {
                spec.alphabet = Alphabet::from_chars(chars);
            } else if let Some(n) = a.alphabet_size {
                spec.alphabet = Alphabet::extended(n);
            }
            spec.separator = a.separator;
            spec.delimiter = a.delimiter;
            spec.combined_cap = a.combined_cap;
            spec.word_separator = a.word_separator;
            spec.max_word = a.max_word;
            (datasets::generate(&spec)?, spec.describe())
        }
    };
    match out {
        Some(p) => write_records(p, &records, Some(&config))?,
        None => emit(None, &datasets::records::to_jsonl(&records, Some(&config)))?,
    }
    eprintln!("{} records", records.len());
    Ok(EXIT_OK)
}

fn cmd_verify(a: VerifyArgs) -> Result<u8> {
    let tasks: Vec<TaskKind> = if a.all_expressible {
        BUNDLED.iter().map(|(t, _, _)| *t).collect()
    } else {
        let name = a.task.as_deref().expect("clap enforces --task");
        vec![name.parse().map_err(|e| usage(format!("{e}")))?]
    };
    let bins = match &a.bins {
        Some(b) => parse_bins(b)?,
        None => DEFAULT_BINS.to_vec(),
    };
    let mut reports: Vec<VerificationReport> = Vec::new();
    for task in tasks {
        let result = match a.exhaustive {
            Some(len) => verify_exhaustive(task, &first_symbols(a.alphabet_size), len),
            None => verify_program(task, &bins, a.samples, a.seed),
        };
        match result {
            Ok(r) => reports.push(r),
            Err(e @ VerifyError::NotExpressible { .. }) => {
                eprintln!("{e}");
                return Ok(EXIT_FAILURE);
            }
            Err(e @ VerifyError::InvalidBin { .. }) => return Err(usage(e.to_string())),
            Err(e) => return Err(e.into()),
        }
    }
    print!("{}", render_reports(&reports));
    for r in &reports {
        eprintln!("{}: {:.2?}", r.task, r.elapsed);
    }
    if let Some(p) = &a.report {
        let text = serde_json::to_string_pretty(&reports)? + "\n";
        fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(if reports.iter().all(VerificationReport::passes) { EXIT_OK } else { EXIT_FAILURE })
}

/// The first `n` symbols of the (extended) default alphabet.
fn first_symbols(n: usize) -> Alphabet {
    Alphabet::new(Alphabet::extended(n).symbols()[..n].iter().cloned())
}

fn cmd_run(a: RunArgs) -> Result<u8> {
    let text = fs::read_to_string(&a.program).with_context(|| format!("reading {}", a.program.display()))?;
    let program = match Program::parse(&text) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{}: {e}", a.program.display());
            return Ok(EXIT_FAILURE);
        }
    };
    let input = tokenize(&a.input);
    if a.trace {
        let v = evaluate(&program, &input)?;
        print!("{}", v.table(&input, true));
    }
    let mut runner = Runner::new(&program)?;
    runner.extend(&input)?;
    let mut generated = Vec::new();
    while generated.len() < a.steps {
        match runner.next()? {
            Next::Token(t) => {
                runner.push(&t)?;
                generated.push(t);
            }
            Next::Halt => break,
        }
    }
    println!("{}", detokenize(&generated));
    Ok(EXIT_OK)
}

fn cmd_prompt(a: PromptArgs) -> Result<u8> {
    let (_, records) = read_records(&a.records)?;
    let pool = match &a.pool {
        Some(p) => read_records(p)?.1,
        None => records.clone(),
    };
    let sep: Option<SepMode> = a.sep_mode.as_deref().map(str::parse).transpose().map_err(usage)?;
    let few: Option<FewShot> = a.fewshot.as_deref().map(str::parse).transpose().map_err(usage)?;
    let tk: Option<TemplateKind> = a.template.as_deref().map(str::parse).transpose().map_err(usage)?;
    let templates: Vec<PromptTemplate> = PromptTemplate::grid(a.k)
        .into_iter()
        .filter(|t| sep.is_none_or(|s| s == t.separator))
        .filter(|t| few.is_none_or(|f| f == t.fewshot))
        .filter(|t| tk.is_none_or(|k| k == t.template))
        .collect();
    let cells: Vec<(&DatasetRecord, &PromptTemplate)> =
        records.iter().flat_map(|r| templates.iter().map(move |t| (r, t))).collect();
    let rendered: Vec<Result<String, PromptError>> = cells
        .par_iter()
        .map(|(r, t)| {
            render_prompt(t, r, &pool, a.seed).map(|prompt| {
                json!({"id": r.id, "template": t.name(), "prompt": prompt, "target": r.target}).to_string()
            })
        })
        .collect();
    let mut text = String::new();
    let mut skipped = 0usize;
    for (line, (r, t)) in rendered.into_iter().zip(&cells) {
        match line {
            Ok(l) => {
                text.push_str(&l);
                text.push('\n');
            }
            Err(PromptError::PoolTooSmall { needed, available }) => {
                skipped += 1;
                if skipped <= 5 {
                    eprintln!("{} under {}: pool has {available} eligible demonstrations, need {needed}", r.id, t.name());
                }
            }
            Err(e) => return Err(anyhow!("{}: {e}", r.id)),
        }
    }
    emit(a.out.as_deref(), &text)?;
    if skipped > 0 {
        eprintln!("skipped {skipped} prompts with too few demonstrations");
    }
    Ok(EXIT_OK)
}

fn split_tokens(text: &str, tokenizer: &str) -> Result<Vec<String>> {
    match tokenizer {
        "whitespace" => Ok(whitespace_tokenizer(text)),
        "chars" => Ok(char_tokenizer(text)),
        "json" => serde_json::from_str(text).context("text is not a JSON array of strings"),
        other => Err(usage(format!("unknown tokenizer '{other}' (whitespace, chars or json)"))),
    }
}

fn cmd_analyze(a: AnalyzeArgs) -> Result<u8> {
    let scoring: Scoring = a.scoring.parse().map_err(usage)?;
    if !["whitespace", "chars", "json"].contains(&a.tokenizer.as_str()) {
        return Err(usage(format!("unknown tokenizer '{}' (whitespace, chars or json)", a.tokenizer)));
    }
    let pairs: Vec<(String, String, String)> = match (&a.records, &a.predictions, &a.src, &a.out_text) {
        (Some(r), Some(p), _, _) => {
            let (_, records) = read_records(r)?;
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let preds = parse_predictions(&text)?;
            let mut by_id = std::collections::HashMap::new();
            for (id, out) in &preds {
                if by_id.insert(id.as_str(), out.as_str()).is_some() {
                    bail!(crasp_kit::glitch::ScoreError::DuplicatePredictionKey(id.clone()));
                }
            }
            let mut missing = 0;
            let pairs = records
                .iter()
                .filter_map(|rec| match by_id.get(rec.id.as_str()) {
                    Some(out) => Some((rec.id.clone(), rec.target.clone(), out.to_string())),
                    None => {
                        missing += 1;
                        eprintln!("no prediction for {}", rec.id);
                        None
                    }
                })
                .collect();
            if missing > 0 {
                eprintln!("{missing} records have no prediction");
            }
            pairs
        }
        (_, _, Some(s), Some(o)) => vec![("pair".to_string(), s.clone(), o.clone())],
        _ => return Err(usage("give --records with --predictions, or --src with --out-text")),
    };
    let reports: Vec<(String, TransitionReport)> = pairs
        .par_iter()
        .map(|(id, src, out)| {
            let s = split_tokens(src, &a.tokenizer).with_context(|| format!("{id}: source"))?;
            let o = split_tokens(out, &a.tokenizer).with_context(|| format!("{id}: output"))?;
            Ok((id.clone(), analyze(&s, &o, &scoring)))
        })
        .collect::<Result<_>>()?;
    let summary: Summary = reports.iter().map(|(_, r)| Summary::of(r)).sum();
    let mut lines = String::new();
    for (id, r) in &reports {
        lines.push_str(&json!({"id": id, "report": r}).to_string());
        lines.push('\n');
    }
    match &a.report {
        Some(p) => fs::write(p, &lines).with_context(|| format!("writing {}", p.display()))?,
        None if a.src.is_some() => print!("{lines}"),
        None => {}
    }
    if let Some(p) = &a.summary {
        let mut v = serde_json::to_value(summary)?;
        v["ambiguous_ratio"] = json!(summary.ambiguous_ratio());
        v["scoring"] = serde_json::to_value(scoring)?;
        v["tokenizer"] = json!(a.tokenizer);
        fs::write(p, serde_json::to_string_pretty(&v)? + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    print!("{}", summary.table());
    Ok(EXIT_OK)
}

fn cmd_score(a: ScoreArgs) -> Result<u8> {
    let (_, records) = read_records(&a.records)?;
    let text = fs::read_to_string(&a.preds).with_context(|| format!("reading {}", a.preds.display()))?;
    let preds = parse_predictions(&text)?;
    let bins = a.bins.as_deref().map(parse_bins).transpose()?;
    let table = score_outputs(&records, &preds, bins.as_deref())?;
    print!("{}", table.render());
    if let Some(p) = &a.json {
        fs::write(p, serde_json::to_string_pretty(&table)? + "\n").with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(EXIT_OK)
}
