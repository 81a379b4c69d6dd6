//! Program builders for the expressible tasks, parameterised by alphabet.
//!
//! Every construction shares one pipeline: a predecessor check `PRED_a`
//! (one step back), a bigram memory `CBIGRAM_a_b` (bigram "a b" seen at
//! some earlier position), and per-symbol output selectors `NEXT_a` that
//! look up the bigram keyed by the current symbol.

use crate::crasp::{Expr, Source, ValueKind};
use crate::oracles::TaskKind;
use crate::symbol::{Alphabet, Symbol};

/// Name fragment for a symbol inside operation names.
fn ident(alphabet: &Alphabet, s: &Symbol) -> String {
    if *s == Symbol::bos() {
        "BOS".into()
    } else if *s == Symbol::sep() {
        "SEP".into()
    } else if *s == Symbol::eos() {
        "EOS".into()
    } else if s.as_str().chars().all(|c| c.is_ascii_alphanumeric()) {
        s.as_str().to_string()
    } else {
        format!("s{}", alphabet.position(s).expect("alphabet symbol"))
    }
}

struct Builder<'a> {
    alphabet: &'a Alphabet,
    src: Source,
}

impl<'a> Builder<'a> {
    fn new(alphabet: &'a Alphabet, header: &[&str]) -> Self {
        let src = Source {
            header: header.iter().map(|h| h.to_string()).collect(),
            alphabet: Some(alphabet.symbols().to_vec()),
            ..Source::default()
        };
        Builder { alphabet, src }
    }

    fn id(&self, s: &Symbol) -> String {
        ident(self.alphabet, s)
    }

    fn pred(&self, a: &Symbol) -> String {
        format!("PRED_{}", self.id(a))
    }

    fn bigram(&self, a: &Symbol, b: &Symbol) -> String {
        format!("CBIGRAM_{}_{}", self.id(a), self.id(b))
    }

    fn next_name(&self, a: &Symbol) -> String {
        format!("NEXT_{}", self.id(a))
    }

    fn bool(&mut self, name: String, e: Expr) {
        self.src.define(ValueKind::Bool, name, e);
    }

    /// `ISLEFTMOST := OR_a [Q(a) AND #[j<=i] Q(a) <= 1]`.
    fn leftmost(&mut self) {
        let terms = self
            .alphabet
            .iter()
            .map(|a| Expr::and(Expr::q(a.clone()), Expr::le(Expr::count_all(Expr::q(a.clone())), Expr::One)))
            .collect();
        self.bool("ISLEFTMOST".into(), Expr::any(terms).expect("non-empty alphabet"));
    }

    /// `PRED_a := EXISTS[dist={1}](Q(a) AND gate)` for every `a` in `from`.
    fn preds(&mut self, from: &[Symbol], gate: Option<&str>) {
        for a in from {
            let arg = match gate {
                Some(g) => Expr::and(Expr::q(a.clone()), Expr::name(g)),
                None => Expr::q(a.clone()),
            };
            let name = self.pred(a);
            self.bool(name, Expr::le(Expr::One, Expr::count_dist([1], arg)));
        }
    }

    /// `CBIGRAM_a_b := EXISTS[all](Q(b) AND gate AND PRED_a)`.
    fn bigrams(&mut self, left: &[Symbol], right: &[Symbol], gate: Option<&str>) {
        for a in left {
            for b in right {
                let at_b = match gate {
                    Some(g) => Expr::and(Expr::q(b.clone()), Expr::name(g)),
                    None => Expr::q(b.clone()),
                };
                let name = self.bigram(a, b);
                let e = Expr::le(Expr::One, Expr::count_all(Expr::and(at_b, Expr::name(self.pred(a)))));
                self.bool(name, e);
            }
        }
    }

    /// `OR_sigma [Q(sigma) AND CBIGRAM]`, the bigram keyed by the current
    /// symbol `sigma` on the side given by `current_left`.
    fn lookup(&self, a: &Symbol, current: &[Symbol], current_left: bool) -> Vec<Expr> {
        current
            .iter()
            .map(|s| {
                let bg = if current_left { self.bigram(s, a) } else { self.bigram(a, s) };
                Expr::and(Expr::q(s.clone()), Expr::name(bg))
            })
            .collect()
    }

    fn finish(mut self, outputs: Vec<(Symbol, Expr)>) -> Source {
        for (a, e) in outputs {
            let name = self.next_name(&a);
            self.bool(name.clone(), e);
            self.src.next(a, name);
        }
        self.src
    }
}

/// Retrieval programs read `<bos> context <sep> query` and emit one token.
fn retrieval(kind: TaskKind, alphabet: &Alphabet) -> Source {
    let sigma = alphabet.symbols().to_vec();
    let (header, leftmost_pred, leftmost_bigram, current_left): (&[&str], bool, bool, bool) = match kind {
        TaskKind::UR => (&["UR: emit the token that follows the unique query in the context."], false, false, true),
        TaskKind::UL => (&["UL: emit the token that precedes the unique query in the context."], false, false, false),
        TaskKind::NRFirst => (
            &[
                "NRFirst: emit the token that follows the first query occurrence.",
                "Only bigrams whose left token is a first occurrence are remembered.",
            ],
            true,
            false,
            true,
        ),
        TaskKind::NLFirst => (
            &[
                "NLFirst: emit the token that precedes the first query occurrence.",
                "Only bigrams whose right token is a first occurrence are remembered.",
            ],
            false,
            true,
            false,
        ),
        _ => unreachable!("not a retrieval construction"),
    };
    let mut b = Builder::new(alphabet, header);
    if leftmost_pred || leftmost_bigram {
        b.leftmost();
    }
    b.preds(&sigma, leftmost_pred.then_some("ISLEFTMOST"));
    b.bigrams(&sigma, &sigma, leftmost_bigram.then_some("ISLEFTMOST"));
    let outputs = sigma
        .iter()
        .map(|a| (a.clone(), Expr::any(b.lookup(a, &sigma, current_left)).expect("non-empty alphabet")))
        .collect();
    b.finish(outputs)
}

/// Copy programs read `<bos> source <sep>` and emit the copy followed by an
/// end marker (`<sep>` forwards, `<bos>` backwards), then halt.
fn copy(kind: TaskKind, alphabet: &Alphabet) -> Source {
    let sigma = alphabet.symbols().to_vec();
    let (bos, sep) = (Symbol::bos(), Symbol::sep());
    let forward = kind == TaskKind::UF;
    let header: &[&str] = if forward {
        &[
            "UF: copy the source after <sep>, then emit <sep> and halt.",
            "Bigrams are only recorded inside the source; at <sep> the token after <bos> is retrieved.",
        ]
    } else {
        &[
            "UB: copy the source backwards after <sep>, then emit <bos> and halt.",
            "Bigrams are only recorded inside the source; at <sep> the token before <sep> is retrieved.",
        ]
    };
    let mut b = Builder::new(alphabet, header);
    b.bool("CTX".into(), Expr::not(Expr::le(Expr::One, Expr::count_all(Expr::q(sep.clone())))));
    let left: Vec<Symbol> = std::iter::once(bos.clone()).chain(sigma.iter().cloned()).collect();
    let right: Vec<Symbol> = sigma.iter().cloned().chain(std::iter::once(sep.clone())).collect();
    b.preds(&left, Some("CTX"));
    b.bigrams(&left, &right, None);
    let marker = if forward { sep.clone() } else { bos.clone() };
    b.bool(
        "DONE".into(),
        Expr::le(Expr::add(Expr::One, Expr::One), Expr::count_all(Expr::q(marker))),
    );
    let emitted = if forward { right } else { left };
    let outputs = emitted
        .iter()
        .map(|a| {
            let mut terms = b.lookup(a, &sigma, forward);
            let start = if forward { b.bigram(&bos, a) } else { b.bigram(a, &sep) };
            terms.push(Expr::and(Expr::q(sep.clone()), Expr::name(start)));
            let e = Expr::and(Expr::not(Expr::name("DONE")), Expr::any(terms).expect("non-empty"));
            (a.clone(), e)
        })
        .collect();
    b.finish(outputs)
}

/// Source of the construction for `kind` over `alphabet`, if one exists.
pub fn build_source(kind: TaskKind, alphabet: &Alphabet) -> Option<Source> {
    if alphabet.is_empty() {
        return None;
    }
    match kind {
        TaskKind::UL | TaskKind::UR | TaskKind::NLFirst | TaskKind::NRFirst => Some(retrieval(kind, alphabet)),
        TaskKind::UF | TaskKind::UB => Some(copy(kind, alphabet)),
        _ => None,
    }
}
