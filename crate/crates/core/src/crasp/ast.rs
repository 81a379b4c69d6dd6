//! Surface syntax tree of the program text format.
//!
//! The tree keeps the sugar forms (`OR`, `EXISTS`) so that sources can be
//! rendered back in the shape they were written; lowering to the core
//! operation set happens in [`super::program`].

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::symbol::Symbol;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ValueKind {
    Bool,
    Count,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ValueKind::Bool => "bool",
            ValueKind::Count => "count",
        })
    }
}

/// Range of `j <= i` positions a counting operation looks at.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Window {
    /// Every `j <= i` (the always-true predicate).
    All,
    /// Only `j` with `i - j` in the set.
    Dist(BTreeSet<i64>),
}

#[derive(Clone, Debug)]
pub enum Expr {
    Ref { name: String, column: usize },
    Initial(Symbol),
    True,
    One,
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Pos { period: i64, residues: BTreeSet<i64> },
    Le(Box<Expr>, Box<Expr>),
    Count { window: Window, arg: Box<Expr> },
    Exists { window: Window, arg: Box<Expr> },
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn name(name: impl Into<String>) -> Expr {
        Expr::Ref { name: name.into(), column: 0 }
    }

    pub fn q(symbol: impl Into<Symbol>) -> Expr {
        Expr::Initial(symbol.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(x: Expr) -> Expr {
        Expr::Not(Box::new(x))
    }

    pub fn and(x: Expr, y: Expr) -> Expr {
        Expr::And(Box::new(x), Box::new(y))
    }

    pub fn or(x: Expr, y: Expr) -> Expr {
        Expr::Or(Box::new(x), Box::new(y))
    }

    /// Balanced disjunction of `terms`; `None` when empty.
    pub fn any(mut terms: Vec<Expr>) -> Option<Expr> {
        match terms.len() {
            0 => None,
            1 => terms.pop(),
            n => {
                let right = terms.split_off(n / 2);
                Some(Expr::or(Expr::any(terms)?, Expr::any(right)?))
            }
        }
    }

    pub fn le(x: Expr, y: Expr) -> Expr {
        Expr::Le(Box::new(x), Box::new(y))
    }

    pub fn count_all(arg: Expr) -> Expr {
        Expr::Count { window: Window::All, arg: Box::new(arg) }
    }

    pub fn count_dist(distances: impl IntoIterator<Item = i64>, arg: Expr) -> Expr {
        Expr::Count { window: Window::Dist(distances.into_iter().collect()), arg: Box::new(arg) }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(x: Expr, y: Expr) -> Expr {
        Expr::Add(Box::new(x), Box::new(y))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(x: Expr, y: Expr) -> Expr {
        Expr::Sub(Box::new(x), Box::new(y))
    }

    pub fn cond(c: Expr, x: Expr, y: Expr) -> Expr {
        Expr::If(Box::new(c), Box::new(x), Box::new(y))
    }

    /// `1 <= #[...] arg`, the core-syntax spelling of an existential.
    pub fn at_least_one(window: Window, arg: Expr) -> Expr {
        Expr::le(Expr::One, Expr::Count { window, arg: Box::new(arg) })
    }

    fn render(&self, out: &mut String) {
        match self {
            Expr::Ref { name, .. } => out.push_str(name),
            Expr::Initial(s) => {
                out.push_str("Q(");
                render_symbol(s, out);
                out.push(')');
            }
            Expr::True => out.push_str("TRUE"),
            Expr::One => out.push_str("ONE"),
            Expr::Not(x) => call(out, "NOT", &[x]),
            Expr::And(x, y) => call(out, "AND", &[x, y]),
            Expr::Or(x, y) => call(out, "OR", &[x, y]),
            Expr::Pos { period, residues } => {
                let _ = write!(out, "POS(period={period}, residues=");
                render_set(residues, out);
                out.push(')');
            }
            Expr::Le(x, y) => call(out, "LE", &[x, y]),
            Expr::Count { window, arg } => {
                out.push_str("COUNT");
                render_window(window, out);
                call(out, "", &[arg]);
            }
            Expr::Exists { window, arg } => {
                out.push_str("EXISTS");
                render_window(window, out);
                call(out, "", &[arg]);
            }
            Expr::If(c, x, y) => call(out, "IF", &[c, x, y]),
            Expr::Add(x, y) => call(out, "ADD", &[x, y]),
            Expr::Sub(x, y) => call(out, "SUB", &[x, y]),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render(&mut s);
        f.write_str(&s)
    }
}

fn call(out: &mut String, head: &str, args: &[&Expr]) {
    out.push_str(head);
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        a.render(out);
    }
    out.push(')');
}

fn render_set(values: &BTreeSet<i64>, out: &mut String) {
    out.push('{');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{v}");
    }
    out.push('}');
}

fn render_window(window: &Window, out: &mut String) {
    match window {
        Window::All => out.push_str("[all]"),
        Window::Dist(d) => {
            out.push_str("[dist=");
            render_set(d, out);
            out.push(']');
        }
    }
}

pub(crate) fn render_symbol(symbol: &Symbol, out: &mut String) {
    out.push('\'');
    for c in symbol.as_str().chars() {
        if c == '\'' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('\'');
}

#[derive(Clone, Debug)]
pub struct Definition {
    pub kind: ValueKind,
    pub name: String,
    pub expr: Expr,
    pub line: usize,
}

#[derive(Clone, Debug)]
pub struct NextDirective {
    pub symbol: Symbol,
    pub target: String,
    pub line: usize,
    pub column: usize,
}

/// A parsed (or programmatically assembled) program text.
#[derive(Clone, Debug, Default)]
pub struct Source {
    /// Comment lines emitted at the top when rendering.
    pub header: Vec<String>,
    pub alphabet: Option<Vec<Symbol>>,
    pub definitions: Vec<Definition>,
    pub nexts: Vec<NextDirective>,
}

impl Source {
    pub fn define(&mut self, kind: ValueKind, name: impl Into<String>, expr: Expr) {
        let line = self.definitions.len() + 1;
        self.definitions.push(Definition { kind, name: name.into(), expr, line });
    }

    pub fn next(&mut self, symbol: Symbol, target: impl Into<String>) {
        let line = self.definitions.len() + self.nexts.len() + 1;
        self.nexts.push(NextDirective { symbol, target: target.into(), line, column: 0 });
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for h in &self.header {
            out.push_str("# ");
            out.push_str(h);
            out.push('\n');
        }
        if let Some(alphabet) = &self.alphabet {
            out.push_str("alphabet {");
            for (i, s) in alphabet.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                render_symbol(s, &mut out);
            }
            out.push_str("}\n");
        }
        for d in &self.definitions {
            let _ = write!(out, "{} {} := ", d.kind, d.name);
            d.expr.render(&mut out);
            out.push('\n');
        }
        if !self.nexts.is_empty() {
            out.push('\n');
        }
        for n in &self.nexts {
            out.push_str("next ");
            render_symbol(&n.symbol, &mut out);
            let _ = writeln!(out, " := {}", n.target);
        }
        out
    }
}
