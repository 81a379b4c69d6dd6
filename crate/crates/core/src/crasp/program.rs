//! Core operation set and lowering from the surface syntax.

use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use super::ast::{Expr, Source, ValueKind, Window};
use super::error::{Diagnostic, ParseError, ParseErrorKind};
use super::parse::parse_source;
use super::stream::Compiled;
use crate::symbol::{Alphabet, Symbol};

/// Index of an operation within its program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpId(pub u32);

impl OpId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// `phi(i)` holds iff `i mod period` is an accepted residue.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PeriodicPredicate {
    pub period: i64,
    pub residues: BTreeSet<i64>,
}

impl PeriodicPredicate {
    pub fn holds(&self, position: usize) -> bool {
        self.period > 0 && self.residues.contains(&((position as i64) % self.period))
    }
}

/// `psi(i, j)` holds iff `i - j` is one of the listed distances.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LocalPredicate {
    pub distances: BTreeSet<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum CountWindow {
    All,
    Local(LocalPredicate),
}

/// One operation of the core set. Arguments always point at operations
/// earlier in the program.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Op {
    Initial(Symbol),
    Not(OpId),
    And(OpId, OpId),
    True,
    Positional(PeriodicPredicate),
    Le(OpId, OpId),
    Count { arg: OpId, window: CountWindow },
    Cond { test: OpId, then: OpId, otherwise: OpId },
    Add(OpId, OpId),
    Sub(OpId, OpId),
    One,
}

impl Op {
    pub fn kind(&self) -> ValueKind {
        match self {
            Op::Initial(_) | Op::Not(_) | Op::And(..) | Op::True | Op::Positional(_) | Op::Le(..) => {
                ValueKind::Bool
            }
            Op::Count { .. } | Op::Cond { .. } | Op::Add(..) | Op::Sub(..) | Op::One => ValueKind::Count,
        }
    }

    /// Arguments paired with the kind each must have.
    pub fn args(&self) -> Vec<(OpId, ValueKind)> {
        use ValueKind::{Bool, Count};
        match self {
            Op::Initial(_) | Op::True | Op::Positional(_) | Op::One => vec![],
            Op::Not(x) => vec![(*x, Bool)],
            Op::And(x, y) => vec![(*x, Bool), (*y, Bool)],
            Op::Le(x, y) | Op::Add(x, y) | Op::Sub(x, y) => vec![(*x, Count), (*y, Count)],
            Op::Count { arg, .. } => vec![(*arg, Bool)],
            Op::Cond { test, then, otherwise } => vec![(*test, Bool), (*then, Count), (*otherwise, Count)],
        }
    }
}

#[derive(Clone, Debug)]
pub struct Operation {
    /// Source name; lowered sub-expressions get `%<index>`.
    pub name: String,
    pub declared: Option<ValueKind>,
    pub op: Op,
}

impl Operation {
    pub fn is_named(&self) -> bool {
        !self.name.starts_with('%')
    }
}

/// A C-RASP[pos] program: operations `P_1..P_k` plus the `NEXT_a` map.
///
/// Programs are immutable; validation runs once at construction and its
/// diagnostics are kept alongside.
#[derive(Debug)]
pub struct Program {
    alphabet: Alphabet,
    ops: Vec<Operation>,
    next: Vec<(Symbol, OpId)>,
    names: HashMap<String, OpId>,
    diagnostics: Vec<Diagnostic>,
    compiled: OnceLock<Compiled>,
}

impl Clone for Program {
    fn clone(&self) -> Self {
        Program {
            alphabet: self.alphabet.clone(),
            ops: self.ops.clone(),
            next: self.next.clone(),
            names: self.names.clone(),
            diagnostics: self.diagnostics.clone(),
            compiled: OnceLock::new(),
        }
    }
}

impl Program {
    /// Builds a program from raw parts. Nothing is assumed about the parts;
    /// violations show up in [`Program::diagnostics`].
    pub fn from_parts(alphabet: Alphabet, ops: Vec<Operation>, next: Vec<(Symbol, OpId)>) -> Self {
        let names = ops
            .iter()
            .enumerate()
            .map(|(i, o)| (o.name.clone(), OpId(i as u32)))
            .collect();
        let mut p = Program { alphabet, ops, next, names, diagnostics: vec![], compiled: OnceLock::new() };
        p.diagnostics = p.compute_diagnostics();
        p
    }

    pub fn parse(text: &str) -> Result<Program, ParseError> {
        Program::from_source(&parse_source(text)?)
    }

    /// Resolves names and lowers sugar (`OR`, `EXISTS`) into the core set.
    pub fn from_source(source: &Source) -> Result<Program, ParseError> {
        Lowering::default().run(source)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn op(&self, id: OpId) -> &Operation {
        &self.ops[id.index()]
    }

    pub fn lookup(&self, name: &str) -> Option<OpId> {
        self.names.get(name).copied()
    }

    pub fn next_ops(&self) -> &[(Symbol, OpId)] {
        &self.next
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    pub fn is_valid(&self) -> bool {
        self.diagnostics.is_empty()
    }

    pub(crate) fn compiled(&self) -> &Compiled {
        self.compiled.get_or_init(|| Compiled::new(self))
    }

    fn compute_diagnostics(&self) -> Vec<Diagnostic> {
        let mut diags = Vec::new();
        for (i, o) in self.ops.iter().enumerate() {
            let name = || o.name.clone();
            for (argument, (arg, expected)) in o.op.args().into_iter().enumerate() {
                if arg.index() >= i {
                    diags.push(Diagnostic::ForwardReference { op: name(), referenced: arg.index() });
                    continue;
                }
                let found = self.ops[arg.index()].op.kind();
                if found != expected {
                    diags.push(Diagnostic::KindMismatch { op: name(), argument, expected, found });
                }
            }
            if let Some(declared) = o.declared {
                if declared != o.op.kind() {
                    diags.push(Diagnostic::DeclaredKind { op: name(), declared, actual: o.op.kind() });
                }
            }
            match &o.op {
                Op::Initial(s) if !self.alphabet.admits(s) => {
                    diags.push(Diagnostic::UnknownSymbol { op: name(), symbol: s.clone() });
                }
                Op::Positional(p) => {
                    if p.period <= 0 {
                        diags.push(Diagnostic::InvalidPeriod { op: name(), period: p.period });
                    } else {
                        for &r in &p.residues {
                            if r < 0 || r >= p.period {
                                diags.push(Diagnostic::InvalidResidue { op: name(), residue: r, period: p.period });
                            }
                        }
                    }
                }
                Op::Count { window: CountWindow::Local(l), .. } => {
                    if l.distances.is_empty() {
                        diags.push(Diagnostic::EmptyDistanceSet { op: name() });
                    }
                    for &d in &l.distances {
                        if d < 0 {
                            diags.push(Diagnostic::InvalidDistance { op: name(), distance: d });
                        }
                    }
                }
                _ => {}
            }
        }
        for (symbol, target) in &self.next {
            if !self.alphabet.admits(symbol) {
                diags.push(Diagnostic::NextSymbolUnknown { symbol: symbol.clone() });
            }
            match self.ops.get(target.index()) {
                None => diags.push(Diagnostic::NextTargetMissing { symbol: symbol.clone() }),
                Some(o) if o.op.kind() != ValueKind::Bool => diags.push(Diagnostic::NextTargetNotBoolean {
                    symbol: symbol.clone(),
                    op: o.name.clone(),
                }),
                Some(_) => {}
            }
        }
        diags
    }
}

/// Every diagnostic for `p`; empty iff all program invariants hold.
pub fn validate_program(p: &Program) -> Vec<Diagnostic> {
    p.diagnostics().to_vec()
}

#[derive(Default)]
struct Lowering {
    ops: Vec<Operation>,
    names: HashMap<String, OpId>,
    interned: HashMap<Op, OpId>,
    symbols: Vec<Symbol>,
}

impl Lowering {
    fn run(mut self, source: &Source) -> Result<Program, ParseError> {
        for def in &source.definitions {
            if self.names.contains_key(&def.name) {
                return Err(ParseError {
                    line: def.line,
                    column: 1,
                    kind: ParseErrorKind::DuplicateName(def.name.clone()),
                });
            }
            let op = self.lower_top(&def.expr, def.line)?;
            let id = OpId(self.ops.len() as u32);
            self.ops.push(Operation { name: def.name.clone(), declared: Some(def.kind), op });
            self.names.insert(def.name.clone(), id);
        }
        let mut next = Vec::with_capacity(source.nexts.len());
        for n in &source.nexts {
            if next.iter().any(|(s, _)| s == &n.symbol) {
                return Err(ParseError {
                    line: n.line,
                    column: 1,
                    kind: ParseErrorKind::DuplicateNext(n.symbol.clone()),
                });
            }
            let id = *self.names.get(&n.target).ok_or_else(|| ParseError {
                line: n.line,
                column: n.column,
                kind: ParseErrorKind::UndefinedName(n.target.clone()),
            })?;
            self.symbols.push(n.symbol.clone());
            next.push((n.symbol.clone(), id));
        }
        let alphabet = match &source.alphabet {
            Some(declared) => Alphabet::new(declared.iter().cloned()),
            None => Alphabet::new(self.symbols.iter().cloned()),
        };
        Ok(Program::from_parts(alphabet, self.ops, next))
    }

    fn intern(&mut self, op: Op) -> OpId {
        if let Some(&id) = self.interned.get(&op) {
            return id;
        }
        let id = OpId(self.ops.len() as u32);
        self.ops.push(Operation { name: format!("%{}", id.0), declared: None, op: op.clone() });
        self.interned.insert(op, id);
        id
    }

    fn operand(&mut self, e: &Expr, line: usize) -> Result<OpId, ParseError> {
        match e {
            Expr::Ref { name, column } => self.names.get(name).copied().ok_or_else(|| ParseError {
                line,
                column: *column,
                kind: ParseErrorKind::UndefinedName(name.clone()),
            }),
            _ => {
                let op = self.lower_top(e, line)?;
                Ok(self.intern(op))
            }
        }
    }

    /// Lowers `e` to a single (not yet interned) op; sub-expressions are interned.
    fn lower_top(&mut self, e: &Expr, line: usize) -> Result<Op, ParseError> {
        Ok(match e {
            Expr::Ref { column, .. } => {
                return Err(ParseError::syntax(line, *column, "expected an operation, found a name".into()))
            }
            Expr::Initial(s) => {
                self.symbols.push(s.clone());
                Op::Initial(s.clone())
            }
            Expr::True => Op::True,
            Expr::One => Op::One,
            Expr::Not(x) => Op::Not(self.operand(x, line)?),
            Expr::And(x, y) => Op::And(self.operand(x, line)?, self.operand(y, line)?),
            Expr::Or(x, y) => {
                let x = self.operand(x, line)?;
                let y = self.operand(y, line)?;
                let nx = self.intern(Op::Not(x));
                let ny = self.intern(Op::Not(y));
                let both = self.intern(Op::And(nx, ny));
                Op::Not(both)
            }
            Expr::Pos { period, residues } => {
                Op::Positional(PeriodicPredicate { period: *period, residues: residues.clone() })
            }
            Expr::Le(x, y) => Op::Le(self.operand(x, line)?, self.operand(y, line)?),
            Expr::Count { window, arg } => Op::Count { arg: self.operand(arg, line)?, window: lower_window(window) },
            Expr::Exists { window, arg } => {
                let arg = self.operand(arg, line)?;
                let count = self.intern(Op::Count { arg, window: lower_window(window) });
                let one = self.intern(Op::One);
                Op::Le(one, count)
            }
            Expr::If(c, x, y) => Op::Cond {
                test: self.operand(c, line)?,
                then: self.operand(x, line)?,
                otherwise: self.operand(y, line)?,
            },
            Expr::Add(x, y) => Op::Add(self.operand(x, line)?, self.operand(y, line)?),
            Expr::Sub(x, y) => Op::Sub(self.operand(x, line)?, self.operand(y, line)?),
        })
    }
}

fn lower_window(w: &Window) -> CountWindow {
    match w {
        Window::All => CountWindow::All,
        Window::Dist(d) => CountWindow::Local(LocalPredicate { distances: d.clone() }),
    }
}
