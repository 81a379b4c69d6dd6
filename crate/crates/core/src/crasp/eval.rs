//! Whole-sequence evaluation: every operation at every position.

use std::fmt::Write as _;

use super::ast::ValueKind;
use super::error::EvalError;
use super::program::{CountWindow, Op, OpId, Program};
use crate::symbol::Symbol;

/// Per-operation values over positions `0..len`. Booleans are stored as 0/1.
#[derive(Clone, Debug)]
pub struct Valuation<'p> {
    program: &'p Program,
    columns: Vec<Vec<i64>>,
    len: usize,
}

impl<'p> Valuation<'p> {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn program(&self) -> &'p Program {
        self.program
    }

    pub fn column(&self, id: OpId) -> &[i64] {
        &self.columns[id.index()]
    }

    pub fn values(&self, name: &str) -> Option<&[i64]> {
        self.program.lookup(name).map(|id| self.column(id))
    }

    pub fn bools(&self, name: &str) -> Option<Vec<bool>> {
        let id = self.program.lookup(name)?;
        (self.program.op(id).op.kind() == ValueKind::Bool)
            .then(|| self.column(id).iter().map(|&v| v != 0).collect())
    }

    pub fn counts(&self, name: &str) -> Option<Vec<i64>> {
        let id = self.program.lookup(name)?;
        (self.program.op(id).op.kind() == ValueKind::Count).then(|| self.column(id).to_vec())
    }

    /// Symbols whose `NEXT` operation holds at `position`.
    pub fn next_candidates(&self, position: usize) -> Vec<Symbol> {
        self.program
            .next_ops()
            .iter()
            .filter(|(_, id)| self.column(*id)[position] != 0)
            .map(|(s, _)| s.clone())
            .collect()
    }

    /// Plain-text table with one row per operation (named ones only unless
    /// `all` is set) and one column per position.
    pub fn table(&self, input: &[Symbol], all: bool) -> String {
        let rows: Vec<(String, Vec<String>)> = self
            .program
            .ops()
            .iter()
            .enumerate()
            .filter(|(_, o)| all || o.is_named())
            .map(|(i, o)| {
                let cells = self.columns[i]
                    .iter()
                    .map(|&v| match o.op.kind() {
                        ValueKind::Bool => if v != 0 { "T".to_string() } else { ".".to_string() },
                        ValueKind::Count => v.to_string(),
                    })
                    .collect();
                (o.name.clone(), cells)
            })
            .collect();
        let head: Vec<String> = input.iter().map(ToString::to_string).collect();
        let name_w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(8);
        let cell_w: Vec<usize> = (0..self.len)
            .map(|p| {
                rows.iter()
                    .map(|r| r.1[p].len())
                    .chain(std::iter::once(head[p].chars().count()))
                    .max()
                    .unwrap_or(1)
            })
            .collect();
        let mut out = String::new();
        let _ = write!(out, "{:name_w$}", "position");
        for (p, w) in cell_w.iter().enumerate() {
            let _ = write!(out, " {:>w$}", p);
        }
        out.push('\n');
        let _ = write!(out, "{:name_w$}", "symbol");
        for (h, w) in head.iter().zip(&cell_w) {
            let _ = write!(out, " {:>w$}", h);
        }
        out.push('\n');
        for (name, cells) in rows {
            let _ = write!(out, "{:name_w$}", name);
            for (c, w) in cells.iter().zip(&cell_w) {
                let _ = write!(out, " {:>w$}", c);
            }
            out.push('\n');
        }
        out
    }
}

pub(crate) fn check_input(p: &Program, input: &[Symbol]) -> Result<(), EvalError> {
    if !p.is_valid() {
        return Err(EvalError::InvalidProgram(p.diagnostics().to_vec()));
    }
    for (position, s) in input.iter().enumerate() {
        if !p.alphabet().admits(s) {
            return Err(EvalError::UnknownSymbol { position, symbol: s.clone() });
        }
    }
    Ok(())
}

/// Evaluates every operation of `p` at every position of `input`.
///
/// This is the direct reading of the semantics: each operation's column is
/// computed from its arguments' columns, counting operations sum their
/// window explicitly.
pub fn evaluate<'p>(p: &'p Program, input: &[Symbol]) -> Result<Valuation<'p>, EvalError> {
    check_input(p, input)?;
    let n = input.len();
    let mut columns: Vec<Vec<i64>> = Vec::with_capacity(p.ops().len());
    for o in p.ops() {
        let col: Vec<i64> = {
            let c = |id: &OpId| &columns[id.index()];
            match &o.op {
                Op::Initial(s) => input.iter().map(|x| i64::from(x == s)).collect(),
                Op::True | Op::One => vec![1; n],
                Op::Not(x) => c(x).iter().map(|&v| i64::from(v == 0)).collect(),
                Op::And(x, y) => c(x).iter().zip(c(y)).map(|(&a, &b)| i64::from(a != 0 && b != 0)).collect(),
                Op::Positional(phi) => (0..n).map(|i| i64::from(phi.holds(i))).collect(),
                Op::Le(x, y) => c(x).iter().zip(c(y)).map(|(&a, &b)| i64::from(a <= b)).collect(),
                Op::Count { arg, window: CountWindow::All } => c(arg)
                    .iter()
                    .scan(0i64, |acc, &v| {
                        *acc += v;
                        Some(*acc)
                    })
                    .collect(),
                Op::Count { arg, window: CountWindow::Local(psi) } => {
                    let a = c(arg);
                    (0..n)
                        .map(|i| {
                            psi.distances
                                .iter()
                                .filter(|&&d| d >= 0 && (d as usize) <= i)
                                .map(|&d| a[i - d as usize])
                                .sum()
                        })
                        .collect()
                }
                Op::Cond { test, then, otherwise } => (0..n)
                    .map(|i| if c(test)[i] != 0 { c(then)[i] } else { c(otherwise)[i] })
                    .collect(),
                Op::Add(x, y) => c(x).iter().zip(c(y)).map(|(&a, &b)| a + b).collect(),
                Op::Sub(x, y) => c(x).iter().zip(c(y)).map(|(&a, &b)| a - b).collect(),
            }
        };
        columns.push(col);
    }
    Ok(Valuation { program: p, columns, len: n })
}
