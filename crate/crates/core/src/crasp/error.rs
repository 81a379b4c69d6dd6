use std::fmt;

use thiserror::Error;

use super::ast::ValueKind;
use crate::symbol::Symbol;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    DuplicateName(String),
    /// Also raised for self references and references to later lines.
    UndefinedName(String),
    DuplicateNext(Symbol),
}

/// A diagnostic pinned to a 1-based line and column of the program text.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn syntax(line: usize, column: usize, msg: String) -> Self {
        ParseError { line, column, kind: ParseErrorKind::Syntax(msg) }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: ", self.line, self.column)?;
        match &self.kind {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::DuplicateName(n) => write!(f, "operation '{n}' is defined twice"),
            ParseErrorKind::UndefinedName(n) => write!(
                f,
                "'{n}' is not defined on an earlier line (operations may only reference earlier operations)"
            ),
            ParseErrorKind::DuplicateNext(s) => write!(f, "next directive for {s:?} given twice"),
        }
    }
}

/// A violated program invariant, reported by validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    ForwardReference { op: String, referenced: usize },
    KindMismatch { op: String, argument: usize, expected: ValueKind, found: ValueKind },
    DeclaredKind { op: String, declared: ValueKind, actual: ValueKind },
    InvalidPeriod { op: String, period: i64 },
    InvalidResidue { op: String, residue: i64, period: i64 },
    InvalidDistance { op: String, distance: i64 },
    EmptyDistanceSet { op: String },
    UnknownSymbol { op: String, symbol: Symbol },
    NextTargetMissing { symbol: Symbol },
    NextTargetNotBoolean { symbol: Symbol, op: String },
    NextSymbolUnknown { symbol: Symbol },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::ForwardReference { op, referenced } => {
                write!(f, "{op}: references operation #{referenced}, which is not earlier in the program")
            }
            Diagnostic::KindMismatch { op, argument, expected, found } => {
                write!(f, "{op}: argument {argument} must be {expected}-valued, found {found}")
            }
            Diagnostic::DeclaredKind { op, declared, actual } => {
                write!(f, "{op}: declared {declared} but the expression is {actual}-valued")
            }
            Diagnostic::InvalidPeriod { op, period } => {
                write!(f, "{op}: period must be positive, got {period}")
            }
            Diagnostic::InvalidResidue { op, residue, period } => {
                write!(f, "{op}: residue {residue} outside [0, {period})")
            }
            Diagnostic::InvalidDistance { op, distance } => {
                write!(f, "{op}: invalid local predicate, distance {distance} is negative")
            }
            Diagnostic::EmptyDistanceSet { op } => write!(f, "{op}: empty distance set"),
            Diagnostic::UnknownSymbol { op, symbol } => {
                write!(f, "{op}: symbol {symbol:?} is not in the alphabet")
            }
            Diagnostic::NextTargetMissing { symbol } => {
                write!(f, "next {symbol:?}: target operation does not exist")
            }
            Diagnostic::NextTargetNotBoolean { symbol, op } => {
                write!(f, "next {symbol:?}: target '{op}' is not boolean-valued")
            }
            Diagnostic::NextSymbolUnknown { symbol } => {
                write!(f, "next {symbol:?}: symbol is not in the alphabet")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("program is invalid: {}", join(.0))]
    InvalidProgram(Vec<Diagnostic>),
    #[error("input position {position}: symbol {symbol:?} is not in the program alphabet")]
    UnknownSymbol { position: usize, symbol: Symbol },
    #[error("ambiguous next token: NEXT holds for {candidates:?}")]
    AmbiguousNext { candidates: Vec<Symbol> },
    #[error("generation did not halt within {max_steps} steps")]
    StepBudgetExceeded { max_steps: usize, generated: Vec<Symbol> },
}

fn join(diags: &[Diagnostic]) -> String {
    diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
