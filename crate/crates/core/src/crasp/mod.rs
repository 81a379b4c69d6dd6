//! The C-RASP language: syntax, validation and evaluation.

pub mod ast;
mod error;
pub mod eval;
mod parse;
pub mod program;
pub mod stream;

pub use ast::{Definition, Expr, NextDirective, Source, ValueKind, Window};
pub use error::{Diagnostic, EvalError, ParseError, ParseErrorKind};
pub use eval::{evaluate, Valuation};
pub use parse::parse_source;
pub use program::{
    validate_program, CountWindow, LocalPredicate, Op, OpId, Operation, PeriodicPredicate, Program,
};
pub use stream::Runner;

use crate::symbol::Symbol;

/// Outcome of the next-token rule at the last position of a prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Next {
    Token(Symbol),
    Halt,
}

/// The token `p` emits after reading `prefix`.
pub fn next_token(p: &Program, prefix: &[Symbol]) -> Result<Next, EvalError> {
    let mut r = Runner::new(p)?;
    r.extend(prefix)?;
    r.next()
}

/// Feeds `prefix`, then appends emitted tokens until the program halts.
///
/// At most `max_steps` tokens are emitted; if the program still wants to
/// continue after that, the partial output is returned inside the error.
pub fn generate(p: &Program, prefix: &[Symbol], max_steps: usize) -> Result<Vec<Symbol>, EvalError> {
    let mut r = Runner::new(p)?;
    r.extend(prefix)?;
    continue_generation(&mut r, max_steps)
}

/// Like [`generate`] but starting from an already-fed runner.
pub fn continue_generation(r: &mut Runner<'_>, max_steps: usize) -> Result<Vec<Symbol>, EvalError> {
    let mut out = Vec::new();
    loop {
        match r.next()? {
            Next::Halt => return Ok(out),
            Next::Token(t) => {
                if out.len() == max_steps {
                    return Err(EvalError::StepBudgetExceeded { max_steps, generated: out });
                }
                r.push(&t)?;
                out.push(t);
            }
        }
    }
}
