//! Reference constructions for the expressible tasks and their verification.

mod build;
mod verify;

pub use build::build_source;
pub use verify::{
    render_reports, verify_exhaustive, verify_program, BinResult, Mismatch, VerificationReport, VerifyError,
    DEFAULT_BINS,
};

use crate::crasp::{ParseError, Program};
use crate::oracles::TaskKind;
use crate::symbol::Alphabet;

/// Bundled sources over the default 62-symbol alphabet, format version 1.
pub const BUNDLED: [(TaskKind, &str, &str); 6] = [
    (TaskKind::UL, "ul.crasp", include_str!("../../programs/v1/ul.crasp")),
    (TaskKind::UR, "ur.crasp", include_str!("../../programs/v1/ur.crasp")),
    (TaskKind::NLFirst, "nlfirst.crasp", include_str!("../../programs/v1/nlfirst.crasp")),
    (TaskKind::NRFirst, "nrfirst.crasp", include_str!("../../programs/v1/nrfirst.crasp")),
    (TaskKind::UF, "uf.crasp", include_str!("../../programs/v1/uf.crasp")),
    (TaskKind::UB, "ub.crasp", include_str!("../../programs/v1/ub.crasp")),
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expressibility {
    Expressible { source: &'static str },
    NotExpressible { note: &'static str },
}

impl Expressibility {
    pub fn is_expressible(&self) -> bool {
        matches!(self, Expressibility::Expressible { .. })
    }
}

pub fn not_expressible_note(task: TaskKind) -> Option<&'static str> {
    Some(match task {
        TaskKind::NLLast | TaskKind::NRLast => {
            "not expressible in C-RASP[pos]: a program for it would separate strings whose last marked \
             block is of one type from those where it is of the other, which reduces to recognising a \
             language known to lie outside C-RASP[pos]"
        }
        TaskKind::NF | TaskKind::NB => {
            "not expressible in C-RASP[pos]: copying a string with repeated symbols needs communication \
             linear in its length between the two halves of the input, while every C-RASP[pos] program \
             needs only logarithmic communication"
        }
        TaskKind::WordReverse => {
            "not expressible in C-RASP[pos]: with single-token words, word-order reversal is exactly \
             backward copying of an arbitrary string (NB), which is not expressible"
        }
        _ => return None,
    })
}

/// The bundled construction for `task`, or the reason none can exist.
pub fn program_for(task: TaskKind) -> Expressibility {
    match BUNDLED.iter().find(|(k, _, _)| *k == task) {
        Some((_, _, source)) => Expressibility::Expressible { source },
        None => Expressibility::NotExpressible { note: not_expressible_note(task).expect("every task is classified") },
    }
}

/// The construction for `task` over an arbitrary alphabet.
pub fn build_program(task: TaskKind, alphabet: &Alphabet) -> Result<Program, VerifyError> {
    let source = build_source(task, alphabet).ok_or_else(|| match not_expressible_note(task) {
        Some(note) => VerifyError::NotExpressible { task, note },
        None => VerifyError::EmptyAlphabet,
    })?;
    Program::from_source(&source).map_err(|e: ParseError| VerifyError::Construction(e.to_string()))
}
