//! C-RASP interpreter, task oracles, reference programs, dataset generators
//! and copy-error analysis.

pub mod crasp;
pub mod datasets;
pub mod glitch;
pub mod oracles;
pub mod programs;
pub mod symbol;

pub use crasp::{generate, next_token, Next, Program};
pub use oracles::TaskKind;
pub use symbol::{Alphabet, Symbol};
