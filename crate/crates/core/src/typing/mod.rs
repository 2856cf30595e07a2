//! Type checking for processes under linearly refined session types.
//!
//! [`typecheck`] is the algorithm used by the tool. [`reference_typecheck`]
//! searches the declarative rules directly and serves as a test oracle.

mod error;
mod reference;
mod split;
mod threaded;
mod wf;

pub use error::{ErrorCode, TypeError};
pub use reference::{reference_typecheck, FuelExhausted};
pub use split::{check_split, enumerate_splits};
pub use threaded::{
    check_process, check_value, context_update, prove_formula, typecheck, Slot, ThreadedContext,
};
pub use wf::{wf_context, wf_formula, wf_type};

use crate::parser::Program;

/// Expands process definitions and checks `main` against the declared
/// context (empty when none is given).
pub fn check_program(prog: &Program) -> Result<(), TypeError> {
    let main = prog
        .expand_macros()
        .map_err(|e| TypeError::new(ErrorCode::Wf, e.to_string()))?;
    typecheck(&prog.initial_context(), &main)
}
