//! Concrete syntax: lexing, parsing, name resolution, macro expansion and
//! printing.
//!
//! ```text
//! base nat, product;
//! type T = lin !x:nat. end;
//! proc Send(v) = new a b : T (a!v. 0 | b?y. 0);
//! main = (assume ok(1)) Send(1) | assert ok(1). 0;
//! ```

mod diagnostic;
mod grammar;
mod lexer;
mod pretty;
mod program;

pub use diagnostic::{Diagnostic, Severity};
pub use grammar::{is_keyword, KEYWORDS};
pub use lexer::{is_ident_continue, is_ident_start};
pub use pretty::{print_formula, print_process, print_program, print_type};
pub use program::{parse_context, parse_program, ExpandError, Macro, Program};
