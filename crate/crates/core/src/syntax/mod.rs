//! Abstract syntax of values, formulae, types, processes and contexts,
//! together with binding, substitution, equivalence and duality.

mod context;
mod equiv;
mod formula;
mod names;
mod process;
mod types;
mod value;

pub(crate) use context::cf_entry;
pub use context::{Context, Entry};
pub use equiv::type_equivalent;
pub use formula::{Atom, AtomBag, Formula};
pub use names::fresh;
pub use process::Process;
pub use types::{Direction, Qualifier, Type, TypeShapeError};
pub use value::{Constant, Literal, Name, Value, NAT, UNIT};
