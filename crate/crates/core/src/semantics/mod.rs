//! Operational semantics: heating to canonical form, reduction, and the
//! assert-safety analysis.
//!
//! ```
//! use linsess::semantics::{run, Policy, Verdict};
//! use linsess::syntax::{Formula, Process};
//!
//! let a = Formula::atom("A", vec![]);
//! let p = Process::assume(a.clone(), Process::assert(a, Process::Inact));
//! let trace = run(&p, 10, &mut Policy::Leftmost);
//! assert_eq!(trace.verdict, Verdict::TerminatedClean);
//! ```

mod canonical;
mod reduce;
mod safety;
mod trace;

pub use canonical::{assert_chain, canonicalize, CanonicalProcess, Restriction};
pub use reduce::{describe, find_redexes, fire, reduce_step, Policy, Redex, RedexKind};
pub use safety::{
    check_safety, enumerate_canonical_forms, is_safe_canonical, SafetyReport, Witness,
};
pub use trace::{run, Step, Trace, Unmatched, Verdict};
