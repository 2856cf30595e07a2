//! Well-formedness: free variables of formulae, types and context entries
//! must be bound by what precedes them.

use std::collections::BTreeSet;

use super::error::{ErrorCode, TypeError};
use crate::syntax::{Context, Entry, Formula, Name, Type};

pub(crate) fn check_scoped(
    fv: &BTreeSet<Name>,
    dom: &BTreeSet<Name>,
    what: impl FnOnce() -> String,
) -> Result<(), TypeError> {
    let missing: Vec<&Name> = fv.iter().filter(|x| !dom.contains(*x)).collect();
    if missing.is_empty() {
        return Ok(());
    }
    let names: Vec<&str> = missing.iter().map(|s| s.as_str()).collect();
    Err(TypeError::new(
        ErrorCode::Wf,
        format!("{} mentions unbound {}", what(), names.join(", ")),
    ))
}

pub fn wf_formula(ctx: &Context, phi: &Formula) -> Result<(), TypeError> {
    check_scoped(&phi.free_vars(), &ctx.dom(), || format!("formula `{phi}`"))
}

pub fn wf_type(ctx: &Context, t: &Type) -> Result<(), TypeError> {
    check_scoped(&t.free_vars(), &ctx.dom(), || format!("type `{t}`"))
}

/// Each entry must be well formed with respect to its strict prefix.
pub fn wf_context(ctx: &Context) -> Result<(), TypeError> {
    let mut dom = BTreeSet::new();
    for e in &ctx.entries {
        check_scoped(&e.free_vars(), &dom, || format!("context entry `{e}`"))?;
        if let Entry::Binding(x, _) = e {
            dom.insert(x.clone());
        }
    }
    Ok(())
}
