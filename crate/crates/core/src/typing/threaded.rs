//! The algorithmic checker.
//!
//! Instead of guessing context splits, a single context is threaded through
//! the derivation and linear entries are marked consumed when used. Entries
//! introduced inside a subterm are dropped when the subterm has been
//! checked; at that point any of them still linear and unconsumed is an
//! error. Leaf conditions `un(Γ)` on entries that outlive every subterm are
//! discharged once, on the final residual.

use std::collections::BTreeSet;

use serde::Serialize;

use super::error::{ErrorCode, TypeError};
use super::split::is_shared;
use super::wf::wf_context;
use crate::syntax::{
    cf_entry, fresh, type_equivalent, Atom, Context, Direction, Entry, Formula, Name, Process,
    Type, Value, NAT, UNIT,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Slot {
    pub entry: Entry,
    pub consumed: bool,
}

/// An ordered context whose entries carry a consumed flag. Entries are kept
/// in canonical form: no refinement bindings and only atomic formulae.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ThreadedContext {
    slots: Vec<Slot>,
}

impl ThreadedContext {
    pub fn from_context(ctx: &Context) -> ThreadedContext {
        let mut t = ThreadedContext::default();
        for e in &ctx.entries {
            t.push(e.clone());
        }
        t
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn push(&mut self, e: Entry) {
        let mut out = Vec::new();
        cf_entry(&e, &mut out);
        self.slots.extend(out.into_iter().map(|entry| Slot {
            entry,
            consumed: false,
        }));
    }

    /// Index of the latest binding of `x`, consumed or not.
    pub fn latest(&self, x: &str) -> Option<usize> {
        self.slots
            .iter()
            .rposition(|s| matches!(&s.entry, Entry::Binding(y, _) if y == x))
    }

    fn binding_type(&self, i: usize) -> &Type {
        match &self.slots[i].entry {
            Entry::Binding(_, t) => t,
            Entry::Resource(_) => unreachable!("slot {i} is not a binding"),
        }
    }

    /// The entries not yet consumed.
    pub fn available(&self) -> Context {
        Context::from_entries(
            self.slots
                .iter()
                .filter(|s| !s.consumed)
                .map(|s| s.entry.clone())
                .collect(),
        )
    }

    fn names(&self) -> BTreeSet<Name> {
        self.slots
            .iter()
            .filter_map(|s| match &s.entry {
                Entry::Binding(x, _) => Some(x.clone()),
                Entry::Resource(_) => None,
            })
            .collect()
    }

    /// A copy in which only unrestricted bindings remain available.
    fn unrestricted_part(&self) -> ThreadedContext {
        let slots = self
            .slots
            .iter()
            .map(|s| Slot {
                entry: s.entry.clone(),
                consumed: s.consumed || !is_shared(&s.entry),
            })
            .collect();
        ThreadedContext { slots }
    }
}

fn err(code: ErrorCode, msg: impl Into<String>) -> TypeError {
    TypeError::new(code, msg)
}

/// Checks `p` against `ctx` and returns the residual context.
pub fn check_process(mut ctx: ThreadedContext, p: &Process) -> Result<ThreadedContext, TypeError> {
    process(&mut ctx, p)?;
    Ok(ctx)
}

/// `Γ ⊢ P` with the leaf conditions on the residual: every formula must have
/// been asserted and every linear binding used up.
pub fn typecheck(ctx: &Context, p: &Process) -> Result<(), TypeError> {
    wf_context(ctx)?;
    let mut tc = ThreadedContext::from_context(ctx);
    process(&mut tc, p)?;
    leftovers(&tc.slots).map_err(|e| e.located(p, &tc.available()))
}

fn leftovers(slots: &[Slot]) -> Result<(), TypeError> {
    for s in slots.iter().filter(|s| !s.consumed) {
        match &s.entry {
            Entry::Resource(f) => {
                return Err(err(
                    ErrorCode::Split,
                    format!("formula `{f}` is never asserted"),
                ))
            }
            Entry::Binding(x, t) if !t.is_unrestricted_unfolded() => {
                return Err(err(
                    ErrorCode::Unqual,
                    format!("linear variable `{x}:{t}` is not used up"),
                ))
            }
            Entry::Binding(..) => {}
        }
    }
    Ok(())
}

fn process(ctx: &mut ThreadedContext, p: &Process) -> Result<(), TypeError> {
    let mark = ctx.slots.len();
    process_inner(ctx, p).map_err(|e| e.located(p, &ctx.available()))?;
    leftovers(&ctx.slots[mark..]).map_err(|e| e.located(p, &ctx.available()))?;
    ctx.slots.truncate(mark);
    Ok(())
}

fn process_inner(ctx: &mut ThreadedContext, p: &Process) -> Result<(), TypeError> {
    match p {
        Process::Inact => Ok(()),
        Process::Par(l, r) => {
            process(ctx, l)?;
            process(ctx, r)
        }
        Process::Repl(body) => {
            for x in body.free_vars() {
                let i = ctx
                    .latest(&x)
                    .ok_or_else(|| err(ErrorCode::Wf, format!("unbound variable `{x}`")))?;
                let t = ctx.binding_type(i);
                if !t.is_unrestricted_unfolded() {
                    return Err(err(
                        ErrorCode::Unqual,
                        format!("replicated process uses linear variable `{x}:{t}`"),
                    ));
                }
            }
            let mut inner = ctx.unrestricted_part();
            process(&mut inner, body)
        }
        Process::Restrict {
            x,
            y,
            annot,
            peer,
            body,
        } => {
            depends_on_unrestricted(ctx, &annot.free_vars(), || format!("type `{annot}`"))?;
            let dual = annot
                .dual()
                .ok_or_else(|| err(ErrorCode::Dual, format!("type `{annot}` has no dual")))?;
            let peer_type = match peer {
                Some(u) => {
                    depends_on_unrestricted(ctx, &u.free_vars(), || format!("type `{u}`"))?;
                    if !type_equivalent(u, &dual) {
                        return Err(err(
                            ErrorCode::Dual,
                            format!("types `{annot}` and `{u}` are not dual"),
                        ));
                    }
                    u.clone()
                }
                None => dual,
            };
            let mut avoid = ctx.names();
            body.collect_names(&mut avoid);
            let mut body = (**body).clone();
            let x = freshen(x, &mut avoid, &ctx.names(), &mut body);
            let y = freshen(y, &mut avoid, &ctx.names(), &mut body);
            ctx.push(Entry::Binding(x, annot.clone()));
            ctx.push(Entry::Binding(y, peer_type));
            process(ctx, &body)
        }
        Process::Assume(phi, body) => {
            depends_on_unrestricted(ctx, &phi.free_vars(), || format!("assumed formula `{phi}`"))?;
            ctx.push(Entry::Resource(phi.clone()));
            process(ctx, body)
        }
        Process::Assert(phi, body) => {
            prove_formula(ctx, phi)?;
            process(ctx, body)
        }
        Process::Output { chan, value, cont } => {
            let (x, binder, payload, next) = resolve_session(ctx, chan, Direction::Out)?;
            check_value(ctx, value, &payload)?;
            context_update(ctx, &x, next.subst(&binder, value))?;
            process(ctx, cont)
        }
        Process::Input { chan, binder, cont } => {
            let (x, y, payload, next) = resolve_session(ctx, chan, Direction::In)?;
            let mut avoid = ctx.names();
            cont.collect_names(&mut avoid);
            let mut cont = (**cont).clone();
            let z = freshen(binder, &mut avoid, &ctx.names(), &mut cont);
            ctx.push(Entry::Binding(z.clone(), payload));
            context_update(ctx, &x, next.subst(&y, &Value::Var(z)))?;
            process(ctx, &cont)
        }
        Process::Call { name, .. } => Err(err(
            ErrorCode::Wf,
            format!("process `{name}` has not been expanded"),
        )),
    }
}

/// Types and formulae written in a process may only mention unrestricted
/// variables in scope.
fn depends_on_unrestricted(
    ctx: &ThreadedContext,
    fv: &BTreeSet<Name>,
    what: impl Fn() -> String,
) -> Result<(), TypeError> {
    for x in fv {
        match ctx.latest(x) {
            Some(i) if !ctx.slots[i].consumed && is_shared(&ctx.slots[i].entry) => {}
            Some(_) => {
                return Err(err(
                    ErrorCode::Wf,
                    format!("{} depends on linear variable `{x}`", what()),
                ))
            }
            None => {
                return Err(err(
                    ErrorCode::Wf,
                    format!("{} mentions unbound {x}", what()),
                ))
            }
        }
    }
    Ok(())
}

/// Renames the binder `x` of `body` when it is already bound in the context.
fn freshen(
    x: &Name,
    avoid: &mut BTreeSet<Name>,
    bound: &BTreeSet<Name>,
    body: &mut Process,
) -> Name {
    if !bound.contains(x) {
        return x.clone();
    }
    let x2 = fresh(x, avoid);
    avoid.insert(x2.clone());
    *body = body.subst(x, &Value::Var(x2.clone()));
    x2
}

/// Uses the binding at slot `i` as a value: its type must only depend on
/// unrestricted variables, and a linear binding is consumed.
fn use_binding(ctx: &mut ThreadedContext, i: usize) -> Result<(), TypeError> {
    let Entry::Binding(x, t) = &ctx.slots[i].entry else {
        unreachable!("slot {i} is not a binding")
    };
    if ctx.slots[i].consumed {
        return Err(err(
            ErrorCode::Split,
            format!("linear variable `{x}` is already used"),
        ));
    }
    for v in t.free_vars() {
        let ok = ctx.latest(&v).is_some_and(|j| {
            j < i && !ctx.slots[j].consumed && ctx.binding_type(j).is_unrestricted_unfolded()
        });
        if !ok {
            return Err(err(
                ErrorCode::Wf,
                format!("type of `{x}` depends on `{v}`, which is not an unrestricted variable in scope"),
            ));
        }
    }
    if !t.is_unrestricted_unfolded() {
        ctx.slots[i].consumed = true;
    }
    Ok(())
}

/// Finds the session type of channel `chan` with the expected direction,
/// consuming it if linear. Returns the channel name, the dependent binder,
/// the payload type and the continuation.
fn resolve_session(
    ctx: &mut ThreadedContext,
    chan: &Value,
    dir: Direction,
) -> Result<(Name, Name, Type, Type), TypeError> {
    let x = chan
        .as_var()
        .ok_or_else(|| err(ErrorCode::NotSession, format!("`{chan}` is not a channel")))?
        .to_string();
    let i = ctx
        .latest(&x)
        .ok_or_else(|| err(ErrorCode::Wf, format!("unbound variable `{x}`")))?;
    let t = ctx.binding_type(i).unfold_head();
    let Type::Session {
        dir: d,
        binder,
        payload,
        cont,
        ..
    } = t
    else {
        return Err(err(
            ErrorCode::NotSession,
            format!(
                "`{x}` has type `{}`, which is not a session type",
                ctx.binding_type(i)
            ),
        ));
    };
    if d != dir {
        let (want, got) = match dir {
            Direction::Out => ("output", "input"),
            Direction::In => ("input", "output"),
        };
        return Err(err(
            ErrorCode::Mismatch,
            format!("`{x}` is used for {want} but its type expects {got}"),
        ));
    }
    use_binding(ctx, i)?;
    Ok((x, binder, *payload, *cont))
}

/// `Γ ⊢ v : T`, consuming what the value uses.
pub fn check_value(ctx: &mut ThreadedContext, v: &Value, t: &Type) -> Result<(), TypeError> {
    let t = t.unfold_head();
    if let Type::Refined {
        binder,
        base,
        formula,
    } = &t
    {
        prove_formula(ctx, &formula.subst(binder, v))?;
        return check_value(ctx, v, base);
    }
    let mismatch = |what: String| err(ErrorCode::Mismatch, format!("{what}, expected `{t}`"));
    match v {
        Value::Var(x) => {
            let i = ctx
                .latest(x)
                .ok_or_else(|| err(ErrorCode::Wf, format!("unbound variable `{x}`")))?;
            let bt = ctx.binding_type(i);
            if !type_equivalent(bt, &t) {
                return Err(mismatch(format!("`{x}` has type `{bt}`")));
            }
            use_binding(ctx, i)
        }
        Value::Unit => match &t {
            Type::Unit(b) if b == UNIT => Ok(()),
            _ => Err(mismatch("`()` has type `unit`".to_string())),
        },
        Value::Lit(l) => match &t {
            Type::Unit(b) if *b == l.base => Ok(()),
            _ => Err(mismatch(format!("`{v}` has type `{}`", l.base))),
        },
        Value::Sum(a, b) => match &t {
            Type::Unit(n) if n == NAT => {
                let nat = Type::base(NAT);
                check_value(ctx, a, &nat)?;
                check_value(ctx, b, &nat)
            }
            _ => Err(mismatch(format!("`{v}` has type `{NAT}`"))),
        },
    }
}

/// `Γ ⊢ φ`: consumes one matching formula per atom of `φ`.
pub fn prove_formula(ctx: &mut ThreadedContext, phi: &Formula) -> Result<(), TypeError> {
    let mut missing: Vec<Atom> = Vec::new();
    for atom in phi.atoms() {
        // Innermost first: an assumption local to the current scope must be
        // spent before the scope closes, while outer ones stay usable.
        let pick = (0..ctx.slots.len()).rfind(|&i| {
            let s = &ctx.slots[i];
            !s.consumed
                && matches!(&s.entry, Entry::Resource(Formula::Atom(a)) if *a == atom)
                && atom.free_vars().iter().all(|x| {
                    ctx.latest(x).is_some_and(|j| {
                        j < i
                            && !ctx.slots[j].consumed
                            && ctx.binding_type(j).is_unrestricted_unfolded()
                    })
                })
        });
        match pick {
            Some(i) => ctx.slots[i].consumed = true,
            None => missing.push(atom),
        }
    }
    if missing.is_empty() {
        return Ok(());
    }
    let bag = crate::syntax::AtomBag::from_atoms(missing);
    let mut parts: Vec<String> = Vec::new();
    let mut seen: Vec<&Atom> = Vec::new();
    for a in bag.iter() {
        if seen.contains(&a) {
            continue;
        }
        seen.push(a);
        match bag.count(a) {
            1 => parts.push(format!("`{a}`")),
            n => parts.push(format!("`{a}` x{n}")),
        }
    }
    Err(err(
        ErrorCode::Formula,
        format!("cannot prove `{phi}`: missing {}", parts.join(", ")),
    ))
}

/// `Γ + x:T`.
pub fn context_update(ctx: &mut ThreadedContext, x: &str, t: Type) -> Result<(), TypeError> {
    match ctx.latest(x) {
        Some(i) if !ctx.slots[i].consumed => {
            let cur = ctx.binding_type(i);
            if t.is_unrestricted_unfolded()
                && cur.is_unrestricted_unfolded()
                && type_equivalent(cur, &t)
            {
                Ok(())
            } else {
                Err(err(
                    ErrorCode::Update,
                    format!("cannot update `{x}:{cur}` to `{t}`"),
                ))
            }
        }
        _ => {
            depends_on_unrestricted(ctx, &t.free_vars(), || format!("type `{t}`"))?;
            ctx.push(Entry::Binding(x.to_string(), t));
            Ok(())
        }
    }
}
