//! A direct reading of the declarative rules as a backtracking search over
//! context splits. Exponential in the number of linear entries; used as an
//! oracle for the algorithmic checker on small inputs.

use std::collections::BTreeSet;

use thiserror::Error;

use super::split::{enumerate_splits, is_shared};
use crate::syntax::{
    fresh, type_equivalent, Context, Direction, Entry, Formula, Name, Process, Type, Value, NAT,
    UNIT,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("search budget exhausted")]
pub struct FuelExhausted;

/// Decides `Γ ⊢ P` by exhaustive search, giving up after `fuel` rule
/// applications.
pub fn reference_typecheck(ctx: &Context, p: &Process, fuel: u64) -> Result<bool, FuelExhausted> {
    let mut s = Search { fuel };
    if !wf(ctx) {
        return Ok(false);
    }
    s.process(&ctx.cf(), p)
}

struct Search {
    fuel: u64,
}

fn wf(g: &Context) -> bool {
    let mut dom = BTreeSet::new();
    for e in &g.entries {
        if !e.free_vars().is_subset(&dom) {
            return false;
        }
        if let Entry::Binding(x, _) = e {
            dom.insert(x.clone());
        }
    }
    true
}

fn all_shared(g: &Context) -> bool {
    g.entries.iter().all(is_shared)
}

/// `Γ` with `e` appended in canonical form.
fn extend(g: &Context, e: Entry) -> Context {
    g.concat(&Context::from_entries(vec![e]).cf())
}

/// Entries other than position `i` are unrestricted and `Γ` is well formed.
fn only_linear_at(g: &Context, i: usize) -> bool {
    wf(g)
        && g.entries
            .iter()
            .enumerate()
            .all(|(j, e)| j == i || is_shared(e))
}

impl Search {
    fn tick(&mut self) -> Result<(), FuelExhausted> {
        if self.fuel == 0 {
            return Err(FuelExhausted);
        }
        self.fuel -= 1;
        Ok(())
    }

    fn process(&mut self, g: &Context, p: &Process) -> Result<bool, FuelExhausted> {
        self.tick()?;
        match p {
            Process::Inact => Ok(wf(g) && all_shared(g)),
            Process::Par(l, r) => {
                for (g1, g2) in enumerate_splits(g) {
                    if self.process(&g1, l)? && self.process(&g2, r)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Process::Repl(body) => Ok(all_shared(g) && self.process(g, body)?),
            Process::Restrict {
                x,
                y,
                annot,
                peer,
                body,
            } => {
                if !annot.free_vars().is_subset(&g.dom()) {
                    return Ok(false);
                }
                let Some(dual) = annot.dual() else {
                    return Ok(false);
                };
                let u = match peer {
                    Some(u) if type_equivalent(u, &dual) && u.free_vars().is_subset(&g.dom()) => {
                        u.clone()
                    }
                    Some(_) => return Ok(false),
                    None => dual,
                };
                let mut body = (**body).clone();
                let x = rename_apart(x, g, &mut body);
                let y = rename_apart(y, g, &mut body);
                let g2 = extend(
                    &extend(g, Entry::Binding(x, annot.clone())),
                    Entry::Binding(y, u),
                );
                self.process(&g2, &body)
            }
            Process::Assume(phi, body) => {
                let shared = phi.free_vars().iter().all(|x| {
                    g.entries
                        .iter()
                        .any(|e| matches!(e, Entry::Binding(y, _) if y == x) && is_shared(e))
                });
                if !shared {
                    return Ok(false);
                }
                self.process(&extend(g, Entry::Resource(phi.clone())), body)
            }
            Process::Assert(phi, body) => {
                for (g1, g2) in enumerate_splits(g) {
                    if self.formula(&g1, phi)? && self.process(&g2, body)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Process::Output { chan, value, cont } => {
                for (delta, g3) in enumerate_splits(g) {
                    for (g1, g2) in enumerate_splits(&delta) {
                        for (x, y, payload, next) in self.channel(&g1, chan, Direction::Out)? {
                            if !self.value(&g2, value, &payload)? {
                                continue;
                            }
                            if let Some(g4) = update(&g3, &x, next.subst(&y, value)) {
                                if self.process(&g4, cont)? {
                                    return Ok(true);
                                }
                            }
                        }
                    }
                }
                Ok(false)
            }
            Process::Input { chan, binder, cont } => {
                for (g1, g2) in enumerate_splits(g) {
                    for (x, y, payload, next) in self.channel(&g1, chan, Direction::In)? {
                        let mut cont = (**cont).clone();
                        let z = rename_apart(binder, g, &mut cont);
                        let g3 = extend(&g2, Entry::Binding(z.clone(), payload));
                        if let Some(g4) = update(&g3, &x, next.subst(&y, &Value::Var(z))) {
                            if self.process(&g4, &cont)? {
                                return Ok(true);
                            }
                        }
                    }
                }
                Ok(false)
            }
            Process::Call { .. } => Ok(false),
        }
    }

    /// Session types `Γ ⊢ x : q dir y:T.U` derivable by the variable rule
    /// followed by unfolding.
    #[allow(clippy::type_complexity)]
    fn channel(
        &mut self,
        g: &Context,
        chan: &Value,
        dir: Direction,
    ) -> Result<Vec<(Name, Name, Type, Type)>, FuelExhausted> {
        self.tick()?;
        let Some(x) = chan.as_var() else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for (i, e) in g.entries.iter().enumerate() {
            let Entry::Binding(y, t) = e else { continue };
            if y != x || !only_linear_at(g, i) {
                continue;
            }
            if let Type::Session {
                dir: d,
                binder,
                payload,
                cont,
                ..
            } = t.unfold_head()
            {
                if d == dir {
                    out.push((x.to_string(), binder, *payload, *cont));
                }
            }
        }
        Ok(out)
    }

    fn value(&mut self, g: &Context, v: &Value, t: &Type) -> Result<bool, FuelExhausted> {
        self.tick()?;
        let t = t.unfold_head();
        if let Type::Refined {
            binder,
            base,
            formula,
        } = &t
        {
            let phi = formula.subst(binder, v);
            for (g1, g2) in enumerate_splits(g) {
                if self.value(&g1, v, base)? && self.formula(&g2, &phi)? {
                    return Ok(true);
                }
            }
            return Ok(false);
        }
        let leaf = wf(g) && all_shared(g);
        Ok(match v {
            Value::Var(x) => g.entries.iter().enumerate().any(|(i, e)| {
                matches!(e, Entry::Binding(y, s) if y == x && type_equivalent(s, &t))
                    && only_linear_at(g, i)
            }),
            Value::Unit => leaf && matches!(&t, Type::Unit(b) if b == UNIT),
            Value::Lit(l) => leaf && matches!(&t, Type::Unit(b) if *b == l.base),
            Value::Sum(a, b) => {
                let nat = Type::base(NAT);
                leaf && matches!(&t, Type::Unit(n) if n == NAT)
                    && self.value(g, a, &nat)?
                    && self.value(g, b, &nat)?
            }
        })
    }

    fn formula(&mut self, g: &Context, phi: &Formula) -> Result<bool, FuelExhausted> {
        self.tick()?;
        match phi {
            Formula::One => Ok(wf(g) && all_shared(g)),
            Formula::Atom(a) => Ok(g.entries.iter().enumerate().any(|(i, e)| {
                matches!(e, Entry::Resource(Formula::Atom(b)) if b == a) && only_linear_at(g, i)
            })),
            Formula::Tensor(l, r) => {
                for (g1, g2) in enumerate_splits(g) {
                    if self.formula(&g1, l)? && self.formula(&g2, r)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }
}

/// `Γ + x:T`.
fn update(g: &Context, x: &str, t: Type) -> Option<Context> {
    match g.lookup(x) {
        Some(cur) => (t.is_unrestricted_unfolded()
            && cur.is_unrestricted_unfolded()
            && type_equivalent(cur, &t))
        .then(|| g.clone()),
        None => t
            .free_vars()
            .is_subset(&g.dom())
            .then(|| extend(g, Entry::Binding(x.to_string(), t))),
    }
}

fn rename_apart(x: &Name, g: &Context, body: &mut Process) -> Name {
    let dom = g.dom();
    if !dom.contains(x) {
        return x.clone();
    }
    let mut avoid = dom;
    body.collect_names(&mut avoid);
    let x2 = fresh(x, &avoid);
    *body = body.subst(x, &Value::Var(x2.clone()));
    x2
}
