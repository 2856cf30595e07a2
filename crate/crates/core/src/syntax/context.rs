use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::formula::{Atom, Formula};
use super::types::Type;
use super::value::{Name, Value};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Entry {
    Binding(Name, Type),
    Resource(Formula),
}

impl Entry {
    pub fn binding(x: impl Into<Name>, t: Type) -> Entry {
        Entry::Binding(x.into(), t)
    }

    pub fn atom(a: Atom) -> Entry {
        Entry::Resource(Formula::Atom(a))
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        match self {
            Entry::Binding(_, t) => t.free_vars(),
            Entry::Resource(f) => f.free_vars(),
        }
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::Binding(x, t) => write!(f, "{x}:{t}"),
            Entry::Resource(phi) => write!(f, "{phi}"),
        }
    }
}

/// An ordered typing context. Order matters: there is no exchange rule.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Context {
    pub entries: Vec<Entry>,
}

impl Context {
    pub fn new() -> Context {
        Context::default()
    }

    pub fn from_entries(entries: Vec<Entry>) -> Context {
        Context { entries }
    }

    pub fn push(&mut self, e: Entry) {
        self.entries.push(e);
    }

    pub fn with(mut self, e: Entry) -> Context {
        self.entries.push(e);
        self
    }

    pub fn concat(&self, other: &Context) -> Context {
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Context { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dom(&self) -> BTreeSet<Name> {
        self.entries
            .iter()
            .filter_map(|e| match e {
                Entry::Binding(x, _) => Some(x.clone()),
                Entry::Resource(_) => None,
            })
            .collect()
    }

    /// The latest binding of `x`.
    pub fn lookup(&self, x: &str) -> Option<&Type> {
        self.entries.iter().rev().find_map(|e| match e {
            Entry::Binding(y, t) if y == x => Some(t),
            _ => None,
        })
    }

    /// Only unrestricted bindings and no resources.
    pub fn is_unrestricted(&self) -> bool {
        self.entries.iter().all(|e| match e {
            Entry::Binding(_, t) => t.is_unrestricted(),
            Entry::Resource(_) => false,
        })
    }

    /// Canonical form: refinement bindings are split into a plain binding
    /// followed by the instantiated formula, tensors are split into atoms and
    /// units vanish.
    pub fn cf(&self) -> Context {
        let mut out = Vec::new();
        for e in &self.entries {
            cf_entry(e, &mut out);
        }
        Context { entries: out }
    }

    pub fn subst(&self, x: &str, v: &Value) -> Context {
        Context {
            entries: self
                .entries
                .iter()
                .map(|e| match e {
                    Entry::Binding(y, t) => Entry::Binding(y.clone(), t.subst(x, v)),
                    Entry::Resource(f) => Entry::Resource(f.subst(x, v)),
                })
                .collect(),
        }
    }
}

pub(crate) fn cf_entry(e: &Entry, out: &mut Vec<Entry>) {
    match e {
        Entry::Binding(
            x,
            Type::Refined {
                binder,
                base,
                formula,
            },
        ) => {
            cf_entry(&Entry::Binding(x.clone(), (**base).clone()), out);
            let inst = formula.subst(binder, &Value::Var(x.clone()));
            out.extend(inst.atoms().into_iter().map(Entry::atom));
        }
        Entry::Binding(..) => out.push(e.clone()),
        Entry::Resource(f) => out.extend(f.atoms().into_iter().map(Entry::atom)),
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "·");
        }
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}
