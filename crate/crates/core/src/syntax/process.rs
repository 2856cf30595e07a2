use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::formula::Formula;
use super::names::{canonical, fresh};
use super::types::{subst_under_binder, Type};
use super::value::{Name, Value};

/// Processes of the pi calculus with assume and assert.
///
/// `Call` is a macro invocation; it only occurs before macro expansion.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Process {
    Output {
        chan: Value,
        value: Value,
        cont: Box<Process>,
    },
    Input {
        chan: Value,
        binder: Name,
        cont: Box<Process>,
    },
    Par(Box<Process>, Box<Process>),
    Repl(Box<Process>),
    #[default]
    Inact,
    /// `new x y : annot P`. When `peer` is present it is the declared type
    /// of `y`, which must be dual to `annot`; otherwise `y` gets the dual.
    Restrict {
        x: Name,
        y: Name,
        annot: Type,
        peer: Option<Type>,
        body: Box<Process>,
    },
    Assume(Formula, Box<Process>),
    Assert(Formula, Box<Process>),
    Call {
        name: Name,
        args: Vec<Value>,
    },
}

impl Process {
    pub fn output(chan: impl Into<Name>, value: Value, cont: Process) -> Process {
        Process::Output {
            chan: Value::Var(chan.into()),
            value,
            cont: Box::new(cont),
        }
    }

    pub fn input(chan: impl Into<Name>, binder: impl Into<Name>, cont: Process) -> Process {
        Process::Input {
            chan: Value::Var(chan.into()),
            binder: binder.into(),
            cont: Box::new(cont),
        }
    }

    pub fn par(l: Process, r: Process) -> Process {
        Process::Par(Box::new(l), Box::new(r))
    }

    /// Left-nested parallel composition; the empty list is `0`.
    pub fn par_all(ps: impl IntoIterator<Item = Process>) -> Process {
        ps.into_iter()
            .reduce(Process::par)
            .unwrap_or(Process::Inact)
    }

    pub fn repl(p: Process) -> Process {
        Process::Repl(Box::new(p))
    }

    pub fn restrict(x: impl Into<Name>, y: impl Into<Name>, annot: Type, body: Process) -> Process {
        Process::Restrict {
            x: x.into(),
            y: y.into(),
            annot,
            peer: None,
            body: Box::new(body),
        }
    }

    pub fn assume(f: Formula, p: Process) -> Process {
        Process::Assume(f, Box::new(p))
    }

    pub fn assert(f: Formula, p: Process) -> Process {
        Process::Assert(f, Box::new(p))
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut acc = BTreeSet::new();
        self.collect_free(&mut acc);
        acc
    }

    fn collect_free(&self, acc: &mut BTreeSet<Name>) {
        match self {
            Process::Output { chan, value, cont } => {
                chan.collect_free(acc);
                value.collect_free(acc);
                cont.collect_free(acc);
            }
            Process::Input { chan, binder, cont } => {
                chan.collect_free(acc);
                let mut inner = cont.free_vars();
                inner.remove(binder);
                acc.extend(inner);
            }
            Process::Par(l, r) => {
                l.collect_free(acc);
                r.collect_free(acc);
            }
            Process::Repl(p) => p.collect_free(acc),
            Process::Inact => {}
            Process::Restrict {
                x,
                y,
                annot,
                peer,
                body,
            } => {
                annot.collect_free(acc);
                if let Some(p) = peer {
                    p.collect_free(acc);
                }
                let mut inner = body.free_vars();
                inner.remove(x);
                inner.remove(y);
                acc.extend(inner);
            }
            Process::Assume(f, p) | Process::Assert(f, p) => {
                f.collect_free(acc);
                p.collect_free(acc);
            }
            Process::Call { args, .. } => {
                for a in args {
                    a.collect_free(acc);
                }
            }
        }
    }

    /// Every program-variable name occurring anywhere, bound or free.
    pub fn all_names(&self) -> BTreeSet<Name> {
        let mut acc = BTreeSet::new();
        self.collect_names(&mut acc);
        acc
    }

    pub(crate) fn collect_names(&self, acc: &mut BTreeSet<Name>) {
        match self {
            Process::Output { chan, value, cont } => {
                chan.collect_free(acc);
                value.collect_free(acc);
                cont.collect_names(acc);
            }
            Process::Input { chan, binder, cont } => {
                chan.collect_free(acc);
                acc.insert(binder.clone());
                cont.collect_names(acc);
            }
            Process::Par(l, r) => {
                l.collect_names(acc);
                r.collect_names(acc);
            }
            Process::Repl(p) => p.collect_names(acc),
            Process::Inact => {}
            Process::Restrict {
                x,
                y,
                annot,
                peer,
                body,
            } => {
                acc.insert(x.clone());
                acc.insert(y.clone());
                annot.collect_names(acc);
                if let Some(p) = peer {
                    p.collect_names(acc);
                }
                body.collect_names(acc);
            }
            Process::Assume(f, p) | Process::Assert(f, p) => {
                f.collect_free(acc);
                p.collect_names(acc);
            }
            Process::Call { args, .. } => {
                for a in args {
                    a.collect_free(acc);
                }
            }
        }
    }

    /// Capture-avoiding `self[v/x]`.
    pub fn subst(&self, x: &str, v: &Value) -> Process {
        match self {
            Process::Output { chan, value, cont } => Process::Output {
                chan: chan.subst(x, v),
                value: value.subst(x, v),
                cont: Box::new(cont.subst(x, v)),
            },
            Process::Input { chan, binder, cont } => {
                let (binder, cont) =
                    subst_under_binder(binder, &**cont, x, v, Process::free_vars, Process::subst);
                Process::Input {
                    chan: chan.subst(x, v),
                    binder,
                    cont: Box::new(cont),
                }
            }
            Process::Par(l, r) => Process::par(l.subst(x, v), r.subst(x, v)),
            Process::Repl(p) => Process::repl(p.subst(x, v)),
            Process::Inact => Process::Inact,
            Process::Restrict {
                x: a,
                y: b,
                annot,
                peer,
                body,
            } => {
                let annot = annot.subst(x, v);
                let peer = peer.as_ref().map(|p| p.subst(x, v));
                if a == x || b == x || !body.free_vars().contains(x) {
                    return Process::Restrict {
                        x: a.clone(),
                        y: b.clone(),
                        annot,
                        peer,
                        body: body.clone(),
                    };
                }
                let mut v_fv = BTreeSet::new();
                v.collect_free(&mut v_fv);
                let mut avoid = v_fv.clone();
                body.collect_names(&mut avoid);
                avoid.insert(x.to_string());
                avoid.insert(a.clone());
                avoid.insert(b.clone());
                let mut body = (**body).clone();
                let rename = |name: &Name, body: &mut Process, avoid: &mut BTreeSet<Name>| {
                    if v_fv.contains(name) {
                        let n2 = fresh(name, avoid);
                        avoid.insert(n2.clone());
                        *body = body.subst(name, &Value::Var(n2.clone()));
                        n2
                    } else {
                        name.clone()
                    }
                };
                let a2 = rename(a, &mut body, &mut avoid);
                let b2 = rename(b, &mut body, &mut avoid);
                Process::Restrict {
                    x: a2,
                    y: b2,
                    annot,
                    peer,
                    body: Box::new(body.subst(x, v)),
                }
            }
            Process::Assume(f, p) => Process::assume(f.subst(x, v), p.subst(x, v)),
            Process::Assert(f, p) => Process::assert(f.subst(x, v), p.subst(x, v)),
            Process::Call { name, args } => Process::Call {
                name: name.clone(),
                args: args.iter().map(|a| a.subst(x, v)).collect(),
            },
        }
    }

    /// Simultaneous substitution of `values` for `names`.
    pub fn subst_many(&self, names: &[Name], values: &[Value]) -> Process {
        let mut avoid = self.all_names();
        for v in values {
            v.collect_free(&mut avoid);
        }
        avoid.extend(names.iter().cloned());
        let mut temps = Vec::with_capacity(names.len());
        let mut p = self.clone();
        for n in names {
            let t = fresh(n, &avoid);
            avoid.insert(t.clone());
            p = p.subst(n, &Value::Var(t.clone()));
            temps.push(t);
        }
        for (t, v) in temps.iter().zip(values) {
            p = p.subst(t, v);
        }
        p
    }

    /// Renames bound names canonically by binding order.
    pub fn normalized(&self) -> Process {
        let mut k = 0;
        self.normalize_from(&mut k)
    }

    fn normalize_from(&self, k: &mut usize) -> Process {
        match self {
            Process::Output { chan, value, cont } => Process::Output {
                chan: chan.clone(),
                value: value.clone(),
                cont: Box::new(cont.normalize_from(k)),
            },
            Process::Input { chan, binder, cont } => {
                let b = canonical(*k);
                *k += 1;
                let cont = cont.subst(binder, &Value::Var(b.clone())).normalize_from(k);
                Process::Input {
                    chan: chan.clone(),
                    binder: b,
                    cont: Box::new(cont),
                }
            }
            Process::Par(l, r) => {
                let l = l.normalize_from(k);
                Process::par(l, r.normalize_from(k))
            }
            Process::Repl(p) => Process::repl(p.normalize_from(k)),
            Process::Inact => Process::Inact,
            Process::Restrict {
                x,
                y,
                annot,
                peer,
                body,
            } => {
                let annot = annot.normalize_from(k);
                let peer = peer.as_ref().map(|p| p.normalize_from(k));
                let a = canonical(*k);
                let b = canonical(*k + 1);
                *k += 2;
                let body = body
                    .subst(x, &Value::Var(a.clone()))
                    .subst(y, &Value::Var(b.clone()))
                    .normalize_from(k);
                Process::Restrict {
                    x: a,
                    y: b,
                    annot,
                    peer,
                    body: Box::new(body),
                }
            }
            Process::Assume(f, p) => Process::assume(f.clone(), p.normalize_from(k)),
            Process::Assert(f, p) => Process::assert(f.clone(), p.normalize_from(k)),
            Process::Call { .. } => self.clone(),
        }
    }

    pub fn alpha_eq(&self, other: &Process) -> bool {
        self.normalized() == other.normalized()
    }

    /// Number of AST nodes that are prefixes, restrictions, assumes or
    /// replications.
    pub fn prefix_count(&self) -> usize {
        match self {
            Process::Output { cont, .. } | Process::Input { cont, .. } => 1 + cont.prefix_count(),
            Process::Par(l, r) => l.prefix_count() + r.prefix_count(),
            Process::Repl(p) => 1 + p.prefix_count(),
            Process::Inact | Process::Call { .. } => 0,
            Process::Restrict { body, .. } => 1 + body.prefix_count(),
            Process::Assume(_, p) | Process::Assert(_, p) => 1 + p.prefix_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Process::Output { cont, .. } | Process::Input { cont, .. } => 1 + cont.depth(),
            Process::Par(l, r) => 1 + l.depth().max(r.depth()),
            Process::Repl(p) => 1 + p.depth(),
            Process::Inact | Process::Call { .. } => 1,
            Process::Restrict { body, .. } => 1 + body.depth(),
            Process::Assume(_, p) | Process::Assert(_, p) => 1 + p.depth(),
        }
    }

    pub fn contains_repl(&self) -> bool {
        match self {
            Process::Repl(_) => true,
            Process::Output { cont, .. } | Process::Input { cont, .. } => cont.contains_repl(),
            Process::Par(l, r) => l.contains_repl() || r.contains_repl(),
            Process::Inact | Process::Call { .. } => false,
            Process::Restrict { body, .. } => body.contains_repl(),
            Process::Assume(_, p) | Process::Assert(_, p) => p.contains_repl(),
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Inact => write!(f, "0"),
            Process::Output { chan, value, cont } => {
                write!(f, "{chan}!{value}. ")?;
                write_prefix_body(f, cont)
            }
            Process::Input { chan, binder, cont } => {
                write!(f, "{chan}?{binder}. ")?;
                write_prefix_body(f, cont)
            }
            Process::Par(l, r) => {
                write!(f, "{l} | ")?;
                if matches!(**r, Process::Par(..)) {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
            Process::Repl(p) => {
                write!(f, "*")?;
                write_prefix_body(f, p)
            }
            Process::Restrict {
                x,
                y,
                annot,
                peer,
                body,
            } => {
                write!(f, "new {x} {y} : {annot}")?;
                if let Some(p) = peer {
                    write!(f, ", {p}")?;
                }
                write!(f, " ")?;
                write_prefix_body(f, body)
            }
            Process::Assume(phi, p) => {
                write!(f, "(assume {phi}) ")?;
                write_prefix_body(f, p)
            }
            Process::Assert(phi, p) => {
                write!(f, "assert {phi}. ")?;
                write_prefix_body(f, p)
            }
            Process::Call { name, args } => {
                write!(f, "{name}")?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

fn write_prefix_body(f: &mut fmt::Formatter<'_>, p: &Process) -> fmt::Result {
    if matches!(p, Process::Par(..)) {
        write!(f, "({p})")
    } else {
        write!(f, "{p}")
    }
}
