use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

use serde::Serialize;

use crate::syntax::{fresh, Atom, AtomBag, Formula, Name, Process, Type, Value};

/// A hoisted `new x y : annot` binder.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Restriction {
    pub x: Name,
    pub y: Name,
    pub annot: Type,
    pub peer: Option<Type>,
}

impl Restriction {
    fn names(&self, acc: &mut BTreeSet<Name>) {
        acc.insert(self.x.clone());
        acc.insert(self.y.clone());
        acc.extend(self.annot.free_vars());
        if let Some(p) = &self.peer {
            acc.extend(p.free_vars());
        }
    }
}

/// `new x1 y1 : T1 ... (assume A1) ... (P1 | ... | Pn)` where no thread is a
/// restriction, an assumption or a parallel composition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CanonicalProcess {
    pub restrictions: Vec<Restriction>,
    pub assumptions: AtomBag,
    pub threads: Vec<Process>,
}

/// Heats `p` into canonical form: parallel compositions are flattened and
/// `0` threads dropped, restrictions and assumptions are hoisted outwards
/// (restrictions renamed apart when needed), tensors in assumptions and in
/// leading assertions are split, `1` is dropped and unused restrictions are
/// discarded. Replications are left folded.
pub fn canonicalize(p: &Process) -> CanonicalProcess {
    let mut c = CanonicalProcess {
        restrictions: Vec::new(),
        assumptions: AtomBag::new(),
        threads: Vec::new(),
    };
    let mut avoid = p.free_vars();
    c.absorb(p.clone(), &mut avoid);
    c.finish()
}

/// Splits the leading assertions of a thread into their atoms and the
/// process that follows them.
pub fn assert_chain(p: &Process) -> (Vec<Atom>, &Process) {
    let mut atoms = Vec::new();
    let mut cur = p;
    while let Process::Assert(f, cont) = cur {
        atoms.extend(f.atoms());
        cur = cont;
    }
    (atoms, cur)
}

fn build_chain(atoms: &[Atom], cont: Process) -> Process {
    atoms.iter().rev().fold(cont, |acc, a| {
        Process::assert(Formula::Atom(a.clone()), acc)
    })
}

impl CanonicalProcess {
    fn absorb(&mut self, p: Process, avoid: &mut BTreeSet<Name>) {
        match p {
            Process::Inact => {}
            Process::Par(l, r) => {
                self.absorb(*l, avoid);
                self.absorb(*r, avoid);
            }
            Process::Restrict {
                x,
                y,
                annot,
                peer,
                body,
            } => {
                let mut body = *body;
                let x = rename_apart(x, avoid, &mut body);
                let y = rename_apart(y, avoid, &mut body);
                self.restrictions.push(Restriction { x, y, annot, peer });
                self.absorb(body, avoid);
            }
            Process::Assume(f, body) => {
                for a in f.atoms() {
                    self.assumptions.insert(a);
                }
                self.absorb(*body, avoid);
            }
            Process::Assert(..) => {
                let (atoms, cont) = assert_chain(&p);
                if atoms.is_empty() {
                    self.absorb(cont.clone(), avoid);
                } else {
                    self.threads.push(build_chain(&atoms, cont.clone()));
                }
            }
            other => self.threads.push(other),
        }
    }

    fn finish(mut self) -> CanonicalProcess {
        self.collect_garbage();
        if self.threads.is_empty() {
            self.threads.push(Process::Inact);
        }
        self
    }

    /// Drops restrictions whose names occur nowhere else (`new x y 0 ≡ 0`
    /// after scope extrusion).
    fn collect_garbage(&mut self) {
        loop {
            let before = self.restrictions.len();
            let mut i = 0;
            while i < self.restrictions.len() {
                let r = &self.restrictions[i];
                let mut used = BTreeSet::new();
                for t in &self.threads {
                    used.extend(t.free_vars());
                }
                for a in self.assumptions.iter() {
                    used.extend(a.free_vars());
                }
                for (j, other) in self.restrictions.iter().enumerate() {
                    if j != i {
                        used.extend(other.annot.free_vars());
                        if let Some(p) = &other.peer {
                            used.extend(p.free_vars());
                        }
                    }
                }
                if used.contains(&r.x) || used.contains(&r.y) {
                    i += 1;
                } else {
                    self.restrictions.remove(i);
                }
            }
            if self.restrictions.len() == before {
                break;
            }
        }
    }

    /// Names a process added to this form must not bind.
    fn scope_names(&self) -> BTreeSet<Name> {
        let mut acc = BTreeSet::new();
        for r in &self.restrictions {
            r.names(&mut acc);
        }
        for a in self.assumptions.iter() {
            acc.extend(a.free_vars());
        }
        for t in &self.threads {
            acc.extend(t.free_vars());
        }
        acc
    }

    /// `*P ≡ P | *P` on thread `i`: appends a canonicalized copy of the body
    /// and returns the indices of the new threads.
    pub fn unfold_replica(&mut self, i: usize) -> Range<usize> {
        let Process::Repl(body) = &self.threads[i] else {
            panic!("thread {i} is not a replication");
        };
        let body = (**body).clone();
        let mut avoid = self.scope_names();
        if self.threads.len() == 1 && self.threads[0] == Process::Inact {
            self.threads.clear();
        }
        let start = self.threads.len();
        self.absorb(body, &mut avoid);
        start..self.threads.len()
    }

    /// Reads the form back as a process.
    pub fn to_process(&self) -> Process {
        let threads = self
            .threads
            .iter()
            .filter(|t| **t != Process::Inact)
            .cloned();
        let mut p = Process::par_all(threads);
        if !self.assumptions.is_empty() {
            p = Process::assume(self.assumptions.to_formula(), p);
        }
        for r in self.restrictions.iter().rev() {
            p = Process::Restrict {
                x: r.x.clone(),
                y: r.y.clone(),
                annot: r.annot.clone(),
                peer: r.peer.clone(),
                body: Box::new(p),
            };
        }
        p
    }

    /// Canonicalizes the read-back process again, after threads have been
    /// replaced by continuations.
    pub fn recanonicalize(&self) -> CanonicalProcess {
        canonicalize(&self.to_process())
    }

    /// Alpha-normalized copy, for comparison up to renaming of restrictions.
    pub fn normalized(&self) -> CanonicalProcess {
        canonicalize(&self.to_process().normalized())
    }

    /// Replaces the leading assertion `atom` of thread `t` and removes one
    /// occurrence of it from the assumptions.
    pub(crate) fn cut(&mut self, t: usize, atom: &Atom) {
        let (mut atoms, cont) = assert_chain(&self.threads[t]);
        let cont = cont.clone();
        let k = atoms
            .iter()
            .position(|a| a == atom)
            .expect("atom heads the thread");
        atoms.remove(k);
        self.threads[t] = build_chain(&atoms, cont);
        let removed = self.assumptions.remove_one(atom);
        debug_assert!(removed, "cut on an atom that was not assumed");
    }
}

fn rename_apart(x: Name, avoid: &mut BTreeSet<Name>, body: &mut Process) -> Name {
    if !avoid.contains(&x) {
        avoid.insert(x.clone());
        return x;
    }
    let mut taken = avoid.clone();
    body.collect_names(&mut taken);
    let x2 = fresh(&x, &taken);
    *body = body.subst(&x, &Value::Var(x2.clone()));
    avoid.insert(x2.clone());
    x2
}

impl fmt::Display for CanonicalProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "restrictions:")?;
        for r in &self.restrictions {
            write!(f, "  new {} {} : {}", r.x, r.y, r.annot)?;
            if let Some(p) = &r.peer {
                write!(f, ", {p}")?;
            }
            writeln!(f)?;
        }
        writeln!(f, "assumptions: {}", self.assumptions)?;
        writeln!(f, "threads:")?;
        for (i, t) in self.threads.iter().enumerate() {
            writeln!(f, "  [{i}] {t}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{Direction, Qualifier};

    fn a(p: &str) -> Formula {
        Formula::atom(p, vec![])
    }

    fn atom(p: &str) -> Atom {
        Atom::new(p, vec![])
    }

    #[test]
    fn assume_one_vanishes() {
        let c = canonicalize(&Process::assume(Formula::One, Process::Inact));
        assert!(c.assumptions.is_empty());
        assert_eq!(c.threads, vec![Process::Inact]);
    }

    #[test]
    fn tensor_assumptions_are_split() {
        let c = canonicalize(&Process::assume(
            Formula::tensor(a("A"), a("B")),
            Process::Inact,
        ));
        assert_eq!(c.assumptions, AtomBag::from_atoms([atom("A"), atom("B")]));
    }

    #[test]
    fn assumptions_widen_over_parallel() {
        let p = Process::par(
            Process::assume(a("A"), Process::Inact),
            Process::assert(a("A"), Process::Inact),
        );
        let c = canonicalize(&p);
        assert_eq!(c.assumptions.len(), 1);
        assert_eq!(c.threads, vec![Process::assert(a("A"), Process::Inact)]);
    }

    #[test]
    fn restrictions_are_renamed_apart() {
        let t = Type::session(Qualifier::Lin, Direction::Out, "w", Type::unit(), Type::End);
        let inner = Process::restrict(
            "x",
            "y",
            t.clone(),
            Process::par(
                Process::output("x", Value::Unit, Process::Inact),
                Process::input("y", "z", Process::Inact),
            ),
        );
        let p = Process::par(
            inner.clone(),
            Process::output("x", Value::Unit, Process::Inact),
        );
        let c = canonicalize(&p);
        assert_eq!(c.restrictions[0].x, "x'1");
        assert_eq!(c.threads.len(), 3);
        assert!(c.threads[2].free_vars().contains("x"));
    }

    #[test]
    fn unused_restrictions_are_dropped() {
        let t = Type::End;
        let c = canonicalize(&Process::restrict("x", "y", t, Process::Inact));
        assert!(c.restrictions.is_empty());
    }

    #[test]
    fn read_back_round_trips() {
        let p = Process::assume(
            a("A"),
            Process::par(
                Process::assert(a("A"), Process::Inact),
                Process::repl(Process::Inact),
            ),
        );
        let c = canonicalize(&p);
        assert_eq!(canonicalize(&c.to_process()), c);
    }

    #[test]
    fn replica_unfolding_appends_a_copy() {
        let body = Process::assert(a("A"), Process::Inact);
        let mut c = canonicalize(&Process::repl(body.clone()));
        let new = c.unfold_replica(0);
        assert_eq!(new, 1..2);
        assert_eq!(c.threads[1], body);
    }
}
