use serde::Serialize;

use super::canonical::{assert_chain, canonicalize, CanonicalProcess};
use crate::syntax::{Atom, AtomBag, Process};

/// A thread of some canonical form that can be heated to an assertion of
/// `atom`, while `atom` is not assumed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub form: String,
    pub atom: Atom,
    pub thread: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SafetyReport {
    pub safe: bool,
    pub witnesses: Vec<Witness>,
    pub explored_forms: usize,
    pub unfold_budget: usize,
    /// Atoms that head more assertions than there are assumptions of them
    /// in the unheated canonical form. Such a process is safe by membership
    /// yet some of those assertions can never be cut.
    pub oversubscribed: Vec<Atom>,
}

/// Canonical forms reachable by unfolding each replication of the
/// canonical form of `p` between 0 and `budget` times.
pub fn enumerate_canonical_forms(p: &Process, budget: usize) -> Vec<CanonicalProcess> {
    let base = canonicalize(p);
    let repl: Vec<usize> = (0..base.threads.len())
        .filter(|&i| matches!(base.threads[i], Process::Repl(_)))
        .collect();
    let mut out: Vec<CanonicalProcess> = Vec::new();
    let mut counts = vec![0usize; repl.len()];
    loop {
        let mut form = base.clone();
        for (&i, &k) in repl.iter().zip(&counts) {
            for _ in 0..k {
                form.unfold_replica(i);
            }
        }
        if !out.contains(&form) {
            out.push(form);
        }
        // Odometer over `counts`.
        let mut d = 0;
        loop {
            if d == counts.len() {
                return out;
            }
            if counts[d] < budget {
                counts[d] += 1;
                break;
            }
            counts[d] = 0;
            d += 1;
        }
    }
}

/// Membership check: every atom at the head of a thread (up to reordering
/// of consecutive assertions) must be among the assumptions.
pub fn is_safe_canonical(c: &CanonicalProcess) -> (bool, Vec<Witness>) {
    let mut witnesses = Vec::new();
    for (i, t) in c.threads.iter().enumerate() {
        let (atoms, _) = assert_chain(t);
        for a in atoms {
            if !c.assumptions.contains(&a)
                && !witnesses
                    .iter()
                    .any(|w: &Witness| w.thread == i && w.atom == a)
            {
                witnesses.push(Witness {
                    form: c.to_process().to_string(),
                    atom: a,
                    thread: i,
                });
            }
        }
    }
    (witnesses.is_empty(), witnesses)
}

pub fn check_safety(p: &Process, budget: usize) -> SafetyReport {
    let forms = enumerate_canonical_forms(p, budget);
    let mut witnesses = Vec::new();
    for f in &forms {
        let (_, ws) = is_safe_canonical(f);
        witnesses.extend(ws);
    }
    let base = &forms[0];
    let mut heads = AtomBag::new();
    for t in &base.threads {
        for a in assert_chain(t).0 {
            heads.insert(a);
        }
    }
    let mut oversubscribed: Vec<Atom> = Vec::new();
    for a in heads.iter() {
        let assumed = base.assumptions.count(a);
        if assumed > 0 && heads.count(a) > assumed && !oversubscribed.contains(a) {
            oversubscribed.push(a.clone());
        }
    }
    SafetyReport {
        safe: witnesses.is_empty(),
        witnesses,
        explored_forms: forms.len(),
        unfold_budget: budget,
        oversubscribed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{Formula, Value};

    fn a(p: &str) -> Formula {
        Formula::atom(p, vec![])
    }

    fn charge(n: u64) -> Formula {
        Formula::atom("charge", vec![Value::named("c", "ccard"), Value::int(n)])
    }

    #[test]
    fn mismatched_charge_is_unsafe() {
        let p = Process::assume(charge(100), Process::assert(charge(110), Process::Inact));
        let r = check_safety(&p, 1);
        assert!(!r.safe);
        assert_eq!(Formula::Atom(r.witnesses[0].atom.clone()), charge(110));
    }

    #[test]
    fn lone_assert_is_unsafe() {
        assert!(!check_safety(&Process::assert(charge(100), Process::Inact), 1).safe);
    }

    #[test]
    fn membership_not_consumption() {
        let p = Process::assume(
            a("A"),
            Process::par(
                Process::assert(a("A"), Process::Inact),
                Process::assert(a("A"), Process::Inact),
            ),
        );
        let r = check_safety(&p, 1);
        assert!(r.safe);
        assert_eq!(r.oversubscribed.len(), 1);
    }

    #[test]
    fn replicated_assert_needs_unfolding() {
        let p = Process::repl(Process::assert(a("A"), Process::Inact));
        assert!(check_safety(&p, 0).safe);
        let r = check_safety(&p, 1);
        assert!(!r.safe);
        assert_eq!(r.explored_forms, 2);
    }

    #[test]
    fn every_atom_of_an_assert_chain_counts() {
        let p = Process::assume(
            a("A"),
            Process::assert(a("A"), Process::assert(a("B"), Process::Inact)),
        );
        assert!(!check_safety(&p, 0).safe);
    }
}
