use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::value::{Name, Value};

/// An uninterpreted predicate applied to values.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Atom {
    pub pred: Name,
    pub args: Vec<Value>,
}

impl Atom {
    pub fn new(pred: impl Into<Name>, args: Vec<Value>) -> Atom {
        Atom {
            pred: pred.into(),
            args,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut acc = BTreeSet::new();
        for a in &self.args {
            a.collect_free(&mut acc);
        }
        acc
    }

    pub fn subst(&self, x: &str, v: &Value) -> Atom {
        Atom {
            pred: self.pred.clone(),
            args: self.args.iter().map(|a| a.subst(x, v)).collect(),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// Formulae of the multiplicative fragment: atoms, tensor and its unit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Formula {
    Atom(Atom),
    Tensor(Box<Formula>, Box<Formula>),
    One,
}

impl Formula {
    pub fn atom(pred: impl Into<Name>, args: Vec<Value>) -> Formula {
        Formula::Atom(Atom::new(pred, args))
    }

    pub fn tensor(l: Formula, r: Formula) -> Formula {
        Formula::Tensor(Box::new(l), Box::new(r))
    }

    /// Joins atoms with tensors; the empty list is `1`.
    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> Formula {
        atoms
            .into_iter()
            .map(Formula::Atom)
            .reduce(Formula::tensor)
            .unwrap_or(Formula::One)
    }

    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut acc = BTreeSet::new();
        self.collect_free(&mut acc);
        acc
    }

    pub(crate) fn collect_free(&self, acc: &mut BTreeSet<Name>) {
        match self {
            Formula::Atom(a) => {
                for v in &a.args {
                    v.collect_free(acc);
                }
            }
            Formula::Tensor(l, r) => {
                l.collect_free(acc);
                r.collect_free(acc);
            }
            Formula::One => {}
        }
    }

    pub fn subst(&self, x: &str, v: &Value) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(a.subst(x, v)),
            Formula::Tensor(l, r) => Formula::tensor(l.subst(x, v), r.subst(x, v)),
            Formula::One => Formula::One,
        }
    }

    /// The atoms of the formula in left-to-right order, with multiplicity.
    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        self.push_atoms(&mut out);
        out
    }

    fn push_atoms(&self, out: &mut Vec<Atom>) {
        match self {
            Formula::Atom(a) => out.push(a.clone()),
            Formula::Tensor(l, r) => {
                l.push_atoms(out);
                r.push_atoms(out);
            }
            Formula::One => {}
        }
    }

    pub fn flatten(&self) -> AtomBag {
        AtomBag::from_atoms(self.atoms())
    }

    /// Equivalence modulo commutativity, associativity and unit of tensor.
    pub fn equivalent(&self, other: &Formula) -> bool {
        self.flatten() == other.flatten()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::One => write!(f, "1"),
            Formula::Tensor(l, r) => {
                write!(f, "{l} * ")?;
                if matches!(**r, Formula::Tensor(..)) {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
        }
    }
}

/// A multiset of atoms, kept sorted so that equality is multiset equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct AtomBag(Vec<Atom>);

impl AtomBag {
    pub fn new() -> AtomBag {
        AtomBag(Vec::new())
    }

    pub fn from_atoms(atoms: impl IntoIterator<Item = Atom>) -> AtomBag {
        let mut v: Vec<Atom> = atoms.into_iter().collect();
        v.sort();
        AtomBag(v)
    }

    pub fn insert(&mut self, atom: Atom) {
        let at = self.0.partition_point(|a| a <= &atom);
        self.0.insert(at, atom);
    }

    pub fn extend(&mut self, other: &AtomBag) {
        for a in &other.0 {
            self.insert(a.clone());
        }
    }

    pub fn union(&self, other: &AtomBag) -> AtomBag {
        let mut out = self.clone();
        out.extend(other);
        out
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.0.binary_search(atom).is_ok()
    }

    pub fn count(&self, atom: &Atom) -> usize {
        self.0.iter().filter(|a| *a == atom).count()
    }

    /// Removes one occurrence; returns false when the atom is absent.
    pub fn remove_one(&mut self, atom: &Atom) -> bool {
        match self.0.binary_search(atom) {
            Ok(i) => {
                self.0.remove(i);
                true
            }
            Err(_) => false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_formula(&self) -> Formula {
        Formula::from_atoms(self.0.iter().cloned())
    }
}

impl fmt::Display for AtomBag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}
