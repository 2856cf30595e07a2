//! Equi-recursive type equivalence.
//!
//! Two types are equivalent when a bisimulation relates them: recursive types
//! are identified with their unfoldings, refinements compare their formulae
//! up to commutativity, associativity and unit of tensor, and binders are
//! compared up to renaming. The check assumes a pair of types is related
//! whenever it is revisited (the coinductive hypothesis); visited pairs are
//! keyed on alpha-normalized types so the set of keys stays finite for
//! contractive types.

use std::collections::{BTreeSet, HashSet};

use super::names::fresh;
use super::types::Type;
use super::value::{Name, Value};

pub fn type_equivalent(t: &Type, u: &Type) -> bool {
    let mut visited = HashSet::new();
    Bisim {
        visited: &mut visited,
    }
    .equiv(t, u)
}

struct Bisim<'a> {
    visited: &'a mut HashSet<(Type, Type)>,
}

impl Bisim<'_> {
    fn equiv(&mut self, t: &Type, u: &Type) -> bool {
        let t = t.unfold_head();
        let u = u.unfold_head();
        if t == u {
            return true;
        }
        let key = (t.normalized(), u.normalized());
        if key.0 == key.1 || !self.visited.insert(key) {
            return true;
        }
        match (&t, &u) {
            (Type::Unit(a), Type::Unit(b)) => a == b,
            (Type::End, Type::End) => true,
            (Type::Var(a), Type::Var(b)) => a == b,
            (
                Type::Session {
                    qual: q1,
                    dir: d1,
                    binder: y1,
                    payload: p1,
                    cont: c1,
                },
                Type::Session {
                    qual: q2,
                    dir: d2,
                    binder: y2,
                    payload: p2,
                    cont: c2,
                },
            ) => {
                if q1 != q2 || d1 != d2 || !self.equiv(p1, p2) {
                    return false;
                }
                let (c1, c2) = align(y1, &**c1, y2, &**c2, Type::free_vars, Type::subst);
                self.equiv(&c1, &c2)
            }
            (
                Type::Refined {
                    binder: x1,
                    base: b1,
                    formula: f1,
                },
                Type::Refined {
                    binder: x2,
                    base: b2,
                    formula: f2,
                },
            ) => {
                if !self.equiv(b1, b2) {
                    return false;
                }
                let (f1, f2) = align(x1, f1, x2, f2, |f| f.free_vars(), |f, x, v| f.subst(x, v));
                f1.equivalent(&f2)
            }
            _ => false,
        }
    }
}

/// Renames the binders of two bodies to a common name.
fn align<T: Clone>(
    y1: &str,
    b1: &T,
    y2: &str,
    b2: &T,
    fv: impl Fn(&T) -> BTreeSet<Name>,
    subst: impl Fn(&T, &str, &Value) -> T,
) -> (T, T) {
    if y1 == y2 {
        return (b1.clone(), b2.clone());
    }
    let fv2 = fv(b2);
    if !fv2.contains(y1) {
        return (b1.clone(), subst(b2, y2, &Value::Var(y1.to_string())));
    }
    let mut avoid = fv(b1);
    avoid.extend(fv2);
    avoid.insert(y1.to_string());
    avoid.insert(y2.to_string());
    let z = Value::Var(fresh(y1, &avoid));
    (subst(b1, y1, &z), subst(b2, y2, &z))
}
