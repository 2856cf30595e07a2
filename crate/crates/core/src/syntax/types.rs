use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::formula::Formula;
use super::names::{canonical, fresh};
use super::value::{Name, Value, UNIT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Qualifier {
    Lin,
    Un,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Direction {
    In,
    Out,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::In => Direction::Out,
            Direction::Out => Direction::In,
        }
    }
}

/// Types: base types, `end`, dependent sessions, refinements and
/// equi-recursive types.
///
/// In a session `q ?y:T.U` (or `!`) the binder `y` scopes over `U` only; in
/// a refinement `{x:T | φ}` the binder scopes over `φ` only.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Type {
    Unit(Name),
    End,
    Session {
        qual: Qualifier,
        dir: Direction,
        binder: Name,
        payload: Box<Type>,
        cont: Box<Type>,
    },
    Refined {
        binder: Name,
        base: Box<Type>,
        formula: Formula,
    },
    Var(Name),
    Rec(Name, Box<Type>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TypeShapeError {
    #[error("type `{0}` is not a recursive type")]
    NotRecursive(String),
    #[error("recursive type `{0}` is not contractive")]
    NotContractive(String),
    #[error("recursive type `{0}` unfolds to a refinement")]
    RecursiveRefinement(String),
}

impl Type {
    pub fn unit() -> Type {
        Type::Unit(UNIT.to_string())
    }

    pub fn base(name: impl Into<Name>) -> Type {
        Type::Unit(name.into())
    }

    pub fn session(
        qual: Qualifier,
        dir: Direction,
        binder: impl Into<Name>,
        payload: Type,
        cont: Type,
    ) -> Type {
        Type::Session {
            qual,
            dir,
            binder: binder.into(),
            payload: Box::new(payload),
            cont: Box::new(cont),
        }
    }

    pub fn refined(binder: impl Into<Name>, base: Type, formula: Formula) -> Type {
        Type::Refined {
            binder: binder.into(),
            base: Box::new(base),
            formula,
        }
    }

    pub fn rec(var: impl Into<Name>, body: Type) -> Type {
        Type::Rec(var.into(), Box::new(body))
    }

    /// Free program variables.
    pub fn free_vars(&self) -> BTreeSet<Name> {
        let mut acc = BTreeSet::new();
        self.collect_free(&mut acc);
        acc
    }

    pub(crate) fn collect_free(&self, acc: &mut BTreeSet<Name>) {
        match self {
            Type::Unit(_) | Type::End | Type::Var(_) => {}
            Type::Session {
                binder,
                payload,
                cont,
                ..
            } => {
                payload.collect_free(acc);
                let mut inner = cont.free_vars();
                inner.remove(binder);
                acc.extend(inner);
            }
            Type::Refined {
                binder,
                base,
                formula,
            } => {
                base.collect_free(acc);
                let mut inner = formula.free_vars();
                inner.remove(binder);
                acc.extend(inner);
            }
            Type::Rec(_, body) => body.collect_free(acc),
        }
    }

    /// Every program-variable name occurring in the type, bound or free.
    pub(crate) fn collect_names(&self, acc: &mut BTreeSet<Name>) {
        match self {
            Type::Unit(_) | Type::End | Type::Var(_) => {}
            Type::Session {
                binder,
                payload,
                cont,
                ..
            } => {
                acc.insert(binder.clone());
                payload.collect_names(acc);
                cont.collect_names(acc);
            }
            Type::Refined {
                binder,
                base,
                formula,
            } => {
                acc.insert(binder.clone());
                base.collect_names(acc);
                formula.collect_free(acc);
            }
            Type::Rec(_, body) => body.collect_names(acc),
        }
    }

    pub fn free_type_vars(&self) -> BTreeSet<Name> {
        match self {
            Type::Unit(_) | Type::End => BTreeSet::new(),
            Type::Var(a) => BTreeSet::from([a.clone()]),
            Type::Session { payload, cont, .. } => {
                let mut s = payload.free_type_vars();
                s.extend(cont.free_type_vars());
                s
            }
            Type::Refined { base, .. } => base.free_type_vars(),
            Type::Rec(a, body) => {
                let mut s = body.free_type_vars();
                s.remove(a);
                s
            }
        }
    }

    /// Capture-avoiding `self[v/x]` on program variables.
    pub fn subst(&self, x: &str, v: &Value) -> Type {
        match self {
            Type::Unit(_) | Type::End | Type::Var(_) => self.clone(),
            Type::Session {
                qual,
                dir,
                binder,
                payload,
                cont,
            } => {
                let payload = payload.subst(x, v);
                let (binder, cont) =
                    subst_under_binder(binder, &**cont, x, v, Type::free_vars, Type::subst);
                Type::session(*qual, *dir, binder, payload, cont)
            }
            Type::Refined {
                binder,
                base,
                formula,
            } => {
                let base = base.subst(x, v);
                let (binder, formula) =
                    subst_under_binder(binder, formula, x, v, Formula::free_vars, Formula::subst);
                Type::refined(binder, base, formula)
            }
            Type::Rec(a, body) => Type::rec(a.clone(), body.subst(x, v)),
        }
    }

    /// Capture-avoiding `self[u/a]` on type variables.
    pub fn subst_tvar(&self, a: &str, u: &Type) -> Type {
        match self {
            Type::Var(b) if b == a => u.clone(),
            Type::Unit(_) | Type::End | Type::Var(_) => self.clone(),
            Type::Session {
                qual,
                dir,
                binder,
                payload,
                cont,
            } => {
                let payload = payload.subst_tvar(a, u);
                let fv_u = u.free_vars();
                let (binder, cont) = if fv_u.contains(binder) && cont.free_type_vars().contains(a) {
                    let mut avoid = fv_u;
                    cont.collect_names(&mut avoid);
                    avoid.insert(binder.clone());
                    let b2 = fresh(binder, &avoid);
                    let c2 = cont.subst(binder, &Value::Var(b2.clone()));
                    (b2, c2)
                } else {
                    (binder.clone(), (**cont).clone())
                };
                Type::session(*qual, *dir, binder, payload, cont.subst_tvar(a, u))
            }
            Type::Refined {
                binder,
                base,
                formula,
            } => Type::refined(binder.clone(), base.subst_tvar(a, u), formula.clone()),
            Type::Rec(b, body) => {
                if b == a {
                    return self.clone();
                }
                let ftv_u = u.free_type_vars();
                if ftv_u.contains(b) {
                    let mut avoid = ftv_u;
                    avoid.extend(body.free_type_vars());
                    avoid.insert(a.to_string());
                    avoid.insert(b.clone());
                    let b2 = fresh(b, &avoid);
                    let body2 = body.subst_tvar(b, &Type::Var(b2.clone()));
                    Type::rec(b2, body2.subst_tvar(a, u))
                } else {
                    Type::rec(b.clone(), body.subst_tvar(a, u))
                }
            }
        }
    }

    /// One-step unfolding `μa.T ↦ T[μa.T/a]`.
    pub fn unfold(&self) -> Result<Type, TypeShapeError> {
        match self {
            Type::Rec(a, body) => Ok(body.subst_tvar(a, self)),
            other => Err(TypeShapeError::NotRecursive(other.to_string())),
        }
    }

    /// Unfolds until the head is not a `rec`. Terminates on contractive types.
    pub fn unfold_head(&self) -> Type {
        let mut t = self.clone();
        // A contractive chain of n binders unfolds in n steps.
        for _ in 0..1024 {
            match t {
                Type::Rec(..) => t = t.unfold().expect("rec head"),
                _ => return t,
            }
        }
        t
    }

    /// The dual endpoint type; `None` for base types and refinements.
    pub fn dual(&self) -> Option<Type> {
        match self {
            Type::Session {
                qual,
                dir,
                binder,
                payload,
                cont,
            } => Some(Type::session(
                *qual,
                dir.flip(),
                binder.clone(),
                (**payload).clone(),
                cont.dual()?,
            )),
            Type::End => Some(Type::End),
            Type::Rec(a, body) => Some(Type::rec(a.clone(), body.dual()?)),
            Type::Var(a) => Some(Type::Var(a.clone())),
            Type::Unit(_) | Type::Refined { .. } => None,
        }
    }

    /// `un(T)` read syntactically: base types, `end` and `un` sessions.
    pub fn is_unrestricted(&self) -> bool {
        matches!(
            self,
            Type::Unit(_)
                | Type::End
                | Type::Session {
                    qual: Qualifier::Un,
                    ..
                }
        )
    }

    /// `un(T)` closed under type equivalence: a recursive type is
    /// unrestricted when its unfolding is.
    pub fn is_unrestricted_unfolded(&self) -> bool {
        self.unfold_head().is_unrestricted()
    }

    pub fn is_refinement(&self) -> bool {
        matches!(self, Type::Refined { .. })
    }

    /// Rejects `rec a1 ... rec an. a1` and `rec a1 ... rec an. {x:T | φ}`
    /// anywhere in the type.
    pub fn check_shape(&self) -> Result<(), TypeShapeError> {
        match self {
            Type::Unit(_) | Type::End | Type::Var(_) => Ok(()),
            Type::Session { payload, cont, .. } => {
                payload.check_shape()?;
                cont.check_shape()
            }
            Type::Refined { base, .. } => base.check_shape(),
            Type::Rec(..) => {
                let mut binders = Vec::new();
                let mut t = self;
                while let Type::Rec(a, body) = t {
                    binders.push(a.as_str());
                    t = body;
                }
                match t {
                    Type::Var(b) if binders.contains(&b.as_str()) => {
                        Err(TypeShapeError::NotContractive(self.to_string()))
                    }
                    Type::Refined { .. } => {
                        Err(TypeShapeError::RecursiveRefinement(self.to_string()))
                    }
                    other => other.check_shape(),
                }
            }
        }
    }

    /// Renames every bound name (program and type variables) to a canonical
    /// name determined by binding order. Alpha-equivalent types normalize to
    /// equal values.
    pub fn normalized(&self) -> Type {
        let mut k = 0;
        self.normalize_from(&mut k)
    }

    pub(crate) fn normalize_from(&self, k: &mut usize) -> Type {
        match self {
            Type::Unit(_) | Type::End | Type::Var(_) => self.clone(),
            Type::Session {
                qual,
                dir,
                binder,
                payload,
                cont,
            } => {
                let payload = payload.normalize_from(k);
                let b = canonical(*k);
                *k += 1;
                let cont = cont.subst(binder, &Value::Var(b.clone())).normalize_from(k);
                Type::session(*qual, *dir, b, payload, cont)
            }
            Type::Refined {
                binder,
                base,
                formula,
            } => {
                let base = base.normalize_from(k);
                let b = canonical(*k);
                *k += 1;
                let formula = formula.subst(binder, &Value::Var(b.clone()));
                Type::refined(b, base, formula)
            }
            Type::Rec(a, body) => {
                let b = canonical(*k);
                *k += 1;
                Type::rec(
                    b.clone(),
                    body.subst_tvar(a, &Type::Var(b)).normalize_from(k),
                )
            }
        }
    }

    pub fn alpha_eq(&self, other: &Type) -> bool {
        self.normalized() == other.normalized()
    }
}

/// Shared binder case of capture-avoiding substitution: renames `binder`
/// when it would capture a free variable of `v`.
pub(crate) fn subst_under_binder<T>(
    binder: &str,
    body: &T,
    x: &str,
    v: &Value,
    fv: impl Fn(&T) -> BTreeSet<Name>,
    subst: impl Fn(&T, &str, &Value) -> T,
) -> (Name, T)
where
    T: Clone,
{
    if binder == x {
        return (binder.to_string(), body.clone());
    }
    let body_fv = fv(body);
    if !body_fv.contains(x) {
        return (binder.to_string(), body.clone());
    }
    let mut v_fv = BTreeSet::new();
    v.collect_free(&mut v_fv);
    if v_fv.contains(binder) {
        let mut avoid = v_fv;
        avoid.extend(body_fv);
        avoid.insert(x.to_string());
        avoid.insert(binder.to_string());
        let b2 = fresh(binder, &avoid);
        let renamed = subst(body, binder, &Value::Var(b2.clone()));
        (b2, subst(&renamed, x, v))
    } else {
        (binder.to_string(), subst(body, x, v))
    }
}

impl fmt::Display for Qualifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Qualifier::Lin => write!(f, "lin"),
            Qualifier::Un => write!(f, "un"),
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Unit(n) => write!(f, "{n}"),
            Type::End => write!(f, "end"),
            Type::Var(a) => write!(f, "{a}"),
            Type::Rec(a, body) => write!(f, "rec {a}. {body}"),
            Type::Refined {
                binder,
                base,
                formula,
            } => write!(f, "{{{binder}:{base} | {formula}}}"),
            Type::Session {
                qual,
                dir,
                binder,
                payload,
                cont,
            } => {
                let d = match dir {
                    Direction::In => '?',
                    Direction::Out => '!',
                };
                write!(f, "{qual} {d}{binder}:")?;
                if matches!(**payload, Type::Session { .. } | Type::Rec(..)) {
                    write!(f, "({payload})")?;
                } else {
                    write!(f, "{payload}")?;
                }
                write!(f, ". {cont}")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat() -> Type {
        Type::base("nat")
    }

    fn charge(c: &str, x: &str) -> Formula {
        Formula::atom("charge", vec![Value::var(c), Value::var(x)])
    }

    fn store_type(dir: Direction) -> Type {
        Type::session(
            Qualifier::Lin,
            dir,
            "p",
            Type::base("product"),
            Type::session(
                Qualifier::Lin,
                dir,
                "c",
                Type::base("ccard"),
                Type::session(
                    Qualifier::Lin,
                    dir,
                    "a",
                    Type::refined("x", nat(), charge("c", "x")),
                    Type::End,
                ),
            ),
        )
    }

    #[test]
    fn free_vars_respect_binders() {
        let t = Type::refined("a", nat(), charge("c", "a"));
        assert_eq!(t.free_vars(), BTreeSet::from(["c".to_string()]));
        assert!(store_type(Direction::Out).free_vars().is_empty());
    }

    #[test]
    fn dual_of_store_channel() {
        assert_eq!(
            store_type(Direction::Out).dual(),
            Some(store_type(Direction::In))
        );
        assert_eq!(Type::End.dual(), Some(Type::End));
        assert_eq!(
            Type::refined("x", Type::unit(), Formula::atom("A", vec![Value::var("x")])).dual(),
            None
        );
        assert_eq!(nat().dual(), None);
    }

    #[test]
    fn unrestricted() {
        assert!(Type::End.is_unrestricted());
        assert!(!store_type(Direction::In).is_unrestricted());
        let r = Type::rec(
            "t",
            Type::session(
                Qualifier::Un,
                Direction::In,
                "y",
                nat(),
                Type::Var("t".into()),
            ),
        );
        assert!(!r.is_unrestricted());
        assert!(r.is_unrestricted_unfolded());
    }

    #[test]
    fn unfolding() {
        let body = Type::session(
            Qualifier::Un,
            Direction::Out,
            "y",
            nat(),
            Type::Var("a".into()),
        );
        let r = Type::rec("a", body);
        let expected = Type::session(Qualifier::Un, Direction::Out, "y", nat(), r.clone());
        assert_eq!(r.unfold().unwrap(), expected);

        let inner = Type::rec(
            "b",
            Type::session(
                Qualifier::Un,
                Direction::Out,
                "y",
                nat(),
                Type::Var("b".into()),
            ),
        );
        assert_eq!(Type::rec("a", inner.clone()).unfold().unwrap(), inner);
        assert!(matches!(
            Type::End.unfold(),
            Err(TypeShapeError::NotRecursive(_))
        ));
    }

    #[test]
    fn shape_checks() {
        let bad = Type::rec("a", Type::rec("b", Type::Var("a".into())));
        assert!(matches!(
            bad.check_shape(),
            Err(TypeShapeError::NotContractive(_))
        ));
        let bad2 = Type::rec("a", Type::refined("x", nat(), Formula::One));
        assert!(matches!(
            bad2.check_shape(),
            Err(TypeShapeError::RecursiveRefinement(_))
        ));
        let ok = Type::rec(
            "a",
            Type::session(
                Qualifier::Un,
                Direction::In,
                "y",
                nat(),
                Type::Var("a".into()),
            ),
        );
        assert!(ok.check_shape().is_ok());
    }

    #[test]
    fn substitution_into_refinement_and_capture() {
        let t = Type::session(
            Qualifier::Lin,
            Direction::Out,
            "w",
            Type::refined(
                "z",
                nat(),
                Formula::atom("A", vec![Value::var("a"), Value::var("z")]),
            ),
            Type::End,
        );
        let t5 = t.subst("a", &Value::int(5));
        assert_eq!(
            t5,
            Type::session(
                Qualifier::Lin,
                Direction::Out,
                "w",
                Type::refined(
                    "z",
                    nat(),
                    Formula::atom("A", vec![Value::int(5), Value::var("z")])
                ),
                Type::End,
            )
        );
        // substituting `z` for `a` must rename the refinement binder
        let tz = t.subst("a", &Value::var("z"));
        if let Type::Session { payload, .. } = &tz {
            assert_eq!(payload.free_vars(), BTreeSet::from(["z".to_string()]));
        } else {
            panic!("shape");
        }
    }

    #[test]
    fn printing() {
        assert_eq!(
            store_type(Direction::Out).to_string(),
            "lin !p:product. lin !c:ccard. lin !a:{x:nat | charge(c,x)}. end"
        );
    }
}
