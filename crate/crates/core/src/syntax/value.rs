use std::fmt;

use serde::Serialize;

/// Identifiers for program variables, channel endpoints, predicates and type
/// variables.
pub type Name = String;

/// The base type carried by integer literals.
pub const NAT: &str = "nat";
/// The built-in unit type.
pub const UNIT: &str = "unit";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Constant {
    Int(u64),
    Named(Name),
}

/// A constant tagged with the base type it inhabits.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Literal {
    pub constant: Constant,
    pub base: Name,
}

/// Values exchanged on channels and used as predicate arguments.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Value {
    Var(Name),
    Unit,
    Lit(Literal),
    Sum(Box<Value>, Box<Value>),
}

impl Value {
    pub fn var(name: impl Into<Name>) -> Value {
        Value::Var(name.into())
    }

    pub fn int(n: u64) -> Value {
        Value::Lit(Literal {
            constant: Constant::Int(n),
            base: NAT.to_string(),
        })
    }

    pub fn named(constant: impl Into<Name>, base: impl Into<Name>) -> Value {
        Value::Lit(Literal {
            constant: Constant::Named(constant.into()),
            base: base.into(),
        })
    }

    /// Builds `left + right`, folding the sum when both sides are integer
    /// literals.
    pub fn sum(left: Value, right: Value) -> Value {
        if let (Some(a), Some(b)) = (left.as_int(), right.as_int()) {
            if let Some(n) = a.checked_add(b) {
                return Value::int(n);
            }
        }
        Value::Sum(Box::new(left), Box::new(right))
    }

    pub fn as_int(&self) -> Option<u64> {
        match self {
            Value::Lit(Literal {
                constant: Constant::Int(n),
                ..
            }) => Some(*n),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Value::Var(x) => Some(x),
            _ => None,
        }
    }

    pub(crate) fn collect_free(&self, acc: &mut std::collections::BTreeSet<Name>) {
        match self {
            Value::Var(x) => {
                acc.insert(x.clone());
            }
            Value::Unit | Value::Lit(_) => {}
            Value::Sum(l, r) => {
                l.collect_free(acc);
                r.collect_free(acc);
            }
        }
    }

    /// `self[v/x]`, re-folding sums whose operands became literals.
    pub fn subst(&self, x: &str, v: &Value) -> Value {
        match self {
            Value::Var(y) if y == x => v.clone(),
            Value::Var(_) | Value::Unit | Value::Lit(_) => self.clone(),
            Value::Sum(l, r) => Value::sum(l.subst(x, v), r.subst(x, v)),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Var(x) => write!(f, "{x}"),
            Value::Unit => write!(f, "()"),
            Value::Lit(Literal {
                constant: Constant::Int(n),
                ..
            }) => write!(f, "{n}"),
            Value::Lit(Literal {
                constant: Constant::Named(c),
                base,
            }) => write!(f, "`{c}:{base}"),
            Value::Sum(l, r) => {
                write!(f, "{l}+")?;
                if matches!(**r, Value::Sum(..)) {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
        }
    }
}
