//! proptest strategies for syntax that parses back: identifiers avoid
//! keywords, types are contractive and closed over the given variables.

use linsess::parser::is_keyword;
use linsess::syntax::{Context, Direction, Entry, Formula, Name, Process, Qualifier, Type, Value};
use proptest::prelude::*;

pub fn ident() -> impl Strategy<Value = Name> {
    "[a-z][a-z0-9]{0,3}".prop_filter("not a keyword", |s| !is_keyword(s))
}

pub fn pred() -> impl Strategy<Value = Name> {
    prop::sample::select(vec!["A", "B", "P", "charge"]).prop_map(String::from)
}

pub fn base() -> impl Strategy<Value = Name> {
    prop::sample::select(vec!["nat", "ccard", "unit"]).prop_map(String::from)
}

/// Values over the variables `vars`.
pub fn value(vars: Vec<Name>) -> BoxedStrategy<Value> {
    let mut leaves: Vec<BoxedStrategy<Value>> = vec![
        (0u64..200).prop_map(Value::int).boxed(),
        prop::sample::select(vec!["k", "visa"])
            .prop_map(|c| Value::named(c, "ccard"))
            .boxed(),
        Just(Value::Unit).boxed(),
    ];
    if !vars.is_empty() {
        leaves.push(prop::sample::select(vars).prop_map(Value::var).boxed());
    }
    let leaf = prop::strategy::Union::new(leaves);
    leaf.prop_recursive(2, 4, 2, |inner| {
        (inner.clone(), inner).prop_map(|(a, b)| Value::sum(a, b))
    })
    .boxed()
}

pub fn formula(vars: Vec<Name>) -> BoxedStrategy<Formula> {
    let atom = (pred(), prop::collection::vec(value(vars), 0..3))
        .prop_map(|(p, args)| Formula::atom(p, args));
    prop_oneof![1 => Just(Formula::One), 6 => atom]
        .prop_recursive(3, 8, 2, |inner| {
            (inner.clone(), inner).prop_map(|(a, b)| Formula::tensor(a, b))
        })
        .boxed()
}

fn qualifier() -> impl Strategy<Value = Qualifier> {
    prop_oneof![Just(Qualifier::Lin), Just(Qualifier::Un)]
}

fn direction() -> impl Strategy<Value = Direction> {
    prop_oneof![Just(Direction::Out), Just(Direction::In)]
}

/// Payload types: bases, refinements and (non-recursive) sessions.
fn payload(vars: Vec<Name>, depth: u32) -> BoxedStrategy<Type> {
    let refined = (ident(), base()).prop_flat_map(move |(x, b)| {
        let mut vs = vars.clone();
        vs.push(x.clone());
        formula(vs).prop_map(move |f| Type::refined(x.clone(), Type::base(b.clone()), f))
    });
    if depth == 0 {
        prop_oneof![3 => base().prop_map(Type::base), 1 => refined].boxed()
    } else {
        prop_oneof![
            3 => base().prop_map(Type::base),
            1 => refined,
            1 => session(Vec::new(), Vec::new(), depth - 1),
        ]
        .boxed()
    }
}

/// Session types whose free variables are in `vars`; `tvars` are the
/// enclosing recursion variables, each allowed only under a prefix.
fn session(vars: Vec<Name>, tvars: Vec<Name>, depth: u32) -> BoxedStrategy<Type> {
    let mut ends: Vec<BoxedStrategy<Type>> = vec![Just(Type::End).boxed()];
    if !tvars.is_empty() {
        ends.push(
            prop::sample::select(tvars.clone())
                .prop_map(Type::Var)
                .boxed(),
        );
    }
    let end = prop::strategy::Union::new(ends).boxed();
    if depth == 0 {
        return end;
    }
    let step = (
        qualifier(),
        direction(),
        ident(),
        payload(vars.clone(), depth - 1),
    )
        .prop_flat_map(move |(q, d, w, p)| {
            let mut vs = vars.clone();
            vs.push(w.clone());
            session(vs, tvars.clone(), depth - 1)
                .prop_map(move |u| Type::session(q, d, w.clone(), p.clone(), u))
        });
    prop_oneof![1 => end, 3 => step].boxed()
}

/// Closed well-formed types over `vars`, possibly recursive.
pub fn ty(vars: Vec<Name>) -> BoxedStrategy<Type> {
    let v2 = vars.clone();
    prop_oneof![
        2 => payload(vars.clone(), 2),
        3 => session(vars, Vec::new(), 3),
        1 => ("t[a-z]?".prop_filter("no keyword", |s| !is_keyword(s)), qualifier(), direction(), ident(), payload(v2.clone(), 1))
            .prop_flat_map(move |(a, q, d, w, p)| {
                let mut vs = v2.clone();
                vs.push(w.clone());
                session(vs, vec![a.clone()], 2).prop_map(move |u| {
                    Type::rec(a.clone(), Type::session(q, d, w.clone(), p.clone(), u))
                })
            }),
    ]
    .boxed()
}

/// Session types only.
pub fn session_ty(vars: Vec<Name>) -> BoxedStrategy<Type> {
    session(vars, Vec::new(), 3)
}

/// Well-formed contexts: each entry mentions only earlier names.
pub fn context() -> impl Strategy<Value = Context> {
    prop::collection::vec((ident(), 0u8..4), 0..5).prop_flat_map(|spec| {
        let mut parts: Vec<BoxedStrategy<Entry>> = Vec::new();
        let mut seen: Vec<Name> = Vec::new();
        for (x, kind) in spec {
            let vs = seen.clone();
            if kind == 0 {
                parts.push(formula(vs).prop_map(Entry::Resource).boxed());
            } else {
                let x2 = x.clone();
                parts.push(
                    ty(vs)
                        .prop_map(move |t| Entry::binding(x2.clone(), t))
                        .boxed(),
                );
                seen.push(x);
            }
        }
        parts.prop_map(Context::from_entries)
    })
}

/// Processes with free variables among `vars`.
pub fn process(vars: Vec<Name>) -> BoxedStrategy<Process> {
    process_at(vars, 4)
}

fn process_at(vars: Vec<Name>, depth: u32) -> BoxedStrategy<Process> {
    if depth == 0 {
        return Just(Process::Inact).boxed();
    }
    let chan = if vars.is_empty() {
        Just("k".to_string()).boxed()
    } else {
        prop::sample::select(vars.clone()).boxed()
    };
    let v1 = vars.clone();
    let v2 = vars.clone();
    let v3 = vars.clone();
    let v4 = vars.clone();
    let v5 = vars.clone();
    let d = depth - 1;
    prop_oneof![
        1 => Just(Process::Inact),
        3 => (chan.clone(), value(vars.clone()), process_at(vars.clone(), d))
            .prop_map(|(c, v, p)| Process::output(c, v, p)),
        3 => (chan, ident()).prop_flat_map(move |(c, z)| {
            let mut vs = v1.clone();
            vs.push(z.clone());
            process_at(vs, d).prop_map(move |p| Process::input(c.clone(), z.clone(), p))
        }),
        2 => (process_at(v2.clone(), d), process_at(v2, d)).prop_map(|(l, r)| Process::par(l, r)),
        1 => process_at(v3, d).prop_map(Process::repl),
        2 => (ident(), ident()).prop_filter("distinct endpoints", |(x, y)| x != y)
            .prop_flat_map(move |(x, y)| {
                let mut vs = v4.clone();
                vs.push(x.clone());
                vs.push(y.clone());
                (session_ty(v4.clone()), process_at(vs, d))
                    .prop_map(move |(t, p)| Process::restrict(x.clone(), y.clone(), t, p))
            }),
        1 => (formula(v5.clone()), process_at(v5.clone(), d)).prop_map(|(f, p)| Process::assume(f, p)),
        1 => (formula(vars.clone()), process_at(vars, d)).prop_map(|(f, p)| Process::assert(f, p)),
    ]
    .boxed()
}
