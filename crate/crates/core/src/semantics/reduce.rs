use std::collections::BTreeSet;
use std::fmt;

use rand::rngs::StdRng;
use rand::Rng;
use serde::Serialize;

use super::canonical::{assert_chain, canonicalize, CanonicalProcess};
use crate::syntax::{Atom, Direction, Name, Process, Type, Value};

/// A reduction site, with thread indices relative to the form obtained by
/// unfolding the replications listed in `unfolded` once each, in order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Redex {
    pub kind: RedexKind,
    pub unfolded: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "rule")]
pub enum RedexKind {
    Com {
        restriction: usize,
        sender: usize,
        receiver: usize,
    },
    #[serde(rename = "Assert")]
    AssertCut { thread: usize, atom: Atom },
}

impl RedexKind {
    pub fn rule(&self) -> &'static str {
        match self {
            RedexKind::Com { .. } => "Com",
            RedexKind::AssertCut { .. } => "Assert",
        }
    }

    fn threads(&self) -> Vec<usize> {
        match self {
            RedexKind::Com {
                sender, receiver, ..
            } => vec![*sender, *receiver],
            RedexKind::AssertCut { thread, .. } => vec![*thread],
        }
    }
}

/// How `reduce_step` picks among several redexes.
#[derive(Debug)]
pub enum Policy {
    /// The redex whose leftmost thread comes first; communication before
    /// assertion on ties.
    Leftmost,
    Seeded(Box<StdRng>),
}

impl Policy {
    pub fn seeded(seed: u64) -> Policy {
        use rand::SeedableRng;
        Policy::Seeded(Box::new(StdRng::seed_from_u64(seed)))
    }

    pub(crate) fn pick(&mut self, n: usize) -> usize {
        match self {
            Policy::Leftmost => 0,
            Policy::Seeded(rng) => rng.gen_range(0..n),
        }
    }
}

/// The sender and receiver endpoints of restriction `r`, decided by the
/// direction of its annotation after unfolding.
fn endpoints(x: &Name, y: &Name, annot: &Type) -> Option<(Name, Name)> {
    match annot.unfold_head() {
        Type::Session {
            dir: Direction::Out,
            ..
        } => Some((x.clone(), y.clone())),
        Type::Session {
            dir: Direction::In, ..
        } => Some((y.clone(), x.clone())),
        _ => None,
    }
}

fn is_output_on(p: &Process, c: &str) -> bool {
    matches!(p, Process::Output { chan: Value::Var(x), .. } if x == c)
}

fn is_input_on(p: &Process, c: &str) -> bool {
    matches!(p, Process::Input { chan: Value::Var(x), .. } if x == c)
}

fn unfold_all(c: &CanonicalProcess, unfolded: &[usize]) -> (CanonicalProcess, Vec<Option<usize>>) {
    let mut view = c.clone();
    let mut origin = vec![None; c.threads.len()];
    for &i in unfolded {
        let new = view.unfold_replica(i);
        origin.resize(new.end, Some(i));
    }
    (view, origin)
}

fn redexes_in(view: &CanonicalProcess, origin: &[Option<usize>], unfolded: &[usize]) -> Vec<Redex> {
    let wanted: BTreeSet<usize> = unfolded.iter().copied().collect();
    let uses_exactly = |ts: &[usize]| -> bool {
        let used: BTreeSet<usize> = ts.iter().filter_map(|&t| origin[t]).collect();
        used == wanted
    };
    let mut found: Vec<(usize, u8, Redex)> = Vec::new();
    for (k, r) in view.restrictions.iter().enumerate() {
        let Some((snd, rcv)) = endpoints(&r.x, &r.y, &r.annot) else {
            continue;
        };
        for (s, ps) in view.threads.iter().enumerate() {
            if !is_output_on(ps, &snd) {
                continue;
            }
            for (t, pt) in view.threads.iter().enumerate() {
                if is_input_on(pt, &rcv) && uses_exactly(&[s, t]) {
                    let kind = RedexKind::Com {
                        restriction: k,
                        sender: s,
                        receiver: t,
                    };
                    found.push((
                        s.min(t),
                        0,
                        Redex {
                            kind,
                            unfolded: unfolded.to_vec(),
                        },
                    ));
                }
            }
        }
    }
    for (t, p) in view.threads.iter().enumerate() {
        if !uses_exactly(&[t]) {
            continue;
        }
        let (atoms, _) = assert_chain(p);
        let mut seen = BTreeSet::new();
        for a in atoms {
            if view.assumptions.contains(&a) && seen.insert(a.clone()) {
                let kind = RedexKind::AssertCut { thread: t, atom: a };
                found.push((
                    t,
                    1,
                    Redex {
                        kind,
                        unfolded: unfolded.to_vec(),
                    },
                ));
            }
        }
    }
    found.sort_by_key(|(pos, rank, _)| (*pos, *rank));
    found.into_iter().map(|(_, _, r)| r).collect()
}

/// All redexes of `c`: first those among its threads, then those that need
/// one replication, then two, unfolded once.
pub fn find_redexes(c: &CanonicalProcess) -> Vec<Redex> {
    let repl: Vec<usize> = (0..c.threads.len())
        .filter(|&i| matches!(c.threads[i], Process::Repl(_)))
        .collect();
    let mut views: Vec<Vec<usize>> = vec![vec![]];
    views.extend(repl.iter().map(|&i| vec![i]));
    for (n, &i) in repl.iter().enumerate() {
        for &j in &repl[n + 1..] {
            views.push(vec![i, j]);
        }
    }
    let mut out = Vec::new();
    for unfolded in views {
        let (view, origin) = unfold_all(c, &unfolded);
        out.extend(redexes_in(&view, &origin, &unfolded));
    }
    out
}

/// Fires `redex` on `c` and returns the resulting canonical form.
pub fn fire(c: &CanonicalProcess, redex: &Redex) -> CanonicalProcess {
    let (mut view, _) = unfold_all(c, &redex.unfolded);
    match &redex.kind {
        RedexKind::Com {
            restriction,
            sender,
            receiver,
        } => {
            let (v, p) = match &view.threads[*sender] {
                Process::Output { value, cont, .. } => (value.clone(), (**cont).clone()),
                other => panic!("thread {sender} is not an output: {other}"),
            };
            let q = match &view.threads[*receiver] {
                Process::Input { binder, cont, .. } => cont.subst(binder, &v),
                other => panic!("thread {receiver} is not an input: {other}"),
            };
            let r = &mut view.restrictions[*restriction];
            r.annot = continuation(&r.annot, &v);
            r.peer = r.peer.as_ref().map(|t| continuation(t, &v));
            view.threads[*sender] = p;
            view.threads[*receiver] = q;
        }
        RedexKind::AssertCut { thread, atom } => view.cut(*thread, atom),
    }
    view.recanonicalize()
}

/// `U[v/w]` for a type unfolding to `q ?w:T.U` or `q !w:T.U`.
fn continuation(t: &Type, v: &Value) -> Type {
    match t.unfold_head() {
        Type::Session { binder, cont, .. } => cont.subst(&binder, v),
        other => panic!("restriction annotation `{other}` is not a session type"),
    }
}

/// One reduction step: canonicalize, then fire the redex chosen by the
/// policy. `None` when no redex exists.
pub fn reduce_step(p: &Process, policy: &mut Policy) -> Option<(Process, Redex)> {
    let c = canonicalize(p);
    let redexes = find_redexes(&c);
    if redexes.is_empty() {
        return None;
    }
    let r = redexes[policy.pick(redexes.len())].clone();
    Some((fire(&c, &r).to_process(), r))
}

/// Human-readable description of a redex in `c`, e.g. `s1!100 -> s2?a`.
pub fn describe(c: &CanonicalProcess, redex: &Redex) -> String {
    let (view, _) = unfold_all(c, &redex.unfolded);
    match &redex.kind {
        RedexKind::Com {
            sender, receiver, ..
        } => {
            let out = match &view.threads[*sender] {
                Process::Output { chan, value, .. } => format!("{chan}!{value}"),
                _ => String::new(),
            };
            let inp = match &view.threads[*receiver] {
                Process::Input { chan, binder, .. } => format!("{chan}?{binder}"),
                _ => String::new(),
            };
            format!("{out} -> {inp}")
        }
        RedexKind::AssertCut { atom, .. } => atom.to_string(),
    }
}

impl fmt::Display for Redex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.rule())?;
        match &self.kind {
            RedexKind::Com {
                restriction,
                sender,
                receiver,
            } => write!(
                f,
                " on restriction {restriction}, threads {sender} -> {receiver}"
            )?,
            RedexKind::AssertCut { thread, atom } => write!(f, " {atom} in thread {thread}")?,
        }
        if !self.unfolded.is_empty() {
            write!(f, " (unfolding {:?})", self.unfolded)?;
        }
        Ok(())
    }
}

impl Redex {
    /// Thread indices taking part, in the unfolded view.
    pub fn threads(&self) -> Vec<usize> {
        self.kind.threads()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{Formula, Qualifier};

    fn a(p: &str) -> Formula {
        Formula::atom(p, vec![])
    }

    #[test]
    fn inaction_has_no_redex() {
        assert!(reduce_step(&Process::Inact, &mut Policy::Leftmost).is_none());
    }

    #[test]
    fn assert_cut() {
        let q = Process::output("k", Value::Unit, Process::Inact);
        let p = Process::assume(
            a("A"),
            Process::par(Process::assert(a("A"), Process::Inact), q.clone()),
        );
        let (next, r) = reduce_step(&p, &mut Policy::Leftmost).unwrap();
        assert_eq!(r.kind.rule(), "Assert");
        assert_eq!(next, q);
    }

    #[test]
    fn communication_substitutes_in_type_and_receiver() {
        let t = Type::session(
            Qualifier::Lin,
            Direction::Out,
            "w",
            Type::base("nat"),
            Type::session(
                Qualifier::Lin,
                Direction::Out,
                "u",
                Type::refined(
                    "z",
                    Type::base("nat"),
                    Formula::atom("A", vec![Value::var("w"), Value::var("z")]),
                ),
                Type::End,
            ),
        );
        let p = Process::restrict(
            "x",
            "y",
            t,
            Process::par(
                Process::output(
                    "x",
                    Value::int(5),
                    Process::output("x", Value::int(1), Process::Inact),
                ),
                Process::input(
                    "y",
                    "n",
                    Process::input(
                        "y",
                        "m",
                        Process::output("k", Value::var("n"), Process::Inact),
                    ),
                ),
            ),
        );
        let (next, _) = reduce_step(&p, &mut Policy::Leftmost).unwrap();
        let c = canonicalize(&next);
        let expected = Type::session(
            Qualifier::Lin,
            Direction::Out,
            "u",
            Type::refined(
                "z",
                Type::base("nat"),
                Formula::atom("A", vec![Value::int(5), Value::var("z")]),
            ),
            Type::End,
        );
        assert_eq!(c.restrictions[0].annot, expected);
        assert_eq!(
            c.threads[1],
            Process::input(
                "y",
                "m",
                Process::output("k", Value::int(5), Process::Inact)
            )
        );
    }

    #[test]
    fn replicated_receiver_is_unfolded() {
        let t = Type::rec(
            "t",
            Type::session(
                Qualifier::Un,
                Direction::In,
                "w",
                Type::unit(),
                Type::Var("t".into()),
            ),
        );
        let p = Process::restrict(
            "r",
            "s",
            t.clone(),
            Process::par(
                Process::output("s", Value::Unit, Process::Inact),
                Process::repl(Process::input("r", "z", Process::Inact)),
            ),
        );
        let c = canonicalize(&p);
        let rs = find_redexes(&c);
        assert_eq!(rs.len(), 1);
        assert_eq!(rs[0].unfolded, vec![1]);
        let next = fire(&c, &rs[0]);
        assert_eq!(
            next.threads,
            vec![Process::repl(Process::input("r", "z", Process::Inact))]
        );
        assert_eq!(next.restrictions[0].annot, t);
    }
}
