//! Shared fixtures: the bundled corpus and seeded generators of typing
//! judgments and of syntax.
#![allow(dead_code)]

pub mod strategies;

use std::path::PathBuf;

use linsess::parser::{parse_program, Program};
use linsess::syntax::{
    Atom, Context, Direction, Entry, Formula, Name, Process, Qualifier, Type, Value, NAT,
};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus_files() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "lsp"))
        .collect();
    v.sort();
    v
}

pub fn load(name: &str) -> Program {
    let src = std::fs::read_to_string(corpus_dir().join(name)).expect("corpus file");
    parse_program(&src).unwrap_or_else(|e| panic!("{name}: {e:?}"))
}

/// The expanded main process and declared context of a corpus file.
pub fn judgment_of(name: &str) -> (Context, Process) {
    let prog = load(name);
    (
        prog.initial_context(),
        prog.expand_macros().expect("expands"),
    )
}

/// A context and a process, not necessarily typable.
#[derive(Clone, Debug)]
pub struct Judgment {
    pub ctx: Context,
    pub proc: Process,
}

#[derive(Clone, Debug, Default)]
struct Scope {
    /// Unrestricted variables of base type, with the base.
    vals: Vec<(Name, Name)>,
    /// Linear channel endpoints and their current types.
    chans: Vec<(Name, Type)>,
    /// Unrestricted recursive endpoints.
    shared: Vec<(Name, Type)>,
    /// Formulae that still have to be asserted.
    atoms: Vec<Atom>,
}

/// Generates judgments by following the types of the channels in scope,
/// then mutating a share of them so that both verdicts are well represented.
pub struct JudgmentGen {
    rng: StdRng,
    next: usize,
    pub mutate_ratio: f64,
}

const BASES: [&str; 2] = ["nat", "ccard"];

impl JudgmentGen {
    pub fn new(seed: u64) -> JudgmentGen {
        JudgmentGen {
            rng: StdRng::seed_from_u64(seed),
            next: 0,
            mutate_ratio: 0.35,
        }
    }

    fn fresh(&mut self, stem: &str) -> Name {
        self.next += 1;
        format!("{stem}{}", self.next)
    }

    fn literal(&mut self, base: &str) -> Value {
        if base == NAT {
            Value::int(self.rng.gen_range(0..3))
        } else {
            Value::named(["k", "m"][self.rng.gen_range(0..2)], base)
        }
    }

    fn value_of_base(&mut self, s: &Scope, base: &str) -> Value {
        let vars: Vec<&(Name, Name)> = s.vals.iter().filter(|(_, b)| b == base).collect();
        if !vars.is_empty() && self.rng.gen_bool(0.5) {
            Value::var(vars[self.rng.gen_range(0..vars.len())].0.clone())
        } else {
            self.literal(base)
        }
    }

    fn atom(&mut self, s: &Scope, extra: Option<&str>) -> Atom {
        let mut args = Vec::new();
        if let Some(x) = extra {
            args.push(Value::var(x));
        }
        let want = self.rng.gen_range(0..=1);
        for _ in 0..want {
            let base = BASES[self.rng.gen_range(0..2)];
            args.push(self.value_of_base(s, base));
        }
        let pred = ["P", "Q"][self.rng.gen_range(0..2)];
        Atom::new(pred, args)
    }

    fn payload(&mut self, s: &Scope, earlier: &[(Name, Name)]) -> Type {
        let base = BASES[self.rng.gen_range(0..2)];
        match self.rng.gen_range(0..10) {
            0..=5 => Type::base(base),
            6..=8 => {
                let x = "x".to_string();
                let mut scope = s.clone();
                scope.vals.extend(earlier.iter().cloned());
                let a = self.atom(&scope, Some(&x));
                Type::refined(x, Type::base(NAT), Formula::Atom(a))
            }
            _ => Type::session(
                Qualifier::Lin,
                Direction::Out,
                "w",
                Type::base(NAT),
                Type::End,
            ),
        }
    }

    /// A short linear session, or occasionally an unrestricted recursive one.
    fn session_type(&mut self, s: &Scope) -> Type {
        if self.rng.gen_bool(0.1) {
            let dir = if self.rng.gen_bool(0.5) {
                Direction::Out
            } else {
                Direction::In
            };
            return Type::rec(
                "t",
                Type::session(
                    Qualifier::Un,
                    dir,
                    "w",
                    Type::base(NAT),
                    Type::Var("t".into()),
                ),
            );
        }
        let len = self.rng.gen_range(1..=2);
        let mut steps = Vec::new();
        let mut earlier: Vec<(Name, Name)> = Vec::new();
        for i in 0..len {
            let dir = if self.rng.gen_bool(0.5) {
                Direction::Out
            } else {
                Direction::In
            };
            let binder = format!("w{i}");
            let payload = self.payload(s, &earlier);
            if let Type::Unit(b) = &payload {
                earlier.push((binder.clone(), b.clone()));
            }
            steps.push((dir, binder, payload));
        }
        steps
            .into_iter()
            .rev()
            .fold(Type::End, |cont, (dir, b, p)| {
                Type::session(Qualifier::Lin, dir, b, p, cont)
            })
    }

    pub fn judgment(&mut self, depth: usize) -> Judgment {
        let mut s = Scope::default();
        let mut entries = Vec::new();
        if self.rng.gen_bool(0.7) {
            s.vals.push(("c".into(), "ccard".into()));
            entries.push(Entry::binding("c", Type::base("ccard")));
        }
        if self.rng.gen_bool(0.6) {
            s.vals.push(("n".into(), "nat".into()));
            entries.push(Entry::binding("n", Type::base("nat")));
        }
        if self.rng.gen_bool(0.2) {
            let t = Type::rec(
                "t",
                Type::session(
                    Qualifier::Un,
                    Direction::Out,
                    "w",
                    Type::base(NAT),
                    Type::Var("t".into()),
                ),
            );
            s.shared.push(("r".into(), t.clone()));
            entries.push(Entry::binding("r", t));
        }
        if self.rng.gen_bool(0.35) {
            let t = self.session_type(&s);
            if t.is_unrestricted_unfolded() {
                s.shared.push(("k".into(), t.clone()));
            } else {
                s.chans.push(("k".into(), t.clone()));
            }
            entries.push(Entry::binding("k", t));
        }
        if self.rng.gen_bool(0.35) {
            let a = self.atom(&s, None);
            s.atoms.push(a.clone());
            entries.push(Entry::Resource(Formula::Atom(a)));
        }
        let mut proc = self.process(s, depth);
        if self.rng.gen_bool(self.mutate_ratio) {
            proc = self.mutate(&proc);
        }
        Judgment {
            ctx: Context::from_entries(entries),
            proc,
        }
    }

    fn process(&mut self, mut s: Scope, depth: usize) -> Process {
        if depth <= 1 {
            return Process::Inact;
        }
        let linear = !s.chans.is_empty() || !s.atoms.is_empty();
        let mut choices: Vec<(u32, u8)> = vec![(3, 0)];
        if !s.chans.is_empty() {
            choices.push((40, 1));
        }
        if linear && depth >= 3 {
            choices.push((15, 2));
        }
        if depth >= 4 {
            choices.push((14, 3));
        }
        choices.push((5, 4));
        if !s.atoms.is_empty() {
            choices.push((20, 5));
        }
        if !s.shared.is_empty() {
            choices.push((8, 6));
        }
        if depth >= 3 && !s.shared.is_empty() {
            choices.push((4, 7));
        }
        if !linear {
            choices.push((10, 0));
        }
        let pick = choices
            .choose_weighted(&mut self.rng, |c| c.0)
            .map(|c| c.1)
            .unwrap_or(0);
        match pick {
            1 => {
                let i = self.rng.gen_range(0..s.chans.len());
                self.act(s, i, depth)
            }
            2 => {
                let (mut l, mut r) = (s.clone(), s.clone());
                l.chans.clear();
                l.atoms.clear();
                r.chans.clear();
                r.atoms.clear();
                for c in s.chans {
                    if self.rng.gen_bool(0.5) {
                        l.chans.push(c)
                    } else {
                        r.chans.push(c)
                    }
                }
                for a in s.atoms {
                    if self.rng.gen_bool(0.5) {
                        l.atoms.push(a)
                    } else {
                        r.atoms.push(a)
                    }
                }
                Process::par(self.process(l, depth - 1), self.process(r, depth - 1))
            }
            3 => {
                let t = self.session_type(&s);
                let (a, b) = (self.fresh("a"), self.fresh("b"));
                let d = t.dual().expect("sessions have duals");
                if t.is_unrestricted_unfolded() {
                    s.shared.push((a.clone(), t.clone()));
                    s.shared.push((b.clone(), d));
                } else {
                    s.chans.push((a.clone(), t.clone()));
                    s.chans.push((b.clone(), d));
                }
                Process::restrict(a, b, t, self.process(s, depth - 1))
            }
            4 => {
                let a = self.atom(&s, None);
                s.atoms.push(a.clone());
                Process::assume(Formula::Atom(a), self.process(s, depth - 1))
            }
            5 => {
                let i = self.rng.gen_range(0..s.atoms.len());
                let a = s.atoms.remove(i);
                Process::assert(Formula::Atom(a), self.process(s, depth - 1))
            }
            6 => {
                let i = self.rng.gen_range(0..s.shared.len());
                let (r, t) = s.shared[i].clone();
                match t.unfold_head() {
                    Type::Session {
                        dir: Direction::Out,
                        ..
                    } => {
                        let v = self.value_of_base(&s, NAT);
                        Process::output(r, v, self.process(s, depth - 1))
                    }
                    _ => {
                        let z = self.fresh("z");
                        s.vals.push((z.clone(), NAT.into()));
                        Process::input(r, z, self.process(s, depth - 1))
                    }
                }
            }
            7 => {
                let inner = Scope {
                    vals: s.vals.clone(),
                    shared: s.shared.clone(),
                    ..Scope::default()
                };
                let body = self.process(inner, depth - 2);
                Process::par(Process::repl(body), self.process(s, depth - 1))
            }
            _ => Process::Inact,
        }
    }

    fn act(&mut self, mut s: Scope, i: usize, depth: usize) -> Process {
        let (x, t) = s.chans.remove(i);
        let Type::Session {
            dir,
            binder,
            payload,
            cont,
            ..
        } = t.unfold_head()
        else {
            return self.process(s, depth);
        };
        match dir {
            Direction::Out => {
                let (v, missing) = self.value_for(&mut s, &payload);
                s.chans.push((x.clone(), cont.subst(&binder, &v)));
                let p = Process::output(x, v, self.process(s, depth - 1));
                match missing {
                    Some(f) => Process::assume(f, p),
                    None => p,
                }
            }
            Direction::In => {
                let z = self.fresh("z");
                match &*payload {
                    Type::Unit(b) => s.vals.push((z.clone(), b.clone())),
                    Type::Refined {
                        binder: w,
                        base,
                        formula,
                    } => {
                        if let Type::Unit(b) = &**base {
                            s.vals.push((z.clone(), b.clone()));
                        }
                        s.atoms
                            .extend(formula.subst(w, &Value::var(z.clone())).atoms());
                    }
                    other => s.chans.push((z.clone(), other.clone())),
                }
                s.chans
                    .push((x.clone(), cont.subst(&binder, &Value::var(z.clone()))));
                Process::input(x, z, self.process(s, depth - 1))
            }
        }
    }

    /// A value of type `t`, consuming what it needs from the scope. Atoms
    /// the refinement asks for but the scope lacks are returned, to be
    /// assumed in front of the output.
    fn value_for(&mut self, s: &mut Scope, t: &Type) -> (Value, Option<Formula>) {
        match t {
            Type::Unit(b) => (self.value_of_base(s, b), None),
            Type::Refined {
                binder,
                base,
                formula,
            } => {
                let b = match &**base {
                    Type::Unit(b) => b.clone(),
                    _ => NAT.to_string(),
                };
                let v = self.value_of_base(s, &b);
                let mut missing = Vec::new();
                for a in formula.subst(binder, &v).atoms() {
                    match s.atoms.iter().position(|x| *x == a) {
                        Some(k) => {
                            s.atoms.remove(k);
                        }
                        None => missing.push(a),
                    }
                }
                let f = (!missing.is_empty()).then(|| Formula::from_atoms(missing));
                (v, f)
            }
            other => {
                let k = s
                    .chans
                    .iter()
                    .position(|(_, u)| linsess::syntax::type_equivalent(u, other));
                match k {
                    Some(k) => (Value::var(s.chans.remove(k).0), None),
                    None => (Value::Unit, None),
                }
            }
        }
    }

    /// Applies one random local change.
    pub fn mutate(&mut self, p: &Process) -> Process {
        let n = count_nodes(p);
        let mut k = self.rng.gen_range(0..n);
        let kind = self.rng.gen_range(0..7);
        let mut rng = StdRng::seed_from_u64(self.rng.gen());
        map_nth(p, &mut k, &mut |q| mutate_node(q, kind, &mut rng))
    }
}

pub fn count_nodes(p: &Process) -> usize {
    1 + match p {
        Process::Output { cont, .. } | Process::Input { cont, .. } => count_nodes(cont),
        Process::Par(l, r) => count_nodes(l) + count_nodes(r),
        Process::Repl(b) | Process::Assume(_, b) | Process::Assert(_, b) => count_nodes(b),
        Process::Restrict { body, .. } => count_nodes(body),
        Process::Inact | Process::Call { .. } => 0,
    }
}

/// Rebuilds `p` with its `k`-th node (preorder) replaced by `f` of it.
pub fn map_nth(p: &Process, k: &mut usize, f: &mut dyn FnMut(&Process) -> Process) -> Process {
    if *k == 0 {
        *k = usize::MAX;
        return f(p);
    }
    if *k == usize::MAX {
        return p.clone();
    }
    *k -= 1;
    match p {
        Process::Output { chan, value, cont } => Process::Output {
            chan: chan.clone(),
            value: value.clone(),
            cont: Box::new(map_nth(cont, k, f)),
        },
        Process::Input { chan, binder, cont } => Process::Input {
            chan: chan.clone(),
            binder: binder.clone(),
            cont: Box::new(map_nth(cont, k, f)),
        },
        Process::Par(l, r) => {
            let l = map_nth(l, k, f);
            let r = map_nth(r, k, f);
            Process::par(l, r)
        }
        Process::Repl(b) => Process::repl(map_nth(b, k, f)),
        Process::Assume(phi, b) => Process::assume(phi.clone(), map_nth(b, k, f)),
        Process::Assert(phi, b) => Process::assert(phi.clone(), map_nth(b, k, f)),
        Process::Restrict {
            x,
            y,
            annot,
            peer,
            body,
        } => Process::Restrict {
            x: x.clone(),
            y: y.clone(),
            annot: annot.clone(),
            peer: peer.clone(),
            body: Box::new(map_nth(body, k, f)),
        },
        other => other.clone(),
    }
}

fn mutate_node(p: &Process, kind: u32, rng: &mut StdRng) -> Process {
    let a = Formula::atom("P", vec![]);
    match (kind, p) {
        (0, _) => Process::Inact,
        (1, Process::Output { chan, cont, .. }) => Process::Output {
            chan: chan.clone(),
            value: Value::int(rng.gen_range(5..7)),
            cont: cont.clone(),
        },
        (2, _) => Process::assert(a, p.clone()),
        (3, _) => Process::assume(a, p.clone()),
        (
            4,
            Process::Restrict {
                x,
                y,
                annot,
                peer,
                body,
            },
        ) => Process::Restrict {
            x: x.clone(),
            y: y.clone(),
            annot: annot.dual().unwrap_or(Type::End),
            peer: peer.clone(),
            body: body.clone(),
        },
        (5, Process::Output { value, cont, .. }) => Process::Output {
            chan: Value::var("k"),
            value: value.clone(),
            cont: cont.clone(),
        },
        (5, Process::Input { binder, cont, .. }) => Process::Input {
            chan: Value::var("k"),
            binder: binder.clone(),
            cont: cont.clone(),
        },
        (6, _) => Process::repl(p.clone()),
        _ => Process::par(p.clone(), Process::Inact),
    }
}
