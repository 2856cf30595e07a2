use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::Serialize;
use thiserror::Error;

use super::diagnostic::Diagnostic;
use super::grammar::{ContextEntry, ItemKind, ItemRefs, Parser};
use super::lexer::tokenize;
use crate::syntax::{Context, Entry, Name, Process, Type, TypeShapeError, UNIT};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Macro {
    pub params: Vec<Name>,
    pub body: Process,
}

/// A parsed program. Type aliases are already resolved inside every type;
/// macro calls in `main` and in macro bodies are not yet expanded.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Program {
    pub base_types: Vec<Name>,
    pub type_aliases: BTreeMap<Name, Type>,
    pub macros: BTreeMap<Name, Macro>,
    pub main: Process,
    pub context: Option<Context>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("unknown process `{0}`")]
    Unknown(Name),
    #[error("process `{name}` expects {expected} arguments, got {got}")]
    Arity {
        name: Name,
        expected: usize,
        got: usize,
    },
    #[error("process `{0}` is defined in terms of itself")]
    Cycle(Name),
}

impl Program {
    /// Replaces every macro call by the macro body with arguments
    /// substituted for parameters.
    pub fn expand_macros(&self) -> Result<Process, ExpandError> {
        self.expand(&self.main, &mut Vec::new())
    }

    pub fn expand(&self, p: &Process, stack: &mut Vec<Name>) -> Result<Process, ExpandError> {
        let ex = |q: &Process, stack: &mut Vec<Name>| self.expand(q, stack).map(Box::new);
        Ok(match p {
            Process::Call { name, args } => {
                let m = self
                    .macros
                    .get(name)
                    .ok_or_else(|| ExpandError::Unknown(name.clone()))?;
                if m.params.len() != args.len() {
                    return Err(ExpandError::Arity {
                        name: name.clone(),
                        expected: m.params.len(),
                        got: args.len(),
                    });
                }
                if stack.contains(name) {
                    return Err(ExpandError::Cycle(name.clone()));
                }
                stack.push(name.clone());
                let body = self.expand(&m.body, stack)?;
                stack.pop();
                body.subst_many(&m.params, args)
            }
            Process::Output { chan, value, cont } => Process::Output {
                chan: chan.clone(),
                value: value.clone(),
                cont: ex(cont, stack)?,
            },
            Process::Input { chan, binder, cont } => Process::Input {
                chan: chan.clone(),
                binder: binder.clone(),
                cont: ex(cont, stack)?,
            },
            Process::Par(l, r) => Process::Par(ex(l, stack)?, ex(r, stack)?),
            Process::Repl(b) => Process::Repl(ex(b, stack)?),
            Process::Inact => Process::Inact,
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
                body: ex(body, stack)?,
            },
            Process::Assume(f, b) => Process::Assume(f.clone(), ex(b, stack)?),
            Process::Assert(f, b) => Process::Assert(f.clone(), ex(b, stack)?),
        })
    }

    /// The declared context, or the empty one.
    pub fn initial_context(&self) -> Context {
        self.context.clone().unwrap_or_default()
    }
}

pub fn parse_program(src: &str) -> Result<Program, Vec<Diagnostic>> {
    build(src, &Program::default(), true)
}

/// Parses a file holding a `context = ...;` item (plus optional base and
/// alias declarations) against the declarations of `program`.
pub fn parse_context(src: &str, program: &Program) -> Result<Context, Vec<Diagnostic>> {
    let p = build(src, program, false)?;
    Ok(p.context.unwrap_or_default())
}

fn build(src: &str, seed: &Program, require_main: bool) -> Result<Program, Vec<Diagnostic>> {
    let toks = tokenize(src).map_err(|d| vec![d])?;
    let (items, mut errors) = Parser::new(toks).items();

    let mut prog = Program {
        base_types: seed.base_types.clone(),
        type_aliases: seed.type_aliases.clone(),
        ..Program::default()
    };

    // declarations first, so that definitions may appear in any order
    let mut alias_items: BTreeMap<Name, (Type, ItemRefs, Range<usize>)> = BTreeMap::new();
    for item in &items {
        match &item.kind {
            ItemKind::Base(names) => {
                for (n, span) in names {
                    if prog.base_types.contains(n) || n == UNIT {
                        errors.push(dup(span, "base type", n));
                    } else {
                        prog.base_types.push(n.clone());
                    }
                }
            }
            ItemKind::Alias(name, t) => {
                if alias_items.contains_key(name) || prog.type_aliases.contains_key(name) {
                    errors.push(dup(&item.name_span, "type", name));
                } else {
                    alias_items.insert(
                        name.clone(),
                        (t.clone(), item.refs.clone(), item.name_span.clone()),
                    );
                }
            }
            _ => {}
        }
    }

    let mut resolver = Resolver {
        bases: prog.base_types.iter().cloned().collect(),
        raw: alias_items,
        done: prog.type_aliases.clone(),
        visiting: Vec::new(),
    };
    let alias_names: Vec<Name> = resolver.raw.keys().cloned().collect();
    for name in alias_names {
        if let Err(d) = resolver.alias(&name) {
            errors.push(d);
        }
    }

    let mut main_seen = false;
    let mut context_seen = false;
    let mut calls: Vec<(Option<Name>, ItemRefs)> = Vec::new();
    for item in items {
        let refs = item.refs.clone();
        let res: Result<(), Diagnostic> = (|| {
            check_literals(&refs, &resolver.bases)?;
            match item.kind {
                ItemKind::Base(_) | ItemKind::Alias(..) => Ok(()),
                ItemKind::Proc(name, params, body) => {
                    let mut seen = BTreeSet::new();
                    for (p, span) in &params {
                        if !seen.insert(p.clone()) {
                            return Err(dup(span, "parameter", p));
                        }
                    }
                    if prog.macros.contains_key(&name) {
                        return Err(dup(&item.name_span, "process", &name));
                    }
                    let body = resolver.process(&body, &refs, &mut 0)?;
                    calls.push((Some(name.clone()), refs.clone()));
                    prog.macros.insert(
                        name,
                        Macro {
                            params: params.into_iter().map(|(p, _)| p).collect(),
                            body,
                        },
                    );
                    Ok(())
                }
                ItemKind::Main(body) => {
                    if main_seen {
                        return Err(dup(&item.name_span, "definition", "main"));
                    }
                    main_seen = true;
                    prog.main = resolver.process(&body, &refs, &mut 0)?;
                    calls.push((None, refs.clone()));
                    Ok(())
                }
                ItemKind::Context(entries) => {
                    if context_seen {
                        return Err(dup(&item.name_span, "definition", "context"));
                    }
                    context_seen = true;
                    let mut ctx = Context::new();
                    let mut k = 0;
                    for e in entries {
                        ctx.push(match e {
                            ContextEntry::Binding(x, t) => {
                                Entry::Binding(x, resolver.top_type(&t, &refs, &mut k)?)
                            }
                            ContextEntry::Resource(f) => Entry::Resource(f),
                        });
                    }
                    prog.context = Some(ctx);
                    Ok(())
                }
            }
        })();
        if let Err(d) = res {
            errors.push(d);
        }
    }

    for (_, refs) in &calls {
        for (name, arity, span) in &refs.calls {
            match prog.macros.get(name) {
                None => errors.push(Diagnostic::error(
                    "E-UNKNOWN",
                    span.clone(),
                    format!("unknown process `{name}`"),
                )),
                Some(m) if m.params.len() != *arity => errors.push(Diagnostic::error(
                    "E-ARITY",
                    span.clone(),
                    format!(
                        "process `{name}` expects {} arguments, got {arity}",
                        m.params.len()
                    ),
                )),
                Some(_) => {}
            }
        }
    }
    if let Some(d) = find_cycle(&calls) {
        errors.push(d);
    }

    if require_main && !main_seen && errors.is_empty() {
        let span = 0..src.len().min(1);
        errors.push(Diagnostic::error(
            "E-NOMAIN",
            span,
            "program has no `main` definition",
        ));
    }
    if errors.is_empty() {
        Ok(prog)
    } else {
        errors.sort_by_key(|d| d.span.start);
        Err(errors)
    }
}

fn dup(span: &Range<usize>, what: &str, name: &str) -> Diagnostic {
    Diagnostic::error(
        "E-DUPDEF",
        span.clone(),
        format!("duplicate {what} `{name}`"),
    )
}

fn check_literals(refs: &ItemRefs, bases: &BTreeSet<Name>) -> Result<(), Diagnostic> {
    for (base, span) in &refs.literals {
        if !bases.contains(base) {
            return Err(Diagnostic::error(
                "E-BASE",
                span.clone(),
                format!("literal of undeclared base type `{base}`"),
            ));
        }
    }
    Ok(())
}

fn find_cycle(calls: &[(Option<Name>, ItemRefs)]) -> Option<Diagnostic> {
    let graph: BTreeMap<&Name, Vec<(&Name, &Range<usize>)>> = calls
        .iter()
        .filter_map(|(n, refs)| {
            n.as_ref()
                .map(|n| (n, refs.calls.iter().map(|(c, _, s)| (c, s)).collect()))
        })
        .collect();
    // 0 = unvisited, 1 = on stack, 2 = finished
    let mut state: BTreeMap<&Name, u8> = BTreeMap::new();
    fn dfs<'a>(
        n: &'a Name,
        graph: &BTreeMap<&'a Name, Vec<(&'a Name, &'a Range<usize>)>>,
        state: &mut BTreeMap<&'a Name, u8>,
    ) -> Option<Diagnostic> {
        state.insert(n, 1);
        for (m, span) in graph.get(n).into_iter().flatten() {
            match state.get(m).copied().unwrap_or(0) {
                1 => {
                    return Some(Diagnostic::error(
                        "E-CYCLE",
                        (*span).clone(),
                        format!("process `{m}` is defined in terms of itself"),
                    ))
                }
                0 if graph.contains_key(m) => {
                    if let Some(d) = dfs(m, graph, state) {
                        return Some(d);
                    }
                }
                _ => {}
            }
        }
        state.insert(n, 2);
        None
    }
    for n in graph.keys() {
        if state.get(n).copied().unwrap_or(0) == 0 {
            if let Some(d) = dfs(n, &graph, &mut state) {
                return Some(d);
            }
        }
    }
    None
}

struct Resolver {
    bases: BTreeSet<Name>,
    raw: BTreeMap<Name, (Type, ItemRefs, Range<usize>)>,
    done: BTreeMap<Name, Type>,
    visiting: Vec<Name>,
}

impl Resolver {
    fn alias(&mut self, name: &str) -> Result<Type, Diagnostic> {
        if let Some(t) = self.done.get(name) {
            return Ok(t.clone());
        }
        let (raw, refs, span) = self.raw.get(name).cloned().expect("alias exists");
        if self.visiting.iter().any(|n| n == name) {
            return Err(Diagnostic::error(
                "E-CYCLE",
                span,
                format!("type `{name}` is defined in terms of itself"),
            ));
        }
        self.visiting.push(name.to_string());
        let res = self.top_type(&raw, &refs, &mut 0);
        self.visiting.pop();
        let t = res?;
        self.done.insert(name.to_string(), t.clone());
        Ok(t)
    }

    /// Resolves the `k`-th top-level type of an item and checks its shape.
    fn top_type(&mut self, t: &Type, refs: &ItemRefs, k: &mut usize) -> Result<Type, Diagnostic> {
        let span = refs.types.get(*k).cloned().unwrap_or(0..1);
        *k += 1;
        let resolved = self.ty(t, &mut Vec::new(), refs, &span)?;
        resolved.check_shape().map_err(|e| {
            let code = match e {
                TypeShapeError::NotContractive(_) => "E-CONTRACT",
                TypeShapeError::RecursiveRefinement(_) | TypeShapeError::NotRecursive(_) => {
                    "E-RECREF"
                }
            };
            Diagnostic::error(code, span.clone(), e.to_string())
        })?;
        Ok(resolved)
    }

    fn ty(
        &mut self,
        t: &Type,
        bound: &mut Vec<Name>,
        refs: &ItemRefs,
        span: &Range<usize>,
    ) -> Result<Type, Diagnostic> {
        Ok(match t {
            Type::Var(a) if bound.contains(a) => t.clone(),
            Type::Var(a) => {
                if self.bases.contains(a) {
                    Type::base(a.clone())
                } else if self.done.contains_key(a) || self.raw.contains_key(a) {
                    self.alias(a)?
                } else {
                    let at = refs
                        .type_idents
                        .iter()
                        .find(|(n, s)| n == a && s.start >= span.start && s.end <= span.end)
                        .map(|(_, s)| s.clone())
                        .unwrap_or_else(|| span.clone());
                    return Err(Diagnostic::error(
                        "E-UNKNOWN",
                        at,
                        format!("unknown type `{a}`"),
                    ));
                }
            }
            Type::Unit(_) | Type::End => t.clone(),
            Type::Session {
                qual,
                dir,
                binder,
                payload,
                cont,
            } => Type::session(
                *qual,
                *dir,
                binder.clone(),
                self.ty(payload, bound, refs, span)?,
                self.ty(cont, bound, refs, span)?,
            ),
            Type::Refined {
                binder,
                base,
                formula,
            } => Type::refined(
                binder.clone(),
                self.ty(base, bound, refs, span)?,
                formula.clone(),
            ),
            Type::Rec(a, body) => {
                bound.push(a.clone());
                let body = self.ty(body, bound, refs, span);
                bound.pop();
                Type::rec(a.clone(), body?)
            }
        })
    }

    fn process(
        &mut self,
        p: &Process,
        refs: &ItemRefs,
        k: &mut usize,
    ) -> Result<Process, Diagnostic> {
        Ok(match p {
            Process::Restrict {
                x,
                y,
                annot,
                peer,
                body,
            } => {
                let annot = self.top_type(annot, refs, k)?;
                let peer = match peer {
                    Some(t) => Some(self.top_type(t, refs, k)?),
                    None => None,
                };
                Process::Restrict {
                    x: x.clone(),
                    y: y.clone(),
                    annot,
                    peer,
                    body: Box::new(self.process(body, refs, k)?),
                }
            }
            Process::Output { chan, value, cont } => Process::Output {
                chan: chan.clone(),
                value: value.clone(),
                cont: Box::new(self.process(cont, refs, k)?),
            },
            Process::Input { chan, binder, cont } => Process::Input {
                chan: chan.clone(),
                binder: binder.clone(),
                cont: Box::new(self.process(cont, refs, k)?),
            },
            Process::Par(l, r) => {
                let l = self.process(l, refs, k)?;
                Process::par(l, self.process(r, refs, k)?)
            }
            Process::Repl(b) => Process::repl(self.process(b, refs, k)?),
            Process::Inact | Process::Call { .. } => p.clone(),
            Process::Assume(f, b) => Process::assume(f.clone(), self.process(b, refs, k)?),
            Process::Assert(f, b) => Process::assert(f.clone(), self.process(b, refs, k)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{Formula, Value};

    fn codes(src: &str) -> Vec<&'static str> {
        parse_program(src)
            .unwrap_err()
            .into_iter()
            .map(|d| d.code)
            .collect()
    }

    #[test]
    fn minimal_program() {
        let p = parse_program("main = 0").unwrap();
        assert_eq!(p.main, Process::Inact);
    }

    #[test]
    fn aliases_resolve_in_any_order() {
        let src = "main = new x y : T x!1. 0; type T = lin !n:nat. U; type U = end; base nat;";
        let p = parse_program(src).unwrap();
        match p.main {
            Process::Restrict { annot, .. } => assert_eq!(annot.to_string(), "lin !n:nat. end"),
            _ => panic!("shape"),
        }
    }

    #[test]
    fn non_contractive_alias() {
        assert_eq!(
            codes("type B = rec a. rec b. a; main = 0"),
            vec!["E-CONTRACT"]
        );
        assert_eq!(
            codes("base nat; type B = rec a. {x:nat | A}; main = 0"),
            vec!["E-RECREF"]
        );
    }

    #[test]
    fn reference_errors() {
        assert_eq!(codes("main = new x y : T 0"), vec!["E-UNKNOWN"]);
        assert_eq!(codes("main = P"), vec!["E-UNKNOWN"]);
        assert_eq!(codes("proc P(a) = 0; main = P"), vec!["E-ARITY"]);
        assert_eq!(codes("proc P = Q; proc Q = P; main = P"), vec!["E-CYCLE"]);
        assert_eq!(
            codes("type T = U; type U = T; main = 0").first(),
            Some(&"E-CYCLE")
        );
        assert_eq!(codes("main = x!1. 0"), vec!["E-BASE"]);
        assert_eq!(codes("main = 0; main = 0"), vec!["E-DUPDEF"]);
        assert_eq!(codes("base nat;"), vec!["E-NOMAIN"]);
    }

    #[test]
    fn one_syntax_error_per_definition() {
        let errs = parse_program("proc P = x!. 0 ; proc Q = ( ; main = 0").unwrap_err();
        assert_eq!(errs.len(), 2);
        assert!(errs.iter().all(|d| d.code == "E-SYNTAX"));
        assert!(errs.iter().all(|d| !d.span.is_empty()));
    }

    #[test]
    fn macro_expansion_substitutes_arguments() {
        let src = "base nat; proc Charge(c, a) = new b1 b2 : end (r2!b2. b1!c. b1!a. 0); \
                   main = Charge(c, 100)";
        let p = parse_program(src).unwrap();
        let e = p.expand_macros().unwrap();
        assert_eq!(e.to_string(), "new b1 b2 : end r2!b2. b1!c. b1!100. 0");
    }

    #[test]
    fn macro_expansion_avoids_capture() {
        let src = "proc P(v) = new b1 b2 : end k!v. 0; main = P(b1)";
        let e = parse_program(src).unwrap().expand_macros().unwrap();
        match e {
            Process::Restrict { x, body, .. } => {
                assert_ne!(x, "b1");
                assert_eq!(
                    *body,
                    Process::output("k", Value::var("b1"), Process::Inact)
                );
            }
            _ => panic!("shape"),
        }
    }

    #[test]
    fn context_items() {
        let p = parse_program("base nat; context = x:nat, A(x) * 1; main = 0").unwrap();
        let ctx = p.context.unwrap();
        assert_eq!(ctx.entries[0], Entry::binding("x", Type::base("nat")));
        assert_eq!(
            ctx.entries[1],
            Entry::Resource(Formula::tensor(
                Formula::atom("A", vec![Value::var("x")]),
                Formula::One
            ))
        );
    }
}
