//! Recursive-descent parser producing unresolved items.
//!
//! Type identifiers are left as `Type::Var` here; the program builder
//! resolves them to base types, aliases or `rec`-bound variables.

use std::ops::Range;

use super::diagnostic::Diagnostic;
use super::lexer::{Tok, Token};
use crate::syntax::{Direction, Formula, Name, Process, Qualifier, Type, Value, NAT};

pub const KEYWORDS: &[&str] = &[
    "new", "assume", "assert", "lin", "un", "rec", "end", "unit", "type", "proc", "main", "base",
    "context",
];

const ITEM_KEYWORDS: &[&str] = &["base", "type", "proc", "main", "context"];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

type PResult<T> = Result<T, Diagnostic>;

/// Names and literals mentioned by one item, with their source spans.
#[derive(Debug, Default, Clone)]
pub struct ItemRefs {
    /// Spans of the top-level types, in source order.
    pub types: Vec<Range<usize>>,
    /// Identifiers used in type position.
    pub type_idents: Vec<(Name, Range<usize>)>,
    /// Process calls: name, number of arguments, span.
    pub calls: Vec<(Name, usize, Range<usize>)>,
    /// Base types of literals.
    pub literals: Vec<(Name, Range<usize>)>,
}

#[derive(Debug, Clone)]
pub enum ContextEntry {
    Binding(Name, Type),
    Resource(Formula),
}

#[derive(Debug, Clone)]
pub enum ItemKind {
    Base(Vec<(Name, Range<usize>)>),
    Alias(Name, Type),
    Proc(Name, Vec<(Name, Range<usize>)>, Process),
    Main(Process),
    Context(Vec<ContextEntry>),
}

#[derive(Debug, Clone)]
pub struct Item {
    pub kind: ItemKind,
    /// Span of the item's name (or keyword for `main`/`context`).
    pub name_span: Range<usize>,
    pub refs: ItemRefs,
}

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    refs: ItemRefs,
}

impl Parser {
    pub fn new(toks: Vec<Token>) -> Parser {
        Parser {
            toks,
            pos: 0,
            refs: ItemRefs::default(),
        }
    }

    /// Parses all items, recovering at item boundaries. Returns the items
    /// that parsed and the first syntax error of each item that did not.
    pub fn items(&mut self) -> (Vec<Item>, Vec<Diagnostic>) {
        let mut items = Vec::new();
        let mut errors = Vec::new();
        while !self.at_eof() {
            self.refs = ItemRefs::default();
            match self.item() {
                Ok(item) => items.push(item),
                Err(d) => {
                    errors.push(d);
                    self.recover();
                }
            }
        }
        (items, errors)
    }

    fn recover(&mut self) {
        // always make progress past the offending token
        if !self.at_eof() {
            self.pos += 1;
        }
        while !self.at_eof() {
            match &self.peek().tok {
                Tok::Semi => {
                    self.pos += 1;
                    return;
                }
                Tok::Ident(s) if ITEM_KEYWORDS.contains(&s.as_str()) => return,
                _ => self.pos += 1,
            }
        }
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn prev_end(&self) -> usize {
        if self.pos == 0 {
            0
        } else {
            self.toks[self.pos - 1].span.end
        }
    }

    fn unexpected<T>(&self, expected: &str) -> PResult<T> {
        let t = self.peek();
        Err(Diagnostic::error(
            "E-SYNTAX",
            t.span.clone(),
            format!("expected {expected}, found {}", t.tok.describe()),
        ))
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> PResult<Range<usize>> {
        if self.peek().tok == tok {
            Ok(self.bump().span)
        } else {
            self.unexpected(expected)
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self, what: &str) -> PResult<(Name, Range<usize>)> {
        match &self.peek().tok {
            Tok::Ident(s) if !is_keyword(s) => {
                let s = s.clone();
                let span = self.bump().span;
                Ok((s, span))
            }
            _ => self.unexpected(what),
        }
    }

    fn item(&mut self) -> PResult<Item> {
        let start = self.peek().span.clone();
        let (kind, name_span) = match &self.peek().tok {
            Tok::Ident(s) if s == "base" => {
                self.bump();
                let mut names = vec![self.ident("a base type name")?];
                while self.eat(&Tok::Comma) {
                    names.push(self.ident("a base type name")?);
                }
                (ItemKind::Base(names), start)
            }
            Tok::Ident(s) if s == "type" => {
                self.bump();
                let (name, span) = self.ident("a type name")?;
                self.expect(Tok::Eq, "`=`")?;
                let t = self.top_type()?;
                (ItemKind::Alias(name, t), span)
            }
            Tok::Ident(s) if s == "proc" => {
                self.bump();
                let (name, span) = self.ident("a process name")?;
                let mut params = Vec::new();
                if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
                    params.push(self.ident("a parameter name")?);
                    while self.eat(&Tok::Comma) {
                        params.push(self.ident("a parameter name")?);
                    }
                    self.expect(Tok::RParen, "`,` or `)`")?;
                }
                self.expect(Tok::Eq, "`=`")?;
                let body = self.process()?;
                (ItemKind::Proc(name, params, body), span)
            }
            Tok::Ident(s) if s == "main" => {
                self.bump();
                self.expect(Tok::Eq, "`=`")?;
                let body = self.process()?;
                (ItemKind::Main(body), start)
            }
            Tok::Ident(s) if s == "context" => {
                self.bump();
                self.expect(Tok::Eq, "`=`")?;
                let entries = self.context_entries()?;
                (ItemKind::Context(entries), start)
            }
            _ => return self.unexpected("`base`, `type`, `proc`, `main` or `context`"),
        };
        match &self.peek().tok {
            Tok::Semi => {
                self.bump();
            }
            Tok::Eof => {}
            Tok::Ident(s) if ITEM_KEYWORDS.contains(&s.as_str()) => {}
            _ => return self.unexpected("`;` or the next definition"),
        }
        Ok(Item {
            kind,
            name_span,
            refs: std::mem::take(&mut self.refs),
        })
    }

    fn context_entries(&mut self) -> PResult<Vec<ContextEntry>> {
        let mut out = Vec::new();
        if matches!(self.peek().tok, Tok::Semi | Tok::Eof) {
            return Ok(out);
        }
        loop {
            let is_binding = matches!(&self.peek().tok, Tok::Ident(s) if !is_keyword(s))
                && *self.peek_at(1) == Tok::Colon;
            if is_binding {
                let (x, _) = self.ident("a variable")?;
                self.bump();
                out.push(ContextEntry::Binding(x, self.top_type()?));
            } else {
                out.push(ContextEntry::Resource(self.formula()?));
            }
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    pub fn process(&mut self) -> PResult<Process> {
        let mut p = self.prefix()?;
        while self.eat(&Tok::Bar) {
            let q = self.prefix()?;
            p = Process::par(p, q);
        }
        Ok(p)
    }

    fn prefix(&mut self) -> PResult<Process> {
        match self.peek().tok.clone() {
            Tok::Int(0) => {
                self.bump();
                Ok(Process::Inact)
            }
            Tok::Star => {
                self.bump();
                Ok(Process::repl(self.prefix()?))
            }
            Tok::LParen => {
                self.bump();
                if self.is_kw("assume") {
                    self.bump();
                    let f = self.formula()?;
                    self.expect(Tok::RParen, "`)`")?;
                    let p = self.prefix()?;
                    Ok(Process::assume(f, p))
                } else {
                    let p = self.process()?;
                    self.expect(Tok::RParen, "`)` or `|`")?;
                    Ok(p)
                }
            }
            Tok::Ident(s) if s == "new" => {
                self.bump();
                let (x, _) = self.ident("an endpoint name")?;
                let (y, _) = self.ident("an endpoint name")?;
                self.expect(Tok::Colon, "`:`")?;
                let annot = self.top_type()?;
                let peer = if self.eat(&Tok::Comma) {
                    Some(self.top_type()?)
                } else {
                    None
                };
                let body = self.prefix()?;
                Ok(Process::Restrict {
                    x,
                    y,
                    annot,
                    peer,
                    body: Box::new(body),
                })
            }
            Tok::Ident(s) if s == "assert" => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::Dot, "`.`")?;
                Ok(Process::assert(f, self.prefix()?))
            }
            Tok::Ident(s) if !is_keyword(&s) => match self.peek_at(1) {
                Tok::Bang => {
                    let (chan, _) = self.ident("a channel")?;
                    self.bump();
                    let v = self.value()?;
                    self.expect(Tok::Dot, "`.` or `+`")?;
                    let cont = self.prefix()?;
                    Ok(Process::Output {
                        chan: Value::Var(chan),
                        value: v,
                        cont: Box::new(cont),
                    })
                }
                Tok::Query => {
                    let (chan, _) = self.ident("a channel")?;
                    self.bump();
                    let (binder, _) = self.ident("a variable to bind")?;
                    self.expect(Tok::Dot, "`.`")?;
                    let cont = self.prefix()?;
                    Ok(Process::Input {
                        chan: Value::Var(chan),
                        binder,
                        cont: Box::new(cont),
                    })
                }
                _ => {
                    let (name, span) = self.ident("a process")?;
                    let mut args = Vec::new();
                    if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
                        args.push(self.value()?);
                        while self.eat(&Tok::Comma) {
                            args.push(self.value()?);
                        }
                        self.expect(Tok::RParen, "`,` or `)`")?;
                    }
                    let span = span.start..self.prev_end();
                    self.refs.calls.push((name.clone(), args.len(), span));
                    Ok(Process::Call { name, args })
                }
            },
            _ => self.unexpected("a process"),
        }
    }

    fn top_type(&mut self) -> PResult<Type> {
        let start = self.peek().span.start;
        let t = self.ty()?;
        self.refs.types.push(start..self.prev_end());
        Ok(t)
    }

    pub fn ty(&mut self) -> PResult<Type> {
        match self.peek().tok.clone() {
            Tok::Ident(s) if s == "lin" || s == "un" => {
                self.bump();
                let qual = if s == "lin" {
                    Qualifier::Lin
                } else {
                    Qualifier::Un
                };
                let dir = match self.peek().tok {
                    Tok::Bang => Direction::Out,
                    Tok::Query => Direction::In,
                    _ => return self.unexpected("`!` or `?`"),
                };
                self.bump();
                let binder = match (&self.peek().tok, self.peek_at(1)) {
                    (Tok::Ident(b), Tok::Colon) if !is_keyword(b) => {
                        let b = b.clone();
                        self.bump();
                        self.bump();
                        b
                    }
                    _ => "_".to_string(),
                };
                let payload = self.ty()?;
                self.expect(Tok::Dot, "`.`")?;
                let cont = self.ty()?;
                Ok(Type::session(qual, dir, binder, payload, cont))
            }
            Tok::Ident(s) if s == "end" => {
                self.bump();
                Ok(Type::End)
            }
            Tok::Ident(s) if s == "unit" => {
                self.bump();
                Ok(Type::unit())
            }
            Tok::Ident(s) if s == "rec" => {
                self.bump();
                let (a, _) = self.ident("a type variable")?;
                self.expect(Tok::Dot, "`.`")?;
                Ok(Type::rec(a, self.ty()?))
            }
            Tok::LBrace => {
                self.bump();
                let (x, _) = self.ident("a refinement variable")?;
                self.expect(Tok::Colon, "`:`")?;
                let base = self.ty()?;
                self.expect(Tok::Bar, "`|`")?;
                let f = self.formula()?;
                self.expect(Tok::RBrace, "`}`")?;
                Ok(Type::refined(x, base, f))
            }
            Tok::LParen => {
                self.bump();
                let t = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                let span = self.bump().span;
                self.refs.type_idents.push((s.clone(), span));
                Ok(Type::Var(s))
            }
            _ => self.unexpected("a type"),
        }
    }

    pub fn formula(&mut self) -> PResult<Formula> {
        let mut f = self.formula_atom()?;
        while self.eat(&Tok::Star) {
            let g = self.formula_atom()?;
            f = Formula::tensor(f, g);
        }
        Ok(f)
    }

    fn formula_atom(&mut self) -> PResult<Formula> {
        match self.peek().tok.clone() {
            Tok::Int(1) => {
                self.bump();
                Ok(Formula::One)
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                let mut args = Vec::new();
                if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
                    args.push(self.value()?);
                    while self.eat(&Tok::Comma) {
                        args.push(self.value()?);
                    }
                    self.expect(Tok::RParen, "`,` or `)`")?;
                }
                Ok(Formula::atom(s, args))
            }
            _ => self.unexpected("a formula"),
        }
    }

    pub fn value(&mut self) -> PResult<Value> {
        let mut v = self.value_atom()?;
        while self.eat(&Tok::Plus) {
            let w = self.value_atom()?;
            v = Value::sum(v, w);
        }
        Ok(v)
    }

    fn value_atom(&mut self) -> PResult<Value> {
        match self.peek().tok.clone() {
            Tok::Int(n) => {
                let span = self.bump().span;
                self.refs.literals.push((NAT.to_string(), span));
                Ok(Value::int(n))
            }
            Tok::Tick => {
                let start = self.bump().span.start;
                let (c, _) = self.ident("a constant name")?;
                self.expect(Tok::Colon, "`:` and a base type")?;
                let (base, _) = self.ident("a base type name")?;
                self.refs
                    .literals
                    .push((base.clone(), start..self.prev_end()));
                Ok(Value::named(c, base))
            }
            Tok::LParen => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    return Ok(Value::Unit);
                }
                let v = self.value()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(v)
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(Value::Var(s))
            }
            _ => self.unexpected("a value"),
        }
    }

    #[cfg(test)]
    pub fn expect_eof(&mut self) -> PResult<()> {
        if self.at_eof() {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::lexer::tokenize;

    fn proc(src: &str) -> Process {
        let mut p = Parser::new(tokenize(src).unwrap());
        let r = p.process().unwrap();
        p.expect_eof().unwrap();
        r
    }

    #[test]
    fn output_chain() {
        let p = proc("s1!p. s1!c. s1!100. 0");
        let expected = Process::output(
            "s1",
            Value::var("p"),
            Process::output(
                "s1",
                Value::var("c"),
                Process::output("s1", Value::int(100), Process::Inact),
            ),
        );
        assert_eq!(p, expected);
    }

    #[test]
    fn prefixes_bind_tighter_than_par() {
        let p = proc("(assume A) 0 | assert A. 0");
        assert!(matches!(p, Process::Par(ref l, _) if matches!(**l, Process::Assume(..))));
        let q = proc("(assume A) (0 | assert A. 0)");
        assert!(matches!(q, Process::Assume(_, ref b) if matches!(**b, Process::Par(..))));
    }

    #[test]
    fn tensor_assumption() {
        let p = proc("(assume charge(c,100) * charge(c,100)) 0");
        match p {
            Process::Assume(f, _) => assert_eq!(f.atoms().len(), 2),
            _ => panic!("shape"),
        }
    }

    #[test]
    fn session_type_with_refinement() {
        let mut p =
            Parser::new(tokenize("lin !p:product. lin !a:{x:nat | charge(c,x)}. end").unwrap());
        let t = p.ty().unwrap();
        assert_eq!(
            t.to_string(),
            "lin !p:product. lin !a:{x:nat | charge(c,x)}. end"
        );
    }

    #[test]
    fn sums_and_literals() {
        let mut p = Parser::new(tokenize("a+10+`p:product").unwrap());
        let v = p.value().unwrap();
        assert_eq!(v.to_string(), "a+10+`p:product");
    }
}
