//! A pi calculus with `assume`/`assert` under linearly refined session
//! types: syntax, a parser and pretty printer, a type checker with a
//! brute-force reference checker, and a reduction engine with a safety
//! analyzer.

pub mod cli;
pub mod parser;
pub mod semantics;
pub mod syntax;
pub mod typing;
