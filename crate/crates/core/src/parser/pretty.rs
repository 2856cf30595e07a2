use std::fmt::Write;

use super::program::Program;
use crate::syntax::{Entry, Formula, Process, Type};

pub fn print_process(p: &Process) -> String {
    p.to_string()
}

pub fn print_type(t: &Type) -> String {
    t.to_string()
}

pub fn print_formula(f: &Formula) -> String {
    f.to_string()
}

/// Source text that parses back to an equal program.
pub fn print_program(prog: &Program) -> String {
    let mut out = String::new();
    if !prog.base_types.is_empty() {
        let _ = writeln!(out, "base {};", prog.base_types.join(", "));
    }
    for (name, t) in &prog.type_aliases {
        let _ = writeln!(out, "type {name} = {t};");
    }
    for (name, m) in &prog.macros {
        if m.params.is_empty() {
            let _ = writeln!(out, "proc {name} = {};", m.body);
        } else {
            let _ = writeln!(out, "proc {name}({}) = {};", m.params.join(", "), m.body);
        }
    }
    if let Some(ctx) = &prog.context {
        let entries: Vec<String> = ctx
            .entries
            .iter()
            .map(|e| match e {
                Entry::Binding(x, t) => format!("{x}:{t}"),
                Entry::Resource(f) => f.to_string(),
            })
            .collect();
        let _ = writeln!(out, "context = {};", entries.join(", "));
    }
    let _ = writeln!(out, "main = {};", prog.main);
    out
}
