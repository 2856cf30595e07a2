use std::fmt;

use serde::Serialize;

use super::canonical::{assert_chain, canonicalize};
use super::reduce::{describe, find_redexes, fire, Policy, Redex};
use super::safety::check_safety;
use crate::syntax::{Atom, Process};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    TerminatedClean,
    StuckAssert,
    StuckIo,
    StepLimit,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::TerminatedClean => "terminated-clean",
            Verdict::StuckAssert => "stuck-assert",
            Verdict::StuckIo => "stuck-io",
            Verdict::StepLimit => "step-limit",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub index: usize,
    pub redex: Redex,
    pub details: String,
    pub process: Process,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "step {}: {} {} |- {}",
            self.index,
            self.redex.kind.rule(),
            self.details,
            self.process
        )
    }
}

/// An assertion left at the head of a thread of the terminal process.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Unmatched {
    pub atom: Atom,
    pub thread: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub initial: Process,
    pub steps: Vec<Step>,
    pub terminal: Process,
    pub verdict: Verdict,
    /// The assumptions of the terminal process.
    pub assumed: Vec<Atom>,
    pub unmatched: Vec<Unmatched>,
}

impl Trace {
    pub fn render(&self) -> String {
        let mut s = String::new();
        for step in &self.steps {
            s.push_str(&step.to_string());
            s.push('\n');
        }
        s
    }
}

/// Reduces `p` until no redex is left or `max_steps` steps were taken.
pub fn run(p: &Process, max_steps: usize, policy: &mut Policy) -> Trace {
    let mut c = canonicalize(p);
    let mut steps = Vec::new();
    loop {
        let redexes = find_redexes(&c);
        if redexes.is_empty() {
            break;
        }
        if steps.len() == max_steps {
            return Trace {
                initial: p.clone(),
                steps,
                terminal: c.to_process(),
                verdict: Verdict::StepLimit,
                assumed: c.assumptions.iter().cloned().collect(),
                unmatched: Vec::new(),
            };
        }
        let r = redexes[policy.pick(redexes.len())].clone();
        let details = describe(&c, &r);
        c = fire(&c, &r);
        steps.push(Step {
            index: steps.len() + 1,
            redex: r,
            details,
            process: c.to_process(),
        });
    }
    let terminal = c.to_process();
    let mut unmatched: Vec<Unmatched> = Vec::new();
    for (i, t) in c.threads.iter().enumerate() {
        for atom in assert_chain(t).0 {
            unmatched.push(Unmatched { atom, thread: i });
        }
    }
    let verdict = if !unmatched.is_empty() {
        Verdict::StuckAssert
    } else {
        let report = check_safety(&terminal, 1);
        if !report.safe {
            unmatched.extend(report.witnesses.into_iter().map(|w| Unmatched {
                atom: w.atom,
                thread: w.thread,
            }));
            Verdict::StuckAssert
        } else if c
            .threads
            .iter()
            .all(|t| matches!(t, Process::Inact | Process::Repl(_)))
        {
            Verdict::TerminatedClean
        } else {
            Verdict::StuckIo
        }
    };
    Trace {
        initial: p.clone(),
        steps,
        terminal,
        verdict,
        assumed: c.assumptions.iter().cloned().collect(),
        unmatched,
    }
}
