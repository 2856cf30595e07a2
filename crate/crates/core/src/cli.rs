//! The `linsess` command line: `check`, `reduce`, `safety` and `canon` over
//! `.lsp` files.
//!
//! Exit codes: 0 success, 1 type error, 2 parse or usage error, 3 stuck or
//! unsafe, 4 step limit reached.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::parser::{parse_context, parse_program, Diagnostic, Program, Severity};
use crate::semantics::{
    canonicalize, check_safety, run, CanonicalProcess, Policy, SafetyReport, Trace, Verdict,
};
use crate::syntax::{Context, Entry, Process};
use crate::typing::{typecheck, TypeError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TYPE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_STUCK: i32 = 3;
pub const EXIT_STEP_LIMIT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "linsess",
    version,
    about = "Pi calculus with assume/assert under linearly refined session types"
)]
pub struct Cli {
    /// Emit one JSON object instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Type-check the main process.
    Check {
        file: PathBuf,
        /// Check against the context declared in this file.
        #[arg(long)]
        context: Option<PathBuf>,
    },
    /// Run the main process.
    Reduce {
        file: PathBuf,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
        #[arg(long, value_enum, default_value_t = PolicyArg::Leftmost)]
        policy: PolicyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print every step.
        #[arg(long)]
        trace: bool,
    },
    /// Decide assert-safety of the main process.
    Safety {
        file: PathBuf,
        /// How many times each replication is unfolded.
        #[arg(long, default_value_t = 1)]
        unfold: usize,
    },
    /// Print the canonical form of the main process.
    Canon { file: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Leftmost,
    Random,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagnosticView {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub context: Option<String>,
}

impl DiagnosticView {
    fn parse(d: &Diagnostic, src: &str) -> DiagnosticView {
        let (line, col) = d.line_col(src);
        DiagnosticView {
            severity: d.severity,
            code: d.code.to_string(),
            message: d.message.clone(),
            line: Some(line),
            column: Some(col),
            at: None,
            context: None,
        }
    }

    fn typing(e: &TypeError) -> DiagnosticView {
        DiagnosticView {
            severity: Severity::Error,
            code: e.code.to_string(),
            message: e.message.clone(),
            line: None,
            column: None,
            at: Some(e.at.clone()),
            context: Some(e.context.clone()),
        }
    }

    fn plain(severity: Severity, code: &str, message: impl Into<String>) -> DiagnosticView {
        DiagnosticView {
            severity,
            code: code.to_string(),
            message: message.into(),
            line: None,
            column: None,
            at: None,
            context: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepView {
    pub index: usize,
    pub rule: String,
    pub details: String,
    pub process: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnmatchedView {
    pub atom: String,
    pub thread: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceView {
    pub steps: Vec<StepView>,
    pub terminal: String,
    pub verdict: Verdict,
    pub assumed: Vec<String>,
    pub unmatched: Vec<UnmatchedView>,
}

impl TraceView {
    fn new(t: &Trace) -> TraceView {
        TraceView {
            steps: t
                .steps
                .iter()
                .map(|s| StepView {
                    index: s.index,
                    rule: s.redex.kind.rule().to_string(),
                    details: s.details.clone(),
                    process: s.process.to_string(),
                })
                .collect(),
            terminal: t.terminal.to_string(),
            verdict: t.verdict,
            assumed: t.assumed.iter().map(|a| a.to_string()).collect(),
            unmatched: t
                .unmatched
                .iter()
                .map(|u| UnmatchedView {
                    atom: u.atom.to_string(),
                    thread: u.thread,
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessView {
    pub form: String,
    pub atom: String,
    pub thread: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SafetyView {
    pub safe: bool,
    pub witnesses: Vec<WitnessView>,
    pub explored_forms: usize,
    pub unfold_budget: usize,
    pub oversubscribed: Vec<String>,
}

impl SafetyView {
    fn new(r: &SafetyReport) -> SafetyView {
        SafetyView {
            safe: r.safe,
            witnesses: r
                .witnesses
                .iter()
                .map(|w| WitnessView {
                    form: w.form.clone(),
                    atom: w.atom.to_string(),
                    thread: w.thread,
                })
                .collect(),
            explored_forms: r.explored_forms,
            unfold_budget: r.unfold_budget,
            oversubscribed: r.oversubscribed.iter().map(|a| a.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CanonView {
    pub restrictions: Vec<String>,
    pub assumptions: Vec<String>,
    pub threads: Vec<String>,
}

impl CanonView {
    fn new(c: &CanonicalProcess) -> CanonView {
        CanonView {
            restrictions: c
                .restrictions
                .iter()
                .map(|r| match &r.peer {
                    Some(p) => format!("new {} {} : {}, {}", r.x, r.y, r.annot, p),
                    None => format!("new {} {} : {}", r.x, r.y, r.annot),
                })
                .collect(),
            assumptions: c.assumptions.iter().map(|a| a.to_string()).collect(),
            threads: c.threads.iter().map(|t| t.to_string()).collect(),
        }
    }
}

/// The outcome of one invocation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub file: String,
    pub verdict: String,
    pub diagnostics: Vec<DiagnosticView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub safety: Option<SafetyView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub canonical: Option<CanonView>,
    pub exit_code: i32,
}

impl Report {
    fn new(command: &'static str, file: &std::path::Path) -> Report {
        Report {
            command,
            file: file.display().to_string(),
            verdict: String::new(),
            diagnostics: Vec::new(),
            trace: None,
            safety: None,
            canonical: None,
            exit_code: EXIT_OK,
        }
    }

    fn fail(mut self, verdict: &str, code: i32) -> Report {
        self.verdict = verdict.to_string();
        self.exit_code = code;
        self
    }
}

/// What a run prints and returns.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

/// Parses arguments (including the program name) and runs the command.
pub fn execute<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    stdout: String::new(),
                    stderr: text,
                    code: EXIT_PARSE,
                }
            } else {
                Outcome {
                    stdout: text,
                    stderr: String::new(),
                    code: EXIT_OK,
                }
            };
        }
    };
    let report = dispatch(&cli.command);
    let mut out = Outcome {
        code: report.exit_code,
        ..Outcome::default()
    };
    if cli.json {
        out.stdout = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
    } else {
        let (stdout, stderr) = render_text(&cli.command, &report);
        out.stdout = stdout;
        out.stderr = stderr;
    }
    out
}

struct Loaded {
    program: Program,
    main: Process,
}

fn load(path: &std::path::Path, report: &mut Report) -> Option<Loaded> {
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            report.diagnostics.push(DiagnosticView::plain(
                Severity::Error,
                "E-IO",
                format!("cannot read {}: {e}", path.display()),
            ));
            return None;
        }
    };
    let program = match parse_program(&src) {
        Ok(p) => p,
        Err(ds) => {
            report
                .diagnostics
                .extend(ds.iter().map(|d| DiagnosticView::parse(d, &src)));
            return None;
        }
    };
    let main = match program.expand_macros() {
        Ok(m) => m,
        Err(e) => {
            report.diagnostics.push(DiagnosticView::plain(
                Severity::Error,
                "E-EXPAND",
                e.to_string(),
            ));
            return None;
        }
    };
    Some(Loaded { program, main })
}

fn is_unrestricted_context(g: &Context) -> bool {
    g.entries
        .iter()
        .all(|e| matches!(e, Entry::Binding(_, t) if t.is_unrestricted_unfolded()))
}

fn dispatch(cmd: &Command) -> Report {
    match cmd {
        Command::Check { file, context } => cmd_check(file, context.as_deref()),
        Command::Reduce {
            file,
            max_steps,
            policy,
            seed,
            ..
        } => cmd_reduce(file, *max_steps, *policy, *seed),
        Command::Safety { file, unfold } => cmd_safety(file, *unfold),
        Command::Canon { file } => cmd_canon(file),
    }
}

pub fn cmd_check(file: &std::path::Path, context: Option<&std::path::Path>) -> Report {
    let mut report = Report::new("check", file);
    let Some(loaded) = load(file, &mut report) else {
        return report.fail("parse-error", EXIT_PARSE);
    };
    let ctx = match context {
        None => loaded.program.initial_context(),
        Some(path) => {
            let src = match std::fs::read_to_string(path) {
                Ok(s) => s,
                Err(e) => {
                    report.diagnostics.push(DiagnosticView::plain(
                        Severity::Error,
                        "E-IO",
                        format!("cannot read {}: {e}", path.display()),
                    ));
                    return report.fail("parse-error", EXIT_PARSE);
                }
            };
            match parse_context(&src, &loaded.program) {
                Ok(c) => c,
                Err(ds) => {
                    report
                        .diagnostics
                        .extend(ds.iter().map(|d| DiagnosticView::parse(d, &src)));
                    return report.fail("parse-error", EXIT_PARSE);
                }
            }
        }
    };
    if !is_unrestricted_context(&ctx) {
        report.diagnostics.push(DiagnosticView::plain(
            Severity::Warning,
            "W-CONTEXT",
            "the context is not unrestricted; processes typable under arbitrary contexts may not be safe",
        ));
    }
    match typecheck(&ctx, &loaded.main) {
        Ok(()) => {
            report.verdict = "accept".to_string();
            report
        }
        Err(e) => {
            report.diagnostics.push(DiagnosticView::typing(&e));
            report.fail("reject", EXIT_TYPE)
        }
    }
}

pub fn cmd_reduce(
    file: &std::path::Path,
    max_steps: usize,
    policy: PolicyArg,
    seed: u64,
) -> Report {
    let mut report = Report::new("reduce", file);
    let Some(loaded) = load(file, &mut report) else {
        return report.fail("parse-error", EXIT_PARSE);
    };
    let mut policy = match policy {
        PolicyArg::Leftmost => Policy::Leftmost,
        PolicyArg::Random => Policy::seeded(seed),
    };
    let trace = run(&loaded.main, max_steps, &mut policy);
    report.verdict = trace.verdict.to_string();
    report.exit_code = match trace.verdict {
        Verdict::TerminatedClean => EXIT_OK,
        Verdict::StuckAssert | Verdict::StuckIo => EXIT_STUCK,
        Verdict::StepLimit => EXIT_STEP_LIMIT,
    };
    report.trace = Some(TraceView::new(&trace));
    report
}

pub fn cmd_safety(file: &std::path::Path, unfold: usize) -> Report {
    let mut report = Report::new("safety", file);
    let Some(loaded) = load(file, &mut report) else {
        return report.fail("parse-error", EXIT_PARSE);
    };
    let r = check_safety(&loaded.main, unfold);
    report.verdict = if r.safe { "safe" } else { "unsafe" }.to_string();
    report.exit_code = if r.safe { EXIT_OK } else { EXIT_STUCK };
    report.safety = Some(SafetyView::new(&r));
    report
}

pub fn cmd_canon(file: &std::path::Path) -> Report {
    let mut report = Report::new("canon", file);
    let Some(loaded) = load(file, &mut report) else {
        return report.fail("parse-error", EXIT_PARSE);
    };
    report.verdict = "ok".to_string();
    report.canonical = Some(CanonView::new(&canonicalize(&loaded.main)));
    report
}

fn render_text(cmd: &Command, report: &Report) -> (String, String) {
    let mut out = String::new();
    let mut err = String::new();
    for d in &report.diagnostics {
        let sev = match d.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        match (d.line, d.column) {
            (Some(l), Some(c)) => {
                let _ = writeln!(
                    err,
                    "{}:{l}:{c}: {sev}[{}]: {}",
                    report.file, d.code, d.message
                );
            }
            _ => {
                let _ = writeln!(err, "{}: {sev}[{}]: {}", report.file, d.code, d.message);
            }
        }
        if let Some(at) = d.at.as_deref().filter(|s| !s.is_empty()) {
            let _ = writeln!(err, "  in process: {at}");
        }
        if let Some(ctx) = d.context.as_deref().filter(|s| !s.is_empty()) {
            let _ = writeln!(err, "  available:  {ctx}");
        }
    }
    if report.exit_code == EXIT_PARSE || report.verdict == "reject" {
        let _ = writeln!(out, "{}", report.verdict);
        return (out, err);
    }
    if let Some(t) = &report.trace {
        if matches!(cmd, Command::Reduce { trace: true, .. }) {
            for s in &t.steps {
                let _ = writeln!(
                    out,
                    "step {}: {} {} |- {}",
                    s.index, s.rule, s.details, s.process
                );
            }
        }
        let _ = writeln!(out, "terminal: {}", t.terminal);
        let _ = writeln!(out, "steps: {}", t.steps.len());
        for u in &t.unmatched {
            let _ = writeln!(out, "unmatched: assert {} in thread {}", u.atom, u.thread);
        }
        if !t.unmatched.is_empty() {
            let _ = writeln!(out, "assumed: {{{}}}", t.assumed.join(", "));
        }
    }
    if let Some(s) = &report.safety {
        for w in &s.witnesses {
            let _ = writeln!(
                out,
                "witness: assert {} in thread {} of {}",
                w.atom, w.thread, w.form
            );
        }
        for a in &s.oversubscribed {
            let _ = writeln!(out, "note: {a} is asserted more often than it is assumed");
        }
        let _ = writeln!(
            out,
            "explored {} canonical forms (unfold budget {})",
            s.explored_forms, s.unfold_budget
        );
    }
    if let Some(c) = &report.canonical {
        let _ = writeln!(out, "restrictions:");
        for r in &c.restrictions {
            let _ = writeln!(out, "  {r}");
        }
        let _ = writeln!(out, "assumptions: {{{}}}", c.assumptions.join(", "));
        let _ = writeln!(out, "threads:");
        for (i, t) in c.threads.iter().enumerate() {
            let _ = writeln!(out, "  [{i}] {t}");
        }
        return (out, err);
    }
    let _ = writeln!(out, "{}", report.verdict);
    (out, err)
}
