//! Pipeline orchestration shared by the CLI and the test harness.

use std::fmt;

use crate::borrowck::{self, borrow_check, module_sigs, BorrowCheckResult, BorrowOptions};
use crate::dataflow::NonTermination;
use crate::diag::{sort_diagnostics, Diagnostic, ErrorCode, Span};
use crate::ir::{dump_module, RirModule};
use crate::syntax::ast::RlModule;
use crate::syntax::{parse, print_module, typecheck};
use crate::{cgen, dropelab, liveness, lower, movecheck};

/// Passes in execution order. Borrow checking runs on elaborated IR by
/// default, so it comes after drop elaboration here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stage {
    Parse,
    Typecheck,
    Lower,
    MoveCheck,
    DropElab,
    BorrowCheck,
    Emit,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Parse,
        Stage::Typecheck,
        Stage::Lower,
        Stage::MoveCheck,
        Stage::DropElab,
        Stage::BorrowCheck,
        Stage::Emit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Parse => "parse",
            Stage::Typecheck => "typecheck",
            Stage::Lower => "lower",
            Stage::MoveCheck => "move-check",
            Stage::DropElab => "drop-elab",
            Stage::BorrowCheck => "borrow-check",
            Stage::Emit => "emit",
        }
    }

    pub fn from_name(s: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|st| st.name() == s)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which IR the borrow checker sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BorrowPlacement {
    PreElab,
    #[default]
    PostElab,
    /// Both, reporting the union of their diagnostics.
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Options {
    pub stop_after: Stage,
    pub borrow: BorrowOptions,
    pub placement: BorrowPlacement,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            stop_after: Stage::BorrowCheck,
            borrow: BorrowOptions::default(),
            placement: BorrowPlacement::PostElab,
        }
    }
}

/// Everything the pipeline produced before it stopped.
#[derive(Default)]
pub struct Compilation {
    pub ast: Option<RlModule>,
    pub rir: Option<RirModule>,
    pub move_results: Vec<movecheck::MoveCheckResult>,
    pub elab: Option<RirModule>,
    /// Results on the IR the borrow checker ran over last (elaborated
    /// unless the placement is pre-elaboration only).
    pub borrow_results: Vec<BorrowCheckResult>,
    pub borrow_on_elab: bool,
    pub diagnostics: Vec<Diagnostic>,
    pub completed: Option<Stage>,
}

impl Compilation {
    pub fn ok(&self) -> bool {
        self.diagnostics.is_empty()
    }

    /// The module to execute or emit: elaborated IR if the pipeline got
    /// that far and every check passed.
    pub fn runnable(&self) -> Option<&RirModule> {
        if self.ok() && self.completed >= Some(Stage::BorrowCheck) {
            self.elab.as_ref()
        } else {
            None
        }
    }
}

fn non_termination(e: NonTermination, what: &str) -> Diagnostic {
    Diagnostic::new(
        ErrorCode::InvalidType,
        Span::default(),
        format!("internal: {} analysis did not converge ({})", what, e),
    )
}

fn run_borrowck(m: &RirModule, opts: BorrowOptions) -> Result<Vec<BorrowCheckResult>, Diagnostic> {
    let sigs = module_sigs(m);
    m.functions
        .iter()
        .map(|f| borrow_check(&m.adts, &sigs, f, opts).map_err(|e| non_termination(e, "borrow")))
        .collect()
}

pub fn compile(source: &str, opts: &Options) -> Compilation {
    let mut c = Compilation::default();
    let finish = |mut c: Compilation, stage: Option<Stage>| {
        sort_diagnostics(&mut c.diagnostics);
        c.completed = stage;
        c
    };

    let ast = match parse(source) {
        Ok(a) => a,
        Err(d) => {
            c.diagnostics = d;
            return finish(c, None);
        }
    };
    c.ast = Some(ast.clone());
    if opts.stop_after == Stage::Parse {
        return finish(c, Some(Stage::Parse));
    }

    let typed = match typecheck(ast) {
        Ok(t) => t,
        Err(d) => {
            c.diagnostics = d;
            return finish(c, Some(Stage::Parse));
        }
    };
    if opts.stop_after == Stage::Typecheck {
        return finish(c, Some(Stage::Typecheck));
    }

    let rir = lower::lower(&typed);
    c.rir = Some(rir.clone());
    if opts.stop_after == Stage::Lower {
        return finish(c, Some(Stage::Lower));
    }

    for f in &rir.functions {
        match movecheck::move_check(&rir.adts, f) {
            Ok(r) => {
                c.diagnostics.extend(r.diagnostics.iter().cloned());
                c.move_results.push(r);
            }
            Err(e) => c.diagnostics.push(non_termination(e, "move").in_function(&f.name)),
        }
    }
    if !c.ok() {
        return finish(c, Some(Stage::Lower));
    }
    if opts.stop_after == Stage::MoveCheck {
        return finish(c, Some(Stage::MoveCheck));
    }

    if opts.placement != BorrowPlacement::PostElab {
        match run_borrowck(&rir, opts.borrow) {
            Ok(rs) => {
                c.diagnostics
                    .extend(rs.iter().flat_map(|r| r.diagnostics.iter().cloned()));
                c.borrow_results = rs;
            }
            Err(d) => c.diagnostics.push(d),
        }
    }

    let elab = match dropelab::elaborate_module(&rir) {
        Ok(m) => m,
        Err(e) => {
            c.diagnostics.push(non_termination(e, "initialization"));
            return finish(c, Some(Stage::MoveCheck));
        }
    };
    c.elab = Some(elab.clone());
    if opts.stop_after == Stage::DropElab {
        return finish(c, Some(Stage::DropElab));
    }

    if opts.placement != BorrowPlacement::PreElab {
        match run_borrowck(&elab, opts.borrow) {
            Ok(rs) => {
                let seen: Vec<Diagnostic> = c.diagnostics.clone();
                for d in rs.iter().flat_map(|r| r.diagnostics.iter()) {
                    // the same conflict found on both placements is reported once
                    if !seen
                        .iter()
                        .any(|s| s.code == d.code && s.span == d.span && s.function == d.function)
                    {
                        c.diagnostics.push(d.clone());
                    }
                }
                c.borrow_results = rs;
                c.borrow_on_elab = true;
            }
            Err(d) => c.diagnostics.push(d),
        }
    }
    finish(c, Some(Stage::BorrowCheck))
}

/// Dump selectors accepted by `--dump`.
pub const DUMPS: [&str; 7] = [
    "ast",
    "rustir",
    "rustir-elab",
    "dataflow:liveness",
    "dataflow:move",
    "dataflow:init",
    "dataflow:borrow",
];

/// The stage a dump needs to have completed.
pub fn dump_stage(sel: &str) -> Stage {
    match sel {
        "ast" => Stage::Parse,
        "rustir" | "dataflow:liveness" => Stage::Lower,
        "dataflow:move" => Stage::MoveCheck,
        "rustir-elab" | "dataflow:init" => Stage::DropElab,
        _ => Stage::BorrowCheck,
    }
}

/// Render a dump from whatever the compilation produced; `None` if the
/// pipeline stopped before the needed stage.
pub fn render_dump(c: &Compilation, sel: &str) -> Option<String> {
    let per_fn = |m: &RirModule, f: &dyn Fn(usize) -> Option<String>| -> Option<String> {
        let mut out = String::new();
        for (i, func) in m.functions.iter().enumerate() {
            out.push_str(&format!("fn {}:\n", func.name));
            out.push_str(&f(i)?);
        }
        Some(out)
    };
    match sel {
        "ast" => c.ast.as_ref().map(print_module),
        "rustir" => c.rir.as_ref().map(dump_module),
        "rustir-elab" => c.elab.as_ref().map(dump_module),
        "dataflow:liveness" => {
            let m = c.rir.as_ref()?;
            per_fn(m, &|i| {
                let live = liveness::region_liveness(&m.functions[i]).ok()?;
                Some(liveness::dump(&m.functions[i], &live))
            })
        }
        "dataflow:move" => {
            let m = c.rir.as_ref()?;
            if c.move_results.len() != m.functions.len() {
                return None;
            }
            per_fn(m, &|i| {
                Some(movecheck::dump(&m.adts, &m.functions[i], &c.move_results[i]))
            })
        }
        "dataflow:init" => {
            let m = c.rir.as_ref()?;
            c.elab.as_ref()?;
            per_fn(m, &|i| {
                let r = dropelab::init_analysis(&m.adts, &m.functions[i]).ok()?;
                Some(dropelab::dump(&m.adts, &m.functions[i], &r))
            })
        }
        "dataflow:borrow" => {
            if c.completed < Some(Stage::BorrowCheck) {
                return None;
            }
            let m = if c.borrow_on_elab {
                c.elab.as_ref()?
            } else {
                c.rir.as_ref()?
            };
            if c.borrow_results.len() != m.functions.len() {
                return None;
            }
            per_fn(m, &|i| {
                Some(borrowck::dump(&m.adts, &m.functions[i], &c.borrow_results[i]))
            })
        }
        _ => None,
    }
}

/// `--emit-loans` JSON: one record per function, one entry per loan.
pub fn loan_facts_json(c: &Compilation) -> Option<String> {
    let m = if c.borrow_on_elab {
        c.elab.as_ref()?
    } else {
        c.rir.as_ref()?
    };
    if c.borrow_results.len() != m.functions.len() {
        return None;
    }
    let facts: Vec<borrowck::FunctionFacts> = m
        .functions
        .iter()
        .zip(&c.borrow_results)
        .map(|(f, r)| borrowck::loan_facts(&m.adts, f, &r.loans))
        .collect();
    Some(serde_json::to_string_pretty(&facts).expect("loan facts serialize") + "\n")
}

pub fn emit_c(m: &RirModule, source: &str) -> String {
    cgen::emit(m, source)
}
