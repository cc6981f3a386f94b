//! Whole-corpus checks: verdicts, rustc agreement, runtime behavior of
//! accepted programs, and structural invariants of the IR.

mod common;

use std::collections::{BTreeSet, HashMap};

use common::*;
use rustlight::borrowck::BorrowOptions;
use rustlight::cgen;
use rustlight::driver::{self, BorrowPlacement, Options};
use rustlight::dropelab::elaborate_module;
use rustlight::interp::{self, Config, Outcome};
use rustlight::ir::{Instr, LocalKind, Operand, Place, Rvalue};
use rustlight::movecheck::{classify_move, MoveKind, MovePaths};
use rustlight::syntax::{parse, print_module};

#[test]
fn corpus_has_required_slices() {
    let c = corpus();
    let count = |f: &dyn Fn(&Program) -> bool| c.iter().filter(|p| f(p)).count();
    assert!(c.len() >= 40, "{} programs", c.len());
    assert!(count(&|p| p.slice == "accept") >= 15);
    assert!(count(&|p| p.slice == "reject") >= 15);
    assert!(count(&|p| p.is_edge()) >= 10);
    for p in &c {
        let slices = [
            "accept",
            "reject",
            "edge-nll",
            "edge-reborrow",
            "edge-condmove",
            "edge-invariance",
            "divergence",
        ];
        assert!(slices.contains(&p.slice.as_str()), "{}: slice {}", p.name, p.slice);
        if p.slice == "reject" {
            assert!(
                OWNERSHIP_CODES.contains(&p.rustc.as_str()) || p.rustc == "error",
                "{}",
                p.name
            );
        }
    }
}

#[test]
fn verdicts_match_headers() {
    for p in corpus() {
        let c = compile(&p.source);
        assert_eq!(verdict(&c), p.expect, "{}: {:?}", p.name, c.diagnostics);
        if let Verdict::Reject(code) = p.expect {
            assert!(
                code.is_ownership_error(),
                "{}: corpus rejections are ownership errors",
                p.name
            );
            assert_eq!(codes(&c), BTreeSet::from([code]), "{}", p.name);
        }
    }
}

#[test]
fn rustc_headers_are_accurate() {
    if !tool_available("rustc") {
        eprintln!("rustc not found; header check skipped");
        return;
    }
    for p in corpus() {
        assert_eq!(rustc_verdict(&p.path), p.rustc, "{}", p.name);
    }
}

/// Verdicts agree with rustc except on ledgered files, and every ledgered
/// file really does diverge in the recorded way.
#[test]
fn divergence_ledger_is_exact() {
    let ledger = divergences();
    assert!(ledger.len() <= 5);
    let listed: HashMap<String, Divergence> = ledger.into_iter().map(|d| (d.file.clone(), d)).collect();
    for p in corpus() {
        let ours_accepts = p.expect == Verdict::Accept;
        let rustc_accepts = p.rustc == "ok";
        let file = format!("{}.rs", p.name);
        match listed.get(&file) {
            Some(d) => {
                assert_ne!(
                    ours_accepts, rustc_accepts,
                    "{} is ledgered but agrees with rustc",
                    file
                );
                assert_eq!(d.rustc, p.rustc, "{}", file);
                let ours = match &p.expect {
                    Verdict::Accept => "accept".to_string(),
                    Verdict::Reject(c) => format!("reject {}", c.code()),
                };
                assert_eq!(d.ours, ours, "{}", file);
                assert!(!d.reason.is_empty());
            }
            None => assert_eq!(
                ours_accepts, rustc_accepts,
                "{} diverges from rustc but is not ledgered",
                file
            ),
        }
    }
}

#[test]
fn both_check_placements_agree() {
    for p in corpus() {
        let verdicts: Vec<Verdict> = [
            BorrowPlacement::PreElab,
            BorrowPlacement::PostElab,
            BorrowPlacement::Both,
        ]
        .into_iter()
        .map(|placement| {
            verdict(&driver::compile(
                &p.source,
                &Options {
                    placement,
                    ..Options::default()
                },
            ))
        })
        .collect();
        assert!(verdicts.iter().all(|v| *v == verdicts[0]), "{}: {:?}", p.name, verdicts);
    }
}

/// Field insensitivity only ever adds rejections.
#[test]
fn field_insensitive_mode_is_coarser() {
    let fi = Options {
        borrow: BorrowOptions {
            field_insensitive: true,
        },
        ..Options::default()
    };
    let mut extra = vec![];
    for p in corpus() {
        let sensitive = compile(&p.source);
        let insensitive = driver::compile(&p.source, &fi);
        if !sensitive.ok() {
            assert!(!insensitive.ok(), "{}", p.name);
        } else if !insensitive.ok() {
            extra.push(p.name);
        }
    }
    assert!(extra.contains(&"accept_disjoint_fields".to_string()), "{:?}", extra);
}

#[test]
fn accepted_programs_run_as_annotated_without_memory_errors() {
    for p in corpus() {
        let Some(expected) = &p.run else { continue };
        let c = compile(&p.source);
        let m = c.runnable().unwrap_or_else(|| panic!("{} should be runnable", p.name));
        let r = interp::eval(m, "main", vec![], Config::default());
        match (&r.outcome, expected.strip_prefix("trap ")) {
            (Outcome::Returned(v), None) => assert_eq!(v.to_string(), *expected, "{}", p.name),
            (Outcome::Trap(t), Some(kind)) => {
                assert_eq!(t.kind.to_string(), kind, "{}", p.name);
                assert!(!t.kind.is_memory_error());
                continue;
            }
            (o, _) => panic!("{}: got {}, want {}", p.name, o, expected),
        }
        assert_eq!(r.leaked, 0, "{} leaks", p.name);
        assert!(
            r.trace.frees_per_alloc().iter().all(|&n| n == 1),
            "{}: {}",
            p.name,
            r.trace
        );
    }
}

#[test]
fn conditional_move_frees_exactly_once_on_each_branch() {
    let p = corpus()
        .into_iter()
        .find(|p| p.name == "edge_condmove_diamond")
        .unwrap();
    let c = compile(&p.source);
    let m = c.runnable().unwrap();
    for branch in [true, false] {
        let r = interp::eval(m, "diamond", vec![interp::SValue::Bool(branch)], Config::default());
        assert!(matches!(r.outcome, Outcome::Returned(_)));
        assert_eq!(r.trace.frees_per_alloc(), vec![1], "branch {}:\n{}", branch, r.trace);
    }
    // the flag test sits only on the join path
    let f = m.function("diamond").unwrap();
    assert!(f.nodes.iter().any(|n| matches!(n.instr, Instr::ConditionalDrop { .. })));
}

#[test]
fn elaboration_is_idempotent() {
    for p in corpus() {
        let c = compile(&p.source);
        if let Some(elab) = &c.elab {
            assert_eq!(&elaborate_module(elab).unwrap(), elab, "{}", p.name);
        }
    }
}

#[test]
fn printing_then_parsing_is_identity() {
    for p in corpus() {
        let mut a = parse(&p.source).unwrap();
        let printed = print_module(&a);
        let mut b = parse(&printed).unwrap_or_else(|e| panic!("{}: {:?}\n{}", p.name, e, printed));
        a.strip_spans();
        b.strip_spans();
        assert_eq!(a, b, "{}", p.name);
    }
}

/// Existential regions are exactly: one per reference rvalue, one per
/// region in the type of each non-parameter local, one per callee
/// universal at each call.
#[test]
fn region_freshness() {
    for p in corpus() {
        let Some(m) = compile(&p.source).rir else { continue };
        for f in &m.functions {
            let refs = f
                .nodes
                .iter()
                .filter(|n| {
                    matches!(
                        n.instr,
                        Instr::Assign {
                            rvalue: Rvalue::Ref(..),
                            ..
                        }
                    )
                })
                .count();
            let locals: usize = f
                .locals
                .iter()
                .filter(|d| !matches!(d.kind, LocalKind::Param | LocalKind::Return))
                .map(|d| d.ty.regions().len())
                .sum();
            let calls: usize = f
                .nodes
                .iter()
                .map(|n| match &n.instr {
                    Instr::Call { region_args, .. } => region_args.len(),
                    _ => 0,
                })
                .sum();
            let existentials = (f.num_regions - f.sig.universals) as usize;
            assert_eq!(existentials, refs + locals + calls, "{}::{}", p.name, f.name);
        }
    }
}

/// The move-path universe is the locals plus every prefix of each moved
/// or dropped place, found here by a direct scan.
#[test]
fn move_path_universe_matches_scan() {
    for p in corpus() {
        let c = compile(&p.source);
        for m in [c.rir.as_ref(), c.elab.as_ref()].into_iter().flatten() {
            for f in &m.functions {
                let mut want: BTreeSet<Place> = (0..f.locals.len() as u32)
                    .map(|l| Place::local(rustlight::ir::Local(l)))
                    .collect();
                for n in &f.nodes {
                    let mut places: Vec<&Place> = n
                        .instr
                        .operands()
                        .into_iter()
                        .filter_map(|o| if let Operand::Move(p) = o { Some(p) } else { None })
                        .collect();
                    if let Instr::Drop { place, .. } | Instr::ConditionalDrop { place, .. } = &n.instr {
                        places.push(place);
                    }
                    for pl in places {
                        if let MoveKind::Plain(c) | MoveKind::Consume(c) = classify_move(&m.adts, f, pl) {
                            for k in 0..=c.proj.len() {
                                want.insert(c.truncated(k));
                            }
                        }
                    }
                }
                let got: BTreeSet<Place> = MovePaths::build(&m.adts, f).paths.into_iter().collect();
                assert_eq!(got, want, "{}::{}", p.name, f.name);
            }
        }
    }
}

/// Distinct types get distinct C names within every corpus module, and
/// within a module whose ADT names imitate mangled builtins.
#[test]
fn mangled_names_do_not_collide() {
    let tricky = "struct box_i32 { a: i32 } struct ref_i32 { b: Box<box_i32> } \
        fn main() -> i32 { let x = box_i32 { a: 1 }; let y = Box::new(1); let r = &y; \
        let z = ref_i32 { b: Box::new(box_i32 { a: 2 }) }; let w = &z; return 0; }";
    let mut sources: Vec<(String, String)> = corpus().into_iter().map(|p| (p.name, p.source)).collect();
    sources.push(("tricky".into(), tricky.into()));
    for (name, src) in sources {
        let Some(m) = compile(&src).elab else { continue };
        let mut tys: Vec<rustlight::types::SynTy> = vec![];
        for f in &m.functions {
            for d in &f.locals {
                let mut t = Some(d.ty.erase());
                while let Some(x) = t {
                    t = x.deref().cloned();
                    tys.push(x);
                }
            }
        }
        for id in m.adts.ids() {
            let def = m.adts.get(id);
            let variants = if def.is_enum() { def.variants().len() } else { 1 };
            for v in 0..variants {
                let var = def.is_enum().then_some(v as u32);
                let n = if def.is_enum() {
                    def.variants()[v].fields.len()
                } else {
                    def.struct_fields().len()
                };
                for i in 0..n {
                    tys.push(m.adts.field_ty(id, var, i as u32).clone());
                }
            }
        }
        let mut names: HashMap<String, rustlight::types::SynTy> = HashMap::new();
        for t in tys {
            let n = cgen::mangle(&m.adts, &t);
            if let Some(prev) = names.insert(n.clone(), t.clone()).filter(|p| *p != t) {
                panic!("{}: `{}` names both {:?} and {:?}", name, n, prev, t);
            }
        }
        assert!(!names.is_empty());
    }
}
