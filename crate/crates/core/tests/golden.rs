//! Snapshot tests for IR dumps and execution traces. Set
//! `RUSTLIGHT_BLESS=1` to rewrite the snapshots after reviewing a change.

mod common;

use std::path::Path;

use common::*;
use rustlight::driver;
use rustlight::interp::{self, Config};

const PROGRAMS: [&str; 5] = [
    "accept_nested_box",
    "accept_partial_move",
    "accept_option_box",
    "edge_condmove_diamond",
    "edge_condmove_reinit",
];

fn check(name: &str, ext: &str, got: &str) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{}.{}", name, ext));
    if std::env::var_os("RUSTLIGHT_BLESS").is_some() {
        std::fs::write(&path, got).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {}", path.display(), e));
    assert_eq!(got, want, "{} differs from its snapshot", path.display());
}

fn program(name: &str) -> Program {
    corpus().into_iter().find(|p| p.name == name).unwrap()
}

#[test]
fn rustir_snapshots() {
    for name in PROGRAMS {
        let c = compile(&program(name).source);
        check(name, "rustir", &driver::render_dump(&c, "rustir").unwrap());
    }
}

#[test]
fn elaborated_snapshots() {
    for name in PROGRAMS {
        let c = compile(&program(name).source);
        check(name, "elab", &driver::render_dump(&c, "rustir-elab").unwrap());
    }
}

#[test]
fn trace_snapshots() {
    for name in PROGRAMS {
        let c = compile(&program(name).source);
        let r = interp::eval(
            c.runnable().unwrap(),
            "main",
            vec![],
            Config {
                trace_assigns: true,
                ..Config::default()
            },
        );
        check(name, "trace", &format!("{}{}\n", r.trace, r.outcome));
    }
}
