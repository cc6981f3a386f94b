//! The emitted C agrees with the interpreter and is memory-clean.

mod common;

use common::*;

#[test]
fn emitted_c_matches_annotations_and_is_memory_clean() {
    for tool in ["gcc", "valgrind"] {
        if !tool_available(tool) {
            eprintln!("{} not found; C differential skipped", tool);
            return;
        }
    }
    let failures = c_differential_corpus(true);
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

/// Both branches of the conditional-move diamond free the box once in
/// the compiled program too.
#[test]
fn compiled_diamond_is_clean_on_both_branches() {
    if !tool_available("gcc") || !tool_available("valgrind") {
        return;
    }
    let src = "fn diamond(c: bool) -> i32 { let b = Box::new(5); if c { let d = b; } return 1; }
               fn main(c: bool) -> i32 { return diamond(c); }";
    let m = compile(src);
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("d.c");
    std::fs::write(&c, rustlight::driver::emit_c(m.runnable().unwrap(), src)).unwrap();
    let bin = dir.path().join("d");
    let st = std::process::Command::new("gcc")
        .args(STRICT_CFLAGS)
        .arg("-o")
        .arg(&bin)
        .arg(&c)
        .status()
        .unwrap();
    assert!(st.success());
    for arg in ["true", "false"] {
        let st = std::process::Command::new("valgrind")
            .args(["-q", "--leak-check=full", "--errors-for-leak-kinds=all"])
            .arg(format!("--error-exitcode={}", CHECKER_EXIT))
            .arg(&bin)
            .arg(arg)
            .output()
            .unwrap();
        assert_eq!(
            st.status.code(),
            Some(1),
            "{}: {}",
            arg,
            String::from_utf8_lossy(&st.stderr)
        );
    }
}
