//! Helpers shared by the integration tests: corpus loading, random
//! abstract states and graphs, and a chaotic-iteration reference solver.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::Rng;

use rustlight::borrowck::domain::AbstractState;
use rustlight::dataflow::{Analysis, Cfg, Direction, FlowResult, JoinSemiLattice};
use rustlight::diag::ErrorCode;
use rustlight::driver::{self, Compilation, Options};
use rustlight::ir::{NodeId, Region};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Reject(ErrorCode),
}

impl Verdict {
    fn parse(s: &str) -> Verdict {
        match s.split_whitespace().collect::<Vec<_>>()[..] {
            ["accept"] => Verdict::Accept,
            ["reject", code] => {
                Verdict::Reject(ErrorCode::from_code(code).unwrap_or_else(|| panic!("bad code {}", code)))
            }
            _ => panic!("bad expect header `{}`", s),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Program {
    pub name: String,
    pub path: PathBuf,
    pub source: String,
    pub slice: String,
    pub expect: Verdict,
    /// `ok`, `error`, or an `E0xxx` code.
    pub rustc: String,
    /// Expected `run` output: a value or `trap <Kind>`.
    pub run: Option<String>,
}

impl Program {
    pub fn is_edge(&self) -> bool {
        self.slice.starts_with("edge-")
    }
}

fn header<'a>(src: &'a str, key: &str) -> Option<&'a str> {
    src.lines()
        .take_while(|l| l.starts_with("//"))
        .find_map(|l| l.strip_prefix("// ")?.strip_prefix(key)?.strip_prefix(": "))
        .map(str::trim)
}

pub fn corpus() -> Vec<Program> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "rs"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let source = std::fs::read_to_string(&path).unwrap();
            let name = path.file_stem().unwrap().to_string_lossy().into_owned();
            let get = |k: &str| {
                header(&source, k)
                    .unwrap_or_else(|| panic!("{}: missing `{}` header", name, k))
                    .to_string()
            };
            Program {
                slice: get("slice"),
                expect: Verdict::parse(&get("expect")),
                rustc: get("rustc"),
                run: header(&source, "run").map(str::to_string),
                name,
                path,
                source,
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Divergence {
    pub file: String,
    pub ours: String,
    pub rustc: String,
    pub reason: String,
}

pub fn divergences() -> Vec<Divergence> {
    let text = std::fs::read_to_string(corpus_dir().join("divergences.txt")).unwrap();
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| {
            let parts: Vec<&str> = l.splitn(4, '|').map(str::trim).collect();
            assert_eq!(parts.len(), 4, "bad divergence line `{}`", l);
            Divergence {
                file: parts[0].into(),
                ours: parts[1].into(),
                rustc: parts[2].into(),
                reason: parts[3].into(),
            }
        })
        .collect()
}

pub fn compile(src: &str) -> Compilation {
    driver::compile(src, &Options::default())
}

/// The verdict the pipeline reaches: accept, or the first diagnostic's code.
pub fn verdict(c: &Compilation) -> Verdict {
    match c.diagnostics.first() {
        None => Verdict::Accept,
        Some(d) => Verdict::Reject(d.code),
    }
}

/// Distinct diagnostic codes, sorted.
pub fn codes(c: &Compilation) -> BTreeSet<ErrorCode> {
    c.diagnostics.iter().map(|d| d.code).collect()
}

pub fn tool_available(tool: &str) -> bool {
    Command::new(tool)
        .arg("--version")
        .output()
        .is_ok_and(|o| o.status.success())
}

/// rustc's verdict on a file as a library crate: `ok`, the first error
/// code, or `error` for uncoded errors.
pub fn rustc_verdict(path: &Path) -> String {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new("rustc")
        .args([
            "--edition",
            "2021",
            "--crate-type",
            "lib",
            "--emit=metadata",
            "--cap-lints",
            "allow",
            "-o",
        ])
        .arg(dir.path().join("out.rmeta"))
        .arg(path)
        .output()
        .expect("rustc runs");
    if out.status.success() {
        return "ok".into();
    }
    let stderr = String::from_utf8_lossy(&out.stderr);
    stderr
        .lines()
        .find_map(|l| {
            let rest = l.strip_prefix("error[")?;
            Some(rest[..rest.find(']')?].to_string())
        })
        .unwrap_or_else(|| "error".into())
}

/// rustc codes that denote a borrow or move rejection.
pub const OWNERSHIP_CODES: [&str; 10] = [
    "E0381", "E0382", "E0499", "E0502", "E0503", "E0505", "E0506", "E0507", "E0515", "E0597",
];

/// Codes named by the soundness criterion.
pub const SOUNDNESS_CODES: [&str; 7] = ["E0382", "E0499", "E0502", "E0505", "E0506", "E0507", "E0515"];

// ---------------------------------------------------------------------------
// Random abstract states

#[derive(Debug, Clone)]
pub enum Op {
    Add(u32, usize),
    Flow(u32, u32),
    Union(u32, u32),
    Kill(Vec<bool>),
}

pub fn apply(s: &mut AbstractState, op: &Op) {
    match op {
        Op::Add(r, l) => s.add_loan(Region(*r), *l),
        Op::Flow(a, b) => s.flow(Region(*a), Region(*b)),
        Op::Union(a, b) => s.union(Region(*a), Region(*b)),
        Op::Kill(dead) => {
            let mut d = FixedBitSet::with_capacity(dead.len());
            for (i, &x) in dead.iter().enumerate() {
                d.set(i, x);
            }
            s.kill(&d);
        }
    }
}

pub fn random_op<R: Rng>(rng: &mut R, regions: u32, loans: usize) -> Op {
    match rng.gen_range(0..10) {
        0..=3 if loans > 0 => Op::Add(rng.gen_range(0..regions), rng.gen_range(0..loans)),
        0..=5 => Op::Flow(rng.gen_range(0..regions), rng.gen_range(0..regions)),
        6..=7 => Op::Union(rng.gen_range(0..regions), rng.gen_range(0..regions)),
        _ => Op::Kill((0..regions).map(|_| rng.gen_bool(0.3)).collect()),
    }
}

/// A well-formed state reached from bottom by a random operation sequence
/// ending in a kill, the shape every transfer has. Dead regions are
/// revived first so loans can land anywhere.
pub fn random_state<R: Rng>(rng: &mut R, regions: u32, universals: u32, loans: usize) -> AbstractState {
    let mut s = AbstractState::bottom(regions as usize, universals as usize, loans);
    apply(&mut s, &Op::Kill(vec![false; regions as usize]));
    for _ in 0..rng.gen_range(0..12) {
        let op = random_op(rng, regions, loans);
        apply(&mut s, &op);
    }
    apply(&mut s, &Op::Kill((0..regions).map(|_| rng.gen_bool(0.3)).collect()));
    s
}

/// Region-wise view of a state, independent of the representation: for
/// each region, its class as a sorted member list, its loans, and whether
/// it is dead.
pub type View = Vec<(Vec<u32>, Vec<usize>, bool)>;

pub fn view(s: &AbstractState) -> View {
    let n = s.num_regions() as u32;
    (0..n)
        .map(|r| {
            let class: Vec<u32> = (0..n).filter(|&q| s.find(Region(q)) == s.find(Region(r))).collect();
            let loans = s.loans_of(Region(r)).map(|b| b.ones().collect()).unwrap_or_default();
            (class, loans, s.dead().contains(r as usize))
        })
        .collect()
}

/// The least upper bound computed from scratch on views: equivalence
/// closure of both partitions, per-class union of both sides' loans, and
/// the intersection of dead sets.
pub fn lub_oracle(a: &AbstractState, b: &AbstractState) -> View {
    let (va, vb) = (view(a), view(b));
    let n = va.len();
    let mut rel = vec![vec![false; n]; n];
    for v in [&va, &vb] {
        for (r, (class, _, _)) in v.iter().enumerate() {
            for &q in class {
                rel[r][q as usize] = true;
            }
        }
    }
    // Floyd-Warshall style transitive closure
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if rel[i][k] && rel[k][j] {
                    rel[i][j] = true;
                }
            }
        }
    }
    (0..n)
        .map(|r| {
            let class: Vec<u32> = (0..n).filter(|&q| rel[r][q]).map(|q| q as u32).collect();
            let mut loans = BTreeSet::new();
            for &q in &class {
                loans.extend(va[q as usize].1.iter().copied());
                loans.extend(vb[q as usize].1.iter().copied());
            }
            (class, loans.into_iter().collect(), va[r].2 && vb[r].2)
        })
        .collect()
}

/// Order on views: coarser partition, more loans, fewer dead regions.
pub fn view_leq(a: &View, b: &View) -> bool {
    a.iter().zip(b).all(|((ca, la, da), (cb, lb, db))| {
        ca.iter().all(|q| cb.contains(q)) && la.iter().all(|l| lb.contains(l)) && (*db <= *da)
    })
}

// ---------------------------------------------------------------------------
// Random graphs and a reference solver

pub struct Graph {
    pub succ: Vec<Vec<NodeId>>,
}

impl Cfg for Graph {
    fn num_nodes(&self) -> usize {
        self.succ.len()
    }

    fn successors(&self, n: NodeId) -> Vec<NodeId> {
        self.succ[n].clone()
    }
}

pub fn random_graph<R: Rng>(rng: &mut R, max_nodes: usize) -> Graph {
    let n = rng.gen_range(1..=max_nodes);
    let succ = (0..n)
        .map(|_| {
            let k = rng.gen_range(0..=2);
            let mut s: Vec<NodeId> = (0..k).map(|_| rng.gen_range(0..n)).collect();
            s.sort();
            s.dedup();
            s
        })
        .collect();
    Graph { succ }
}

/// Gen/kill over a small bit universe, either direction.
pub struct GenKill {
    pub dir: Direction,
    pub bits: usize,
    pub gen: Vec<FixedBitSet>,
    pub kill: Vec<FixedBitSet>,
    pub boundary: FixedBitSet,
}

fn random_bits<R: Rng>(rng: &mut R, n: usize, p: f64) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(n);
    for i in 0..n {
        s.set(i, rng.gen_bool(p));
    }
    s
}

impl GenKill {
    pub fn random<R: Rng>(rng: &mut R, nodes: usize) -> GenKill {
        let bits = 6;
        GenKill {
            dir: if rng.gen_bool(0.5) {
                Direction::Forward
            } else {
                Direction::Backward
            },
            bits,
            gen: (0..nodes).map(|_| random_bits(rng, bits, 0.25)).collect(),
            kill: (0..nodes).map(|_| random_bits(rng, bits, 0.25)).collect(),
            boundary: random_bits(rng, bits, 0.3),
        }
    }
}

impl Analysis for GenKill {
    type State = FixedBitSet;

    fn direction(&self) -> Direction {
        self.dir
    }

    fn bottom(&self) -> FixedBitSet {
        FixedBitSet::with_capacity(self.bits)
    }

    fn boundary(&self) -> FixedBitSet {
        self.boundary.clone()
    }

    fn transfer(&self, n: NodeId, s: &FixedBitSet) -> FixedBitSet {
        let mut out = s.clone();
        out.difference_with(&self.kill[n]);
        out.union_with(&self.gen[n]);
        out
    }

    fn chain_bound(&self) -> usize {
        self.bits + 1
    }
}

/// Random loan-domain transfers: each node applies a fixed op sequence
/// (gens, flows, unions) followed by a kill.
pub struct LoanOps {
    pub regions: u32,
    pub loans: usize,
    pub ops: Vec<Vec<Op>>,
    pub boundary: AbstractState,
}

impl LoanOps {
    pub fn random<R: Rng>(rng: &mut R, nodes: usize) -> LoanOps {
        let regions = rng.gen_range(1..=5u32);
        let loans = rng.gen_range(1..=4usize);
        let ops = (0..nodes)
            .map(|_| {
                let mut v: Vec<Op> = (0..rng.gen_range(0..4))
                    .map(|_| random_op(rng, regions, loans))
                    .filter(|o| !matches!(o, Op::Kill(_)))
                    .collect();
                v.push(Op::Kill((0..regions).map(|_| rng.gen_bool(0.3)).collect()));
                v
            })
            .collect();
        let boundary = random_state(rng, regions, 0, loans);
        LoanOps {
            regions,
            loans,
            ops,
            boundary,
        }
    }
}

impl Analysis for LoanOps {
    type State = AbstractState;

    fn direction(&self) -> Direction {
        Direction::Forward
    }

    fn bottom(&self) -> AbstractState {
        AbstractState::bottom(self.regions as usize, 0, self.loans)
    }

    fn boundary(&self) -> AbstractState {
        self.boundary.clone()
    }

    fn transfer(&self, n: NodeId, s: &AbstractState) -> AbstractState {
        let mut out = s.clone();
        for op in &self.ops[n] {
            apply(&mut out, op);
        }
        out
    }

    fn chain_bound(&self) -> usize {
        (self.regions as usize + 1) * (self.loans + 1) * 4
    }
}

/// Round-robin chaotic iteration in a random node order per sweep until
/// nothing changes. Independent of the worklist solver.
pub fn chaotic<C: Cfg, A: Analysis, R: Rng>(cfg: &C, a: &A, rng: &mut R) -> FlowResult<A::State> {
    let n = cfg.num_nodes();
    let mut edges: Vec<(NodeId, NodeId)> = vec![];
    for u in 0..n {
        for v in cfg.successors(u) {
            edges.push(match a.direction() {
                Direction::Forward => (u, v),
                Direction::Backward => (v, u),
            });
        }
    }
    let is_boundary = |v: NodeId| match a.direction() {
        Direction::Forward => v == cfg.entry(),
        Direction::Backward => cfg.successors(v).is_empty(),
    };
    let mut inp = vec![a.bottom(); n];
    let mut out: Vec<A::State> = (0..n).map(|v| a.transfer(v, &a.bottom())).collect();
    let mut order: Vec<NodeId> = (0..n).collect();
    loop {
        let mut changed = false;
        order.shuffle(rng);
        for &v in &order {
            let mut i = if is_boundary(v) { a.boundary() } else { a.bottom() };
            for &(p, q) in &edges {
                if q == v {
                    i = i.join(&out[p]);
                }
            }
            let o = a.transfer(v, &i);
            if i != inp[v] || o != out[v] {
                changed = true;
                inp[v] = i;
                out[v] = o;
            }
        }
        if !changed {
            return FlowResult {
                state_in: inp,
                state_out: out,
            };
        }
    }
}

/// Exit status both memory checkers use to report a problem; no corpus
/// program returns a value congruent to it.
pub const CHECKER_EXIT: i32 = 223;

pub const STRICT_CFLAGS: [&str; 6] = ["-std=c99", "-Wall", "-Wextra", "-pedantic", "-Werror", "-O1"];

/// What running the emitted C should produce: stdout and exit status.
pub fn expected_c_result(run: &str) -> (String, i32) {
    match run.strip_prefix("trap ") {
        Some(_) => (String::new(), rustlight::cgen::TRAP_EXIT),
        None => {
            let code = match run {
                "true" => 1,
                "false" => 0,
                v => (v.parse::<i32>().expect("run value") as u32 & 255) as i32,
            };
            (format!("{}\n", run), code)
        }
    }
}

fn cc(src: &Path, out: &Path, extra: &[&str]) -> Result<(), String> {
    let o = Command::new("gcc")
        .args(STRICT_CFLAGS)
        .args(extra)
        .arg("-o")
        .arg(out)
        .arg(src)
        .output()
        .map_err(|e| e.to_string())?;
    if o.status.success() {
        Ok(())
    } else {
        Err(format!(
            "gcc {:?} failed:\n{}",
            extra,
            String::from_utf8_lossy(&o.stderr)
        ))
    }
}

fn run_binary(cmd: &mut Command) -> Result<(String, i32, String), String> {
    let o = cmd.output().map_err(|e| e.to_string())?;
    let code = o.status.code().ok_or("killed by a signal")?;
    Ok((
        String::from_utf8_lossy(&o.stdout).into_owned(),
        code,
        String::from_utf8_lossy(&o.stderr).into_owned(),
    ))
}

/// Emit C for an accepted corpus program, build it with strict warnings,
/// and check its output and exit status against the annotation. With
/// `memcheck`, also run it under valgrind and AddressSanitizer; leak
/// checks are skipped for trapping programs, which exit mid-run.
pub fn c_differential(p: &Program, dir: &Path, memcheck: bool) -> Result<(), String> {
    let run = p.run.as_deref().ok_or("no run annotation")?;
    let c = compile(&p.source);
    let m = c.runnable().ok_or("not runnable")?;
    let src = dir.join(format!("{}.c", p.name));
    std::fs::write(&src, driver::emit_c(m, &p.source)).map_err(|e| e.to_string())?;
    let (want_out, want_code) = expected_c_result(run);
    let traps = run.starts_with("trap ");

    let bin = dir.join(&p.name);
    cc(&src, &bin, &[])?;
    let (out, code, _) = run_binary(&mut Command::new(&bin))?;
    if (out.as_str(), code) != (want_out.as_str(), want_code) {
        return Err(format!(
            "C gave {:?}/exit {}, want {:?}/exit {}",
            out, code, want_out, want_code
        ));
    }
    if !memcheck {
        return Ok(());
    }

    let leak = if traps { "no" } else { "full" };
    let (_, code, err) = run_binary(
        Command::new("valgrind")
            .arg("-q")
            .arg(format!("--leak-check={}", leak))
            .arg("--errors-for-leak-kinds=all")
            .arg(format!("--error-exitcode={}", CHECKER_EXIT))
            .arg(&bin),
    )?;
    if code != want_code {
        return Err(format!("valgrind: exit {}\n{}", code, err));
    }

    let asan = dir.join(format!("{}-asan", p.name));
    cc(
        &src,
        &asan,
        &["-fsanitize=address,undefined", "-fno-omit-frame-pointer", "-g"],
    )?;
    let (_, code, err) = run_binary(Command::new(&asan).env(
        "ASAN_OPTIONS",
        format!("detect_leaks={}:exitcode={}", u8::from(!traps), CHECKER_EXIT),
    ))?;
    if code != want_code {
        return Err(format!("AddressSanitizer: exit {}\n{}", code, err));
    }
    Ok(())
}

/// `c_differential` over every runnable corpus program, in parallel.
/// Returns one message per failing program.
pub fn c_differential_corpus(memcheck: bool) -> Vec<String> {
    let dir = tempfile::tempdir().unwrap();
    let progs: Vec<Program> = corpus().into_iter().filter(|p| p.run.is_some()).collect();
    let workers = std::thread::available_parallelism().map_or(4, |n| n.get());
    let chunk = progs.len().div_ceil(workers).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = progs
            .chunks(chunk)
            .map(|ps| {
                let dir = dir.path();
                s.spawn(move || {
                    ps.iter()
                        .filter_map(|p| {
                            c_differential(p, dir, memcheck)
                                .err()
                                .map(|e| format!("{}: {}", p.name, e))
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    })
}

/// Run `check`, `build` and `dump` (all selectors, loans, JSON errors)
/// twice on `file`, requiring byte-identical stdout, stderr, status and
/// emitted C.
pub fn deterministic(file: &Path, scratch: &Path) -> Result<(), String> {
    let exe = env!("CARGO_BIN_EXE_rustlight");
    let mut dump: Vec<String> = vec![
        "dump".into(),
        "--emit-loans".into(),
        "--error-format".into(),
        "json".into(),
    ];
    for d in driver::DUMPS {
        dump.push("--dump".into());
        dump.push(d.into());
    }
    let once = |tag: &str| -> Result<Vec<u8>, String> {
        let c_out = scratch.join(format!("{}.c", tag));
        let mut all = vec![];
        let runs: [Vec<String>; 3] = [
            vec!["check".into()],
            vec!["build".into(), "-o".into(), c_out.display().to_string()],
            dump.clone(),
        ];
        for args in runs {
            let o = Command::new(exe)
                .args(&args)
                .arg(file)
                .output()
                .map_err(|e| e.to_string())?;
            all.extend(format!("{:?}", o.status.code()).bytes());
            all.extend(o.stdout);
            all.extend(o.stderr);
        }
        all.extend(std::fs::read(&c_out).unwrap_or_default());
        Ok(all)
    };
    let (a, b) = (once("a")?, once("b")?);
    if a.is_empty() || a != b {
        return Err(format!("{}: outputs differ between runs", file.display()));
    }
    Ok(())
}

fn module_fixpoints(m: &rustlight::ir::RirModule) -> Result<(), String> {
    use rustlight::borrowck::{self, BorrowAnalysis, BorrowOptions};
    use rustlight::dataflow::check_fixpoint;
    use rustlight::dropelab::{self, InitAnalysis};
    use rustlight::liveness::{local_liveness, Liveness};
    use rustlight::movecheck::{move_check, MoveAnalysis};

    let sigs = borrowck::module_sigs(m);
    for f in &m.functions {
        let ctx = |what: &str, e: String| format!("{}: {}: {}", f.name, what, e);
        let live = local_liveness(f).map_err(|e| ctx("liveness", e.to_string()))?;
        check_fixpoint(f, &Liveness { func: f }, &live).map_err(|e| ctx("liveness", e.to_string()))?;
        let mv = move_check(&m.adts, f).map_err(|e| ctx("move", e.to_string()))?;
        let ma = MoveAnalysis {
            adts: &m.adts,
            func: f,
            paths: &mv.paths,
        };
        check_fixpoint(f, &ma, &mv.flow).map_err(|e| ctx("move", e.to_string()))?;
        let init = dropelab::init_analysis(&m.adts, f).map_err(|e| ctx("init", e.to_string()))?;
        let ia = InitAnalysis {
            adts: &m.adts,
            func: f,
            paths: &init.paths,
        };
        check_fixpoint(f, &ia, &init.flow).map_err(|e| ctx("init", e.to_string()))?;
        let b = borrowck::borrow_check(&m.adts, &sigs, f, BorrowOptions::default())
            .map_err(|e| ctx("borrow", e.to_string()))?;
        let ba = BorrowAnalysis::new(&m.adts, f, &sigs, &b.loans, &b.live);
        check_fixpoint(f, &ba, &b.flow).map_err(|e| ctx("borrow", e.to_string()))?;
    }
    Ok(())
}

/// Liveness, move, initialization and borrow results are post-fixpoints
/// on the lowered and elaborated IR of every corpus program that lowers.
/// Returns how many programs were checked.
pub fn corpus_fixpoints() -> Result<usize, String> {
    let mut n = 0;
    for p in corpus() {
        let c = compile(&p.source);
        let Some(rir) = &c.rir else { continue };
        module_fixpoints(rir).map_err(|e| format!("{} (lowered): {}", p.name, e))?;
        if let Some(elab) = &c.elab {
            module_fixpoints(elab).map_err(|e| format!("{} (elaborated): {}", p.name, e))?;
        }
        n += 1;
    }
    Ok(n)
}
