//! Move paths and the move checker.
//!
//! The checker tracks, per move path, whether it may have been moved out
//! and whether it may never have been assigned, and rejects reads, borrows
//! and partial writes that touch such a path.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use crate::dataflow::{solve, Analysis, Direction, FlowResult, NonTermination};
use crate::diag::{Diagnostic, ErrorCode};
use crate::ir::*;
use crate::types::{AdtTable, Ty};

/// How a moved place maps onto the move-path universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MoveKind {
    /// The path itself (no dereference involved).
    Plain(Place),
    /// Moving out through a chain of `Box` derefs consumes the outermost
    /// box; the path is the place before the first deref.
    Consume(Place),
    /// Through a dereference of a reference.
    OutOfReference,
    /// Out of a field behind a `Box`, which would leave the box partially
    /// moved.
    OutOfBoxInterior,
}

pub fn classify_move(adts: &AdtTable, func: &RirFunction, p: &Place) -> MoveKind {
    let Some(first) = p.proj.iter().position(|e| *e == ProjElem::Deref) else {
        return MoveKind::Plain(p.clone());
    };
    let mut ty = PlaceTy::Ty(func.local_ty(p.local).clone());
    for (i, e) in p.proj.iter().enumerate() {
        if *e == ProjElem::Deref {
            if let PlaceTy::Ty(Ty::Ref(..)) = ty {
                return MoveKind::OutOfReference;
            }
        } else if i > first {
            return MoveKind::OutOfBoxInterior;
        }
        ty = step(adts, ty, e);
    }
    MoveKind::Consume(p.truncated(first))
}

fn step(adts: &AdtTable, ty: PlaceTy, e: &ProjElem) -> PlaceTy {
    match ty {
        PlaceTy::Ty(t) => place_ty_of(adts, &t, &[*e]),
        PlaceTy::Variant(id, v) => match e {
            ProjElem::Field(k) => PlaceTy::Ty(lift(adts.field_ty(id, Some(v), *k))),
            _ => unreachable!("only fields follow a downcast"),
        },
    }
}

/// Dense universe of move paths for one function.
#[derive(Debug, Clone)]
pub struct MovePaths {
    pub paths: Vec<Place>,
    index: HashMap<Place, usize>,
}

impl MovePaths {
    /// All locals, plus every moved or dropped place (canonicalized) and
    /// all their prefixes.
    pub fn build(adts: &AdtTable, func: &RirFunction) -> MovePaths {
        let mut mp = MovePaths {
            paths: vec![],
            index: HashMap::new(),
        };
        for l in 0..func.locals.len() {
            mp.insert(Place::local(Local(l as u32)));
        }
        for node in &func.nodes {
            let mut places: Vec<&Place> = node
                .instr
                .operands()
                .into_iter()
                .filter_map(|o| match o {
                    Operand::Move(p) => Some(p),
                    _ => None,
                })
                .collect();
            if let Instr::Drop { place, .. } | Instr::ConditionalDrop { place, .. } = &node.instr {
                places.push(place);
            }
            for p in places {
                if let MoveKind::Plain(c) | MoveKind::Consume(c) = classify_move(adts, func, p) {
                    for pre in c.prefixes() {
                        mp.insert(pre);
                    }
                }
            }
        }
        mp
    }

    fn insert(&mut self, p: Place) {
        if !self.index.contains_key(&p) {
            self.index.insert(p.clone(), self.paths.len());
            self.paths.push(p);
        }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn find(&self, p: &Place) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Paths that `p` is a prefix of (`p` itself included).
    pub fn extensions<'a>(&'a self, p: &'a Place) -> impl Iterator<Item = usize> + 'a {
        self.paths
            .iter()
            .enumerate()
            .filter(move |(_, q)| p.is_prefix_of(q))
            .map(|(i, _)| i)
    }

    /// Paths that conflict with an access to `p`: its prefixes and its
    /// extensions.
    pub fn related<'a>(&'a self, p: &'a Place) -> impl Iterator<Item = usize> + 'a {
        self.paths
            .iter()
            .enumerate()
            .filter(move |(_, q)| q.is_prefix_of(p) || p.is_prefix_of(q))
            .map(|(i, _)| i)
    }

    /// Nearest tracked path that is a prefix of `p`.
    pub fn nearest_ancestor(&self, p: &Place) -> usize {
        (0..=p.proj.len())
            .rev()
            .find_map(|n| self.find(&p.truncated(n)))
            .expect("locals are always tracked")
    }
}

/// `(maybe_moved, maybe_unassigned)` over move paths.
pub type MoveState = (FixedBitSet, FixedBitSet);

pub struct MoveAnalysis<'a> {
    pub adts: &'a AdtTable,
    pub func: &'a RirFunction,
    pub paths: &'a MovePaths,
}

impl MoveAnalysis<'_> {
    fn moved_path(&self, p: &Place) -> Option<Place> {
        match classify_move(self.adts, self.func, p) {
            MoveKind::Plain(c) | MoveKind::Consume(c) => Some(c),
            _ => None,
        }
    }

    fn set_moved(&self, s: &mut MoveState, p: &Place) {
        if let Some(c) = self.moved_path(p) {
            s.0.insert(self.paths.find(&c).expect("moved paths are tracked"));
        }
    }

    fn assign(&self, s: &mut MoveState, p: &Place) {
        for i in self.paths.extensions(p) {
            s.0.set(i, false);
            s.1.set(i, false);
        }
    }
}

impl Analysis for MoveAnalysis<'_> {
    type State = MoveState;

    fn direction(&self) -> Direction {
        Direction::Forward
    }

    fn bottom(&self) -> MoveState {
        let n = self.paths.len();
        (FixedBitSet::with_capacity(n), FixedBitSet::with_capacity(n))
    }

    fn boundary(&self) -> MoveState {
        let mut s = self.bottom();
        for (l, d) in self.func.locals.iter().enumerate() {
            if d.kind != LocalKind::Param {
                s.1.insert(self.paths.find(&Place::local(Local(l as u32))).unwrap());
            }
        }
        s
    }

    fn transfer(&self, n: NodeId, state: &MoveState) -> MoveState {
        let mut s = state.clone();
        let instr = &self.func.nodes[n].instr;
        for o in instr.operands() {
            if let Operand::Move(p) = o {
                self.set_moved(&mut s, p);
            }
        }
        match instr {
            Instr::Assign { place, .. } | Instr::Call { dest: place, .. } => self.assign(&mut s, place),
            Instr::Drop { place, .. } | Instr::ConditionalDrop { place, .. } => self.set_moved(&mut s, place),
            Instr::StorageDead { local, .. } => {
                s.1.insert(self.paths.find(&Place::local(*local)).unwrap());
            }
            _ => {}
        }
        s
    }

    fn chain_bound(&self) -> usize {
        2 * self.paths.len() + 1
    }
}

pub struct MoveCheckResult {
    pub paths: MovePaths,
    pub flow: FlowResult<MoveState>,
    pub diagnostics: Vec<Diagnostic>,
}

pub fn move_check(adts: &AdtTable, func: &RirFunction) -> Result<MoveCheckResult, NonTermination> {
    let paths = MovePaths::build(adts, func);
    let a = MoveAnalysis {
        adts,
        func,
        paths: &paths,
    };
    let flow = solve(func, &a)?;
    let mut diagnostics = vec![];
    for (n, node) in func.nodes.iter().enumerate() {
        let s = &flow.state_in[n];
        let mut c = Checker {
            a: &a,
            s,
            n,
            out: &mut diagnostics,
        };
        for o in node.instr.operands() {
            match o {
                Operand::Copy(p) => c.read(p),
                Operand::Move(p) => c.moved(p),
                Operand::Const(_) => {}
            }
        }
        match &node.instr {
            Instr::Assign { place, rvalue, .. } => {
                if let Rvalue::Ref(_, _, q) = rvalue {
                    c.borrow(q);
                }
                c.write(place);
            }
            Instr::Call { dest, .. } => c.write(dest),
            Instr::Switch { place, .. } => c.read(place),
            _ => {}
        }
    }
    Ok(MoveCheckResult {
        paths,
        flow,
        diagnostics,
    })
}

struct Checker<'a, 'b> {
    a: &'a MoveAnalysis<'a>,
    s: &'a MoveState,
    n: NodeId,
    out: &'b mut Vec<Diagnostic>,
}

impl Checker<'_, '_> {
    fn report(&mut self, code: ErrorCode, place: &Place, msg: String) {
        let f = self.a.func;
        let d = Diagnostic::new(code, f.nodes[self.n].span, msg)
            .in_function(&f.name)
            .at_node(self.n)
            .with_place(describe_place(self.a.adts, f, place));
        self.out.push(d);
    }

    /// The first tracked path related to `p` that is set, preferring moved
    /// over unassigned.
    fn conflict(&self, p: &Place, strict_prefix_only: bool) -> Option<bool> {
        let paths = self.a.paths;
        let hits = |bits: &FixedBitSet| {
            paths.related(p).any(|i| {
                bits.contains(i) && (!strict_prefix_only || (paths.paths[i].is_prefix_of(p) && paths.paths[i] != *p))
            })
        };
        if hits(&self.s.0) {
            Some(true)
        } else if hits(&self.s.1) {
            Some(false)
        } else {
            None
        }
    }

    fn name(&self, p: &Place) -> String {
        describe_place(self.a.adts, self.a.func, p)
    }

    fn read(&mut self, p: &Place) {
        match self.conflict(p, false) {
            Some(true) => {
                let msg = format!("use of moved value: `{}`", self.name(p));
                self.report(ErrorCode::UseAfterMove, p, msg)
            }
            Some(false) => {
                let msg = format!("use of possibly-uninitialized `{}`", self.name(p));
                self.report(ErrorCode::UseOfUninitialized, p, msg)
            }
            None => {}
        }
    }

    fn moved(&mut self, p: &Place) {
        match classify_move(self.a.adts, self.a.func, p) {
            MoveKind::Plain(c) | MoveKind::Consume(c) => self.read(&c),
            MoveKind::OutOfReference => {
                let msg = format!("cannot move out of `{}`, which is behind a reference", self.name(p));
                self.report(ErrorCode::CannotMoveOutOfReference, p, msg)
            }
            MoveKind::OutOfBoxInterior => {
                let msg = format!("cannot move out of `{}`, a field inside a box", self.name(p));
                self.report(ErrorCode::CannotMoveOutOfBoxInterior, p, msg)
            }
        }
    }

    fn borrow(&mut self, p: &Place) {
        match self.conflict(p, false) {
            Some(true) => {
                let msg = format!("borrow of moved value: `{}`", self.name(p));
                self.report(ErrorCode::BorrowAfterMove, p, msg)
            }
            Some(false) => {
                let msg = format!("borrow of possibly-uninitialized `{}`", self.name(p));
                self.report(ErrorCode::UseOfUninitialized, p, msg)
            }
            None => {}
        }
    }

    /// Writing a place needs every strict prefix to be initialized.
    fn write(&mut self, p: &Place) {
        match self.conflict(p, true) {
            Some(true) => {
                let msg = format!("assignment to part of moved value: `{}`", self.name(p));
                self.report(ErrorCode::UseAfterMove, p, msg)
            }
            Some(false) => {
                let msg = format!("assignment to part of possibly-uninitialized `{}`", self.name(p));
                self.report(ErrorCode::UseOfUninitialized, p, msg)
            }
            None => {}
        }
    }
}

pub fn fmt_paths(paths: &MovePaths, adts: &AdtTable, func: &RirFunction, s: &FixedBitSet) -> String {
    let items: Vec<String> = s
        .ones()
        .map(|i| {
            PlaceDisplay {
                adts,
                func,
                place: &paths.paths[i],
            }
            .to_string()
        })
        .collect();
    format!("{{{}}}", items.join(", "))
}

pub fn dump(adts: &AdtTable, func: &RirFunction, r: &MoveCheckResult) -> String {
    let mut out = String::new();
    for n in 0..func.nodes.len() {
        let (i, o) = (&r.flow.state_in[n], &r.flow.state_out[n]);
        out.push_str(&format!(
            "bb{}: in moved {} unassigned {} | out moved {} unassigned {}\n",
            n,
            fmt_paths(&r.paths, adts, func, &i.0),
            fmt_paths(&r.paths, adts, func, &i.1),
            fmt_paths(&r.paths, adts, func, &o.0),
            fmt_paths(&r.paths, adts, func, &o.1),
        ));
    }
    out
}
