//! Initialization analysis and drop elaboration.
//!
//! Every `Drop` becomes a `Nop` (nothing to drop), stays unconditional
//! (definitely initialized), becomes a `ConditionalDrop` guarded by a drop
//! flag (maybe initialized), or is split into per-field drops when parts of
//! a struct were moved out separately. New nodes are appended so existing
//! node ids stay put, which makes the pass idempotent.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;

use crate::dataflow::{solve, Analysis, Direction, FlowResult, NonTermination};
use crate::ir::*;
use crate::movecheck::{classify_move, MoveKind, MovePaths};
use crate::types::{AdtKind, AdtTable, Ty};

/// `(maybe_init, maybe_uninit)` over move paths.
pub type InitState = (FixedBitSet, FixedBitSet);

pub struct InitAnalysis<'a> {
    pub adts: &'a AdtTable,
    pub func: &'a RirFunction,
    pub paths: &'a MovePaths,
}

fn canonical(adts: &AdtTable, func: &RirFunction, p: &Place) -> Option<Place> {
    match classify_move(adts, func, p) {
        MoveKind::Plain(c) | MoveKind::Consume(c) => Some(c),
        _ => None,
    }
}

impl InitAnalysis<'_> {
    fn init(&self, s: &mut InitState, p: &Place) {
        for i in self.paths.extensions(p) {
            s.0.insert(i);
            s.1.set(i, false);
        }
    }

    fn deinit(&self, s: &mut InitState, p: &Place) {
        for i in self.paths.extensions(p) {
            s.0.set(i, false);
            s.1.insert(i);
        }
    }

    /// `(maybe_init, maybe_uninit)` of any place, via its nearest tracked
    /// ancestor.
    pub fn status(&self, s: &InitState, p: &Place) -> (bool, bool) {
        let i = self.paths.nearest_ancestor(p);
        (s.0.contains(i), s.1.contains(i))
    }
}

impl Analysis for InitAnalysis<'_> {
    type State = InitState;

    fn direction(&self) -> Direction {
        Direction::Forward
    }

    fn bottom(&self) -> InitState {
        let n = self.paths.len();
        (FixedBitSet::with_capacity(n), FixedBitSet::with_capacity(n))
    }

    fn boundary(&self) -> InitState {
        let mut s = self.bottom();
        for (i, p) in self.paths.paths.iter().enumerate() {
            if self.func.locals[p.local.index()].kind == LocalKind::Param {
                s.0.insert(i);
            } else {
                s.1.insert(i);
            }
        }
        s
    }

    fn transfer(&self, n: NodeId, state: &InitState) -> InitState {
        let mut s = state.clone();
        let instr = &self.func.nodes[n].instr;
        for o in instr.operands() {
            if let Operand::Move(p) = o {
                if let Some(c) = canonical(self.adts, self.func, p) {
                    self.deinit(&mut s, &c);
                }
            }
        }
        match instr {
            Instr::Assign { place, .. } | Instr::Call { dest: place, .. } => self.init(&mut s, place),
            Instr::Drop { place, .. } | Instr::ConditionalDrop { place, .. } => {
                if let Some(c) = canonical(self.adts, self.func, place) {
                    self.deinit(&mut s, &c);
                }
            }
            Instr::StorageDead { local, .. } => self.deinit(&mut s, &Place::local(*local)),
            _ => {}
        }
        s
    }

    fn chain_bound(&self) -> usize {
        2 * self.paths.len() + 1
    }
}

pub struct InitResult {
    pub paths: MovePaths,
    pub flow: FlowResult<InitState>,
}

pub fn init_analysis(adts: &AdtTable, func: &RirFunction) -> Result<InitResult, NonTermination> {
    let paths = MovePaths::build(adts, func);
    let flow = solve(
        func,
        &InitAnalysis {
            adts,
            func,
            paths: &paths,
        },
    )?;
    Ok(InitResult { paths, flow })
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum DropAction {
    Static(Place),
    Conditional(Place),
}

impl InitAnalysis<'_> {
    fn has_tracked_descendants(&self, p: &Place) -> bool {
        self.paths.extensions(p).any(|i| self.paths.paths[i] != *p)
    }

    /// Resolve a drop of `p` into concrete actions, in field declaration
    /// order for partially moved structs.
    fn classify(&self, s: &InitState, p: &Place, out: &mut Vec<DropAction>) {
        let ty = self.func.place_ty(self.adts, p);
        if !self.adts.needs_drop(&ty) {
            return;
        }
        if self.has_tracked_descendants(p) {
            if let Ty::Adt(id) = ty {
                if let AdtKind::Struct { fields, .. } = &self.adts.get(id).kind {
                    for i in 0..fields.len() {
                        self.classify(s, &p.field(i as u32), out);
                    }
                    return;
                }
            }
            // Enum payloads moved out separately only occur in match temps,
            // which lowering drops field by field; fall through to the
            // whole-value status.
        }
        match self.status(s, p) {
            (false, _) => {}
            (true, false) => out.push(DropAction::Static(p.clone())),
            (true, true) => out.push(DropAction::Conditional(p.clone())),
        }
    }
}

/// Rewrite all drops of `func` according to its initialization analysis.
pub fn elaborate(adts: &AdtTable, func: &RirFunction) -> Result<RirFunction, NonTermination> {
    let init = init_analysis(adts, func)?;
    let a = InitAnalysis {
        adts,
        func,
        paths: &init.paths,
    };
    let mut out = func.clone();
    let mut flags: BTreeMap<Place, Local> = BTreeMap::new();

    for n in 0..func.nodes.len() {
        let Instr::Drop { place, next } = &func.nodes[n].instr else {
            continue;
        };
        let span = func.nodes[n].span;
        let mut actions = vec![];
        a.classify(&init.flow.state_in[n], place, &mut actions);
        if actions == [DropAction::Static(place.clone())] {
            continue;
        }
        let mut instrs: Vec<Instr> = actions
            .into_iter()
            .map(|act| match act {
                DropAction::Static(p) => Instr::Drop { place: p, next: 0 },
                DropAction::Conditional(p) => {
                    let flag = *flags.entry(p.clone()).or_insert_with(|| {
                        out.add_local(LocalDecl {
                            ty: Ty::Bool,
                            kind: LocalKind::Flag,
                            name: None,
                            span,
                        })
                    });
                    Instr::ConditionalDrop {
                        place: p,
                        flag,
                        next: 0,
                    }
                }
            })
            .collect();
        if instrs.is_empty() {
            instrs.push(Instr::Nop { next: 0 });
        }
        // first instruction replaces the drop, the rest are appended
        let ids: Vec<NodeId> = (0..instrs.len())
            .map(|i| {
                if i == 0 {
                    n
                } else {
                    out.add_node(Instr::Nop { next: 0 }, span)
                }
            })
            .collect();
        for (i, mut instr) in instrs.into_iter().enumerate() {
            let succ = if i + 1 < ids.len() { ids[i + 1] } else { *next };
            for t in instr.successors_mut() {
                *t = succ;
            }
            out.nodes[ids[i]].instr = instr;
        }
    }

    if flags.is_empty() {
        return Ok(out);
    }

    // flag maintenance after every init and deinit site of a flagged path
    let sites = out.nodes.len();
    for m in 0..sites {
        let span = out.nodes[m].span;
        for (path, &flag) in &flags {
            let Some(value) = site_effect(adts, &out, &out.nodes[m].instr, path) else {
                continue;
            };
            let next = out.nodes[m].instr.successors()[0];
            let f = out.add_node(
                Instr::Assign {
                    place: Place::local(flag),
                    rvalue: Rvalue::Use(Operand::Const(Constant::Bool(value))),
                    next,
                },
                span,
            );
            *out.nodes[m].instr.successors_mut()[0] = f;
        }
    }

    // zero the flags before anything else runs: the old entry moves to a
    // fresh node and bb0 becomes the first flag initializer
    let moved_entry = out.add_node(out.nodes[0].instr.clone(), out.nodes[0].span);
    for node in out.nodes.iter_mut() {
        for t in node.instr.successors_mut() {
            if *t == 0 {
                *t = moved_entry;
            }
        }
    }
    let span = out.nodes[0].span;
    let flag_locals: Vec<Local> = flags.values().copied().collect();
    let mut next = moved_entry;
    for (i, &flag) in flag_locals.iter().enumerate().rev() {
        let instr = Instr::Assign {
            place: Place::local(flag),
            rvalue: Rvalue::Use(Operand::Const(Constant::Bool(false))),
            next,
        };
        if i == 0 {
            out.nodes[0] = Node { instr, span };
        } else {
            next = out.add_node(instr, span);
        }
    }
    Ok(out)
}

/// Whether `instr` leaves `path` initialized (`Some(true)`) or not
/// (`Some(false)`), or does not touch it.
fn site_effect(adts: &AdtTable, func: &RirFunction, instr: &Instr, path: &Place) -> Option<bool> {
    let covers = |q: &Place| q.is_prefix_of(path);
    let mut effect = None;
    for o in instr.operands() {
        if let Operand::Move(p) = o {
            if canonical(adts, func, p).is_some_and(|c| covers(&c)) {
                effect = Some(false);
            }
        }
    }
    match instr {
        Instr::Assign { place, .. } | Instr::Call { dest: place, .. } => {
            if let Instr::Assign {
                place: Place { local, proj },
                ..
            } = instr
            {
                // our own flag updates
                if proj.is_empty() && func.locals[local.index()].kind == LocalKind::Flag {
                    return None;
                }
            }
            if covers(place) {
                effect = Some(true);
            }
        }
        Instr::Drop { place, .. } | Instr::ConditionalDrop { place, .. } => {
            if canonical(adts, func, place).is_some_and(|c| covers(&c)) {
                effect = Some(false);
            }
        }
        Instr::StorageDead { local, .. } if *local == path.local => effect = Some(false),
        _ => {}
    }
    effect
}

pub fn elaborate_module(m: &RirModule) -> Result<RirModule, NonTermination> {
    let functions = m
        .functions
        .iter()
        .map(|f| elaborate(&m.adts, f))
        .collect::<Result<_, _>>()?;
    Ok(RirModule {
        adts: m.adts.clone(),
        functions,
    })
}

pub fn dump(adts: &AdtTable, func: &RirFunction, r: &InitResult) -> String {
    use crate::movecheck::fmt_paths;
    let mut out = String::new();
    for n in 0..func.nodes.len() {
        let (i, o) = (&r.flow.state_in[n], &r.flow.state_out[n]);
        out.push_str(&format!(
            "bb{}: in init {} uninit {} | out init {} uninit {}\n",
            n,
            fmt_paths(&r.paths, adts, func, &i.0),
            fmt_paths(&r.paths, adts, func, &i.1),
            fmt_paths(&r.paths, adts, func, &o.0),
            fmt_paths(&r.paths, adts, func, &o.1),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lower::lower;
    use crate::syntax::{parse, typecheck};

    fn module(src: &str) -> RirModule {
        lower(&typecheck(parse(src).unwrap()).unwrap())
    }

    fn count(f: &RirFunction, pred: impl Fn(&Instr) -> bool) -> usize {
        f.nodes.iter().filter(|n| pred(&n.instr)).count()
    }

    #[test]
    fn box_local_keeps_unconditional_drop() {
        let m = module("fn f() { let b = Box::new(1); }");
        let e = elaborate(&m.adts, &m.functions[0]).unwrap();
        assert_eq!(
            count(
                &e,
                |i| matches!(i, Instr::Drop { place, .. } if place.local == Local(1))
            ),
            1
        );
        assert_eq!(count(&e, |i| matches!(i, Instr::ConditionalDrop { .. })), 0);
    }

    #[test]
    fn i32_drop_becomes_nop() {
        let m = module("fn f() { let x = 5; }");
        let e = elaborate(&m.adts, &m.functions[0]).unwrap();
        assert_eq!(count(&e, |i| matches!(i, Instr::Drop { .. })), 0);
    }

    #[test]
    fn conditional_move_gets_one_flag() {
        let m = module("fn f(c: bool) { let a = Box::new(1); if c { let b = a; } }");
        let e = elaborate(&m.adts, &m.functions[0]).unwrap();
        e.validate().unwrap();
        assert_eq!(count(&e, |i| matches!(i, Instr::ConditionalDrop { .. })), 1);
        assert_eq!(e.locals.iter().filter(|l| l.kind == LocalKind::Flag).count(), 1);
        let again = elaborate(&m.adts, &e).unwrap();
        assert_eq!(again, e);
    }

    #[test]
    fn partial_move_splits_struct_drop() {
        let m = module("struct P { a: Box<i32>, b: Box<i32> } fn f(p: P) { let x = p.a; }");
        let e = elaborate(&m.adts, &m.functions[0]).unwrap();
        // p.b still needs dropping, p.a was moved
        let drops: Vec<Place> = e
            .nodes
            .iter()
            .filter_map(|n| match &n.instr {
                Instr::Drop { place, .. } => Some(place.clone()),
                _ => None,
            })
            .collect();
        assert!(drops.contains(&Place::local(Local(1)).field(1)));
        assert!(!drops.contains(&Place::local(Local(1))));
        assert_eq!(elaborate(&m.adts, &e).unwrap(), e);
    }
}
