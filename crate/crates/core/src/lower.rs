//! Lowering from the typed AST to RustIR.
//!
//! Expressions are flattened into three-address form with temporaries.
//! Every local whose type mentions a reference gets fresh existential
//! regions, every `&`/`&mut` rvalue gets its own region, and every call
//! site instantiates the callee's universals with fresh regions. Scope
//! exits emit `Drop` + `StorageDead` in reverse declaration order, on
//! fallthrough and on every early return.

use std::collections::HashMap;

use crate::diag::Span;
use crate::ir::*;
use crate::syntax::ast::*;
use crate::syntax::typeck::{BindingId, CallTarget, FnId, Resolution, TypedModule};
use crate::types::{AdtTable, Mutability, SynTy, Ty};

pub fn lower(tm: &TypedModule) -> RirModule {
    let sigs: Vec<FnRegionSig> = tm.fn_decls().iter().map(|f| region_sig(&tm.adts, f)).collect();
    let functions = tm
        .fn_decls()
        .into_iter()
        .enumerate()
        .map(|(i, f)| Lowerer::new(tm, &sigs, FnId(i as u32)).run(f))
        .collect();
    RirModule {
        adts: tm.adts.clone(),
        functions,
    }
}

/// Universal regions of a signature: declared lifetimes in order, then one
/// per elided parameter reference. An elided return reference takes the
/// only input region when there is exactly one, else a fresh universal.
pub fn region_sig(adts: &AdtTable, f: &FnDecl) -> FnRegionSig {
    let mut names: Vec<Option<String>> = f.lifetimes.iter().map(|l| Some(l.name.name.clone())).collect();
    let named = |names: &Vec<Option<String>>, n: &str| -> Region {
        Region(
            names
                .iter()
                .position(|x| x.as_deref() == Some(n))
                .expect("declared lifetime") as u32,
        )
    };
    let conv = |t: &RlType, names: &mut Vec<Option<String>>, elided: Option<Region>| -> RTy {
        fn go(
            t: &RlType,
            adts: &AdtTable,
            names: &mut Vec<Option<String>>,
            elided: Option<Region>,
            named: &dyn Fn(&Vec<Option<String>>, &str) -> Region,
        ) -> RTy {
            match t {
                RlType::Unit => Ty::Unit,
                RlType::Bool => Ty::Bool,
                RlType::I32 => Ty::I32,
                RlType::Adt(n) => Ty::Adt(adts.lookup(n).expect("known type")),
                RlType::Box(inner) => Ty::Box(Box::new(go(inner, adts, names, elided, named))),
                RlType::Ref(annot, m, inner) => {
                    let r = match annot {
                        RegionAnnot::Named(n) => named(names, n),
                        RegionAnnot::Elided => match elided {
                            Some(r) => r,
                            None => {
                                names.push(None);
                                Region(names.len() as u32 - 1)
                            }
                        },
                    };
                    Ty::Ref(r, *m, Box::new(go(inner, adts, names, elided, named)))
                }
            }
        }
        go(t, adts, names, elided, &named)
    };
    let params: Vec<RTy> = f.params.iter().map(|p| conv(&p.ty, &mut names, None)).collect();
    let input_regions: Vec<Region> = params.iter().flat_map(|t| t.regions()).collect();
    let ret = match &f.ret {
        Some(t) => {
            let elided = (input_regions.len() == 1).then(|| input_regions[0]);
            conv(t, &mut names, elided)
        }
        None => Ty::Unit,
    };
    let mut outlives = vec![];
    for l in &f.lifetimes {
        let a = named(&names, &l.name.name);
        for b in &l.outlives {
            outlives.push((a, named(&names, &b.name)));
        }
    }
    FnRegionSig {
        universals: names.len() as u32,
        universal_names: names,
        params,
        ret,
        outlives,
    }
}

enum Slot {
    Empty,
    Filled(Instr, Span),
    Alias(usize),
}

/// Nodes under construction. `cur` is always an empty slot that receives the
/// next instruction; jumping to a target aliases the slot instead of
/// emitting a `Goto`.
struct Builder {
    slots: Vec<Slot>,
    cur: usize,
    ret: Option<usize>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            slots: vec![Slot::Empty],
            cur: 0,
            ret: None,
        }
    }

    fn slot(&mut self) -> usize {
        self.slots.push(Slot::Empty);
        self.slots.len() - 1
    }

    fn emit(&mut self, span: Span, f: impl FnOnce(NodeId) -> Instr) {
        let next = self.slot();
        self.slots[self.cur] = Slot::Filled(f(next), span);
        self.cur = next;
    }

    /// Fill `cur` with a terminator; what follows is unreachable until
    /// `cur` is moved.
    fn terminate(&mut self, span: Span, instr: Instr) {
        self.slots[self.cur] = Slot::Filled(instr, span);
        self.cur = self.slot();
    }

    fn goto(&mut self, target: usize) {
        debug_assert!(matches!(self.slots[self.cur], Slot::Empty));
        if target != self.cur {
            self.slots[self.cur] = Slot::Alias(target);
        }
        self.cur = self.slot();
    }

    fn goto_return(&mut self, span: Span) {
        match self.ret {
            Some(r) => self.goto(r),
            None => {
                self.ret = Some(self.cur);
                self.terminate(span, Instr::Return);
            }
        }
    }

    fn resolve(&self, mut s: usize) -> usize {
        let mut steps = 0;
        while let Slot::Alias(t) = self.slots[s] {
            s = t;
            steps += 1;
            assert!(steps <= self.slots.len(), "alias cycle in lowering");
        }
        s
    }

    /// Prune unreachable slots and renumber in creation order, entry first.
    fn finish(self) -> Vec<Node> {
        let entry = self.resolve(0);
        let mut reach = vec![false; self.slots.len()];
        let mut stack = vec![entry];
        while let Some(s) = stack.pop() {
            if reach[s] {
                continue;
            }
            reach[s] = true;
            match &self.slots[s] {
                Slot::Filled(i, _) => stack.extend(i.successors().into_iter().map(|t| self.resolve(t))),
                Slot::Empty => panic!("reachable empty node in lowering"),
                Slot::Alias(_) => unreachable!(),
            }
        }
        let mut order = vec![entry];
        order.extend((0..self.slots.len()).filter(|&s| reach[s] && s != entry));
        let mut new_id = vec![usize::MAX; self.slots.len()];
        for (i, &s) in order.iter().enumerate() {
            new_id[s] = i;
        }
        order
            .iter()
            .map(|&s| match &self.slots[s] {
                Slot::Filled(i, span) => {
                    let mut instr = i.clone();
                    for t in instr.successors_mut() {
                        *t = new_id[self.resolve(*t)];
                    }
                    Node { instr, span: *span }
                }
                _ => unreachable!(),
            })
            .collect()
    }
}

/// What to release when a scope entry goes out of scope.
#[derive(Clone)]
enum ScopeEntry {
    /// `Drop(local)` then `StorageDead(local)`.
    Owned(Local),
    /// A temp whose value never needs dropping: only `StorageDead`.
    Storage(Local),
    /// A match temp that was partially moved from: drop the listed payload
    /// fields of `variant`, then `StorageDead`.
    Fields(Local, u32, Vec<u32>),
}

struct Lowerer<'a> {
    tm: &'a TypedModule,
    adts: &'a AdtTable,
    sigs: &'a [FnRegionSig],
    fn_id: FnId,
    b: Builder,
    locals: Vec<LocalDecl>,
    scopes: Vec<Vec<ScopeEntry>>,
    binding_local: HashMap<BindingId, Local>,
    next_region: u32,
}

impl<'a> Lowerer<'a> {
    fn new(tm: &'a TypedModule, sigs: &'a [FnRegionSig], fn_id: FnId) -> Self {
        Lowerer {
            tm,
            adts: &tm.adts,
            sigs,
            fn_id,
            b: Builder::new(),
            locals: vec![],
            scopes: vec![],
            binding_local: HashMap::new(),
            next_region: sigs[fn_id.0 as usize].universals,
        }
    }

    fn sig(&self) -> &'a FnRegionSig {
        &self.sigs[self.fn_id.0 as usize]
    }

    fn run(mut self, f: &FnDecl) -> RirFunction {
        let sig = self.sig();
        self.locals.push(LocalDecl {
            ty: sig.ret.clone(),
            kind: LocalKind::Return,
            name: None,
            span: f.name.span,
        });
        for (p, ty) in f.params.iter().zip(&sig.params) {
            let l = self.push_local(ty.clone(), LocalKind::Param, Some(p.name.name.clone()), p.name.span);
            self.binding_local.insert(self.tm.binding_at[&p.name.span], l);
        }
        let has_ret = f.ret.is_some() && sig.ret != Ty::Unit;
        self.block(&f.body, has_ret);
        // fallthrough end of a unit function
        let span = f.body.span;
        self.drop_params(span);
        self.b.goto_return(span);
        RirFunction {
            name: f.name.name.clone(),
            span: f.name.span,
            sig: sig.clone(),
            param_count: f.params.len(),
            nodes: self.b.finish(),
            locals: self.locals,
            num_regions: self.next_region,
        }
    }

    // ---- locals, regions, scopes ----

    fn fresh_region(&mut self) -> Region {
        let r = Region(self.next_region);
        self.next_region += 1;
        r
    }

    fn with_fresh(&mut self, t: &SynTy) -> RTy {
        t.with_regions(&mut || {
            let r = Region(self.next_region);
            self.next_region += 1;
            r
        })
    }

    fn push_local(&mut self, ty: RTy, kind: LocalKind, name: Option<String>, span: Span) -> Local {
        self.locals.push(LocalDecl { ty, kind, name, span });
        Local(self.locals.len() as u32 - 1)
    }

    /// A temp registered in the innermost scope.
    fn temp(&mut self, ty: &SynTy, span: Span) -> Local {
        let rty = self.with_fresh(ty);
        let l = self.push_local(rty, LocalKind::Temp, None, span);
        let entry = if self.adts.needs_drop(ty) {
            ScopeEntry::Owned(l)
        } else {
            ScopeEntry::Storage(l)
        };
        self.scopes.last_mut().expect("scope").push(entry);
        l
    }

    fn push_scope(&mut self) {
        self.scopes.push(vec![]);
    }

    fn release(&mut self, entry: &ScopeEntry, span: Span) {
        match entry {
            ScopeEntry::Owned(l) => {
                let p = Place::local(*l);
                self.b.emit(span, |next| Instr::Drop { place: p, next });
                self.b.emit(span, |next| Instr::StorageDead { local: *l, next });
            }
            ScopeEntry::Storage(l) => {
                self.b.emit(span, |next| Instr::StorageDead { local: *l, next });
            }
            ScopeEntry::Fields(l, v, fields) => {
                for &j in fields {
                    let p = Place::local(*l).project(ProjElem::Downcast(*v)).field(j);
                    self.b.emit(span, |next| Instr::Drop { place: p, next });
                }
                self.b.emit(span, |next| Instr::StorageDead { local: *l, next });
            }
        }
    }

    fn pop_scope(&mut self, span: Span) {
        let entries = self.scopes.pop().expect("scope");
        for e in entries.iter().rev() {
            self.release(e, span);
        }
    }

    fn drop_params(&mut self, span: Span) {
        for i in (1..=self.sig().params.len()).rev() {
            self.release(&ScopeEntry::Owned(Local(i as u32)), span);
        }
    }

    /// Release every open scope (innermost first) and the parameters, then
    /// jump to the return node.
    fn unwind_and_return(&mut self, span: Span) {
        let all: Vec<Vec<ScopeEntry>> = self.scopes.clone();
        for scope in all.iter().rev() {
            for e in scope.iter().rev() {
                self.release(e, span);
            }
        }
        self.drop_params(span);
        self.b.goto_return(span);
    }

    // ---- statements ----

    fn block(&mut self, blk: &Block, fn_body: bool) {
        self.push_scope();
        for s in &blk.stmts {
            self.stmt(s);
        }
        if let Some(tail) = &blk.tail {
            self.push_scope();
            if fn_body {
                self.assign_expr(Place::local(Local::RETURN), tail, false);
            } else {
                self.discard(tail);
            }
            self.pop_scope(tail.span);
            if fn_body {
                // release block locals, then params, then return
                self.unwind_and_return(tail.span);
                self.scopes.pop();
                return;
            }
        }
        self.pop_scope(blk.span);
    }

    fn stmt(&mut self, s: &RlStmt) {
        let span = s.span;
        match &s.kind {
            StmtKind::Let { name, ty, init, .. } => {
                let bid = self.tm.binding_at[&name.span];
                let info = &self.tm.bindings[bid.0 as usize];
                let rty = self.with_fresh(&info.ty.clone());
                let x = self.push_local(rty, LocalKind::User, Some(name.name.clone()), name.span);
                self.binding_local.insert(bid, x);
                if let Some(e) = init {
                    self.push_scope();
                    self.assign_expr(Place::local(x), e, ty.is_some());
                    // temps that are borrowed by the initializer live as
                    // long as the binding
                    let stmt_temps = self.scopes.pop().expect("scope");
                    let (keep, drop): (Vec<ScopeEntry>, Vec<ScopeEntry>) =
                        stmt_temps.into_iter().partition(|e| self.borrowed_temp(e));
                    self.scopes.push(drop);
                    self.pop_scope(span);
                    self.scopes.last_mut().expect("scope").extend(keep);
                }
                let entry = ScopeEntry::Owned(x);
                self.scopes.last_mut().expect("scope").push(entry);
            }
            StmtKind::Assign { place, value } => {
                self.push_scope();
                let dest_ty = self.tm.ty(place).clone();
                let needs_drop = self.adts.needs_drop(&dest_ty);
                if needs_drop {
                    // evaluate, drop the old value, then write
                    let t = self.temp(&dest_ty, value.span);
                    self.assign_expr(Place::local(t), value, true);
                    let p = self.place(place);
                    let pd = p.clone();
                    self.b.emit(span, |next| Instr::Drop { place: pd, next });
                    let rv = Rvalue::Use(Operand::Move(Place::local(t)));
                    self.b.emit(span, |next| Instr::Assign {
                        place: p,
                        rvalue: rv,
                        next,
                    });
                } else {
                    let rv = self.rvalue_reborrow(value, true);
                    let p = self.place(place);
                    self.b.emit(span, |next| Instr::Assign {
                        place: p,
                        rvalue: rv,
                        next,
                    });
                }
                self.pop_scope(span);
            }
            StmtKind::Expr(e) => {
                self.push_scope();
                self.discard(e);
                self.pop_scope(span);
            }
            StmtKind::If {
                cond,
                then_block,
                else_branch,
            } => {
                self.push_scope();
                let c = self.condition(cond);
                let (t, e) = (self.b.slot(), self.b.slot());
                self.b.terminate(
                    span,
                    Instr::If {
                        cond: c,
                        then_: t,
                        else_: e,
                    },
                );
                let join = self.b.slot();
                self.b.cur = t;
                self.block(then_block, false);
                self.b.goto(join);
                self.b.cur = e;
                match else_branch {
                    Some(ElseBranch::Block(b)) => self.block(b, false),
                    Some(ElseBranch::If(s)) => self.stmt(s),
                    None => {}
                }
                self.b.goto(join);
                self.b.cur = join;
                self.pop_scope(span);
            }
            StmtKind::While { cond, body } => {
                self.push_scope();
                let head = self.b.slot();
                self.b.goto(head);
                self.b.cur = head;
                let c = self.condition(cond);
                let (t, exit) = (self.b.slot(), self.b.slot());
                self.b.terminate(
                    span,
                    Instr::If {
                        cond: c,
                        then_: t,
                        else_: exit,
                    },
                );
                self.b.cur = t;
                self.block(body, false);
                self.b.goto(head);
                self.b.cur = exit;
                self.pop_scope(span);
            }
            StmtKind::Match { scrutinee, arms } => {
                self.push_scope();
                self.match_stmt(span, scrutinee, arms);
                self.pop_scope(span);
            }
            StmtKind::Return(value) => {
                self.push_scope();
                if let Some(e) = value {
                    self.assign_expr(Place::local(Local::RETURN), e, false);
                }
                self.unwind_and_return(span);
                self.scopes.pop();
            }
            StmtKind::Block(b) => self.block(b, false),
        }
    }

    fn borrowed_temp(&self, e: &ScopeEntry) -> bool {
        let (ScopeEntry::Owned(l) | ScopeEntry::Storage(l)) = e else {
            return false;
        };
        self.b
            .slots
            .iter()
            .any(|s| matches!(s, Slot::Filled(Instr::Assign { rvalue: Rvalue::Ref(_, _, p), .. }, _) if p.local == *l))
    }

    /// Evaluate a branch condition. Temporaries other than the one holding
    /// the result are released before branching, so loop conditions do not
    /// accumulate them.
    fn condition(&mut self, cond: &RlExpr) -> Operand {
        if let ExprKind::Bool(b) = cond.kind {
            return Operand::Const(crate::ir::Constant::Bool(b));
        }
        if cond.is_place() {
            return self.operand(cond);
        }
        let t = self.temp(&Ty::Bool, cond.span);
        self.push_scope();
        self.assign_expr(Place::local(t), cond, false);
        self.pop_scope(cond.span);
        Operand::Copy(Place::local(t))
    }

    fn match_stmt(&mut self, span: Span, scrutinee: &RlExpr, arms: &[Arm]) {
        let sty = self.tm.ty(scrutinee).clone();
        let Ty::Adt(adt) = sty else {
            unreachable!("typeck ensures enum scrutinee")
        };
        let def = self.adts.get(adt).clone();
        let scrut = if scrutinee.is_place() {
            self.place(scrutinee)
        } else {
            let t = self.temp(&sty, scrutinee.span);
            self.assign_expr(Place::local(t), scrutinee, false);
            Place::local(t)
        };
        // first matching arm for each variant
        let arm_for: Vec<usize> = (0..def.variants().len())
            .map(|v| {
                arms.iter()
                    .position(|a| match &a.pattern {
                        Pattern::Wild => true,
                        Pattern::Variant { variant, .. } => def.variants()[v].name == variant.name,
                    })
                    .expect("exhaustive match")
            })
            .collect();
        let arm_slots: Vec<Option<usize>> = (0..arms.len())
            .map(|i| arm_for.contains(&i).then(|| self.b.slot()))
            .collect();
        let targets = arm_for.iter().map(|&a| arm_slots[a].unwrap()).collect();
        self.b.terminate(
            span,
            Instr::Switch {
                place: scrut.clone(),
                targets,
            },
        );
        let join = self.b.slot();
        for (arm, slot) in arms.iter().zip(arm_slots) {
            let Some(slot) = slot else { continue };
            self.b.cur = slot;
            self.push_scope();
            if let Pattern::Variant {
                variant,
                fields: Some(subs),
                ..
            } = &arm.pattern
            {
                let v = def.variants().iter().position(|x| x.name == variant.name).unwrap() as u32;
                self.bind_fields(arm.span, &scrut, &sty, adt, v, subs);
            }
            match &arm.body {
                ArmBody::Block(b) => self.block(b, false),
                ArmBody::Expr(e) => {
                    self.push_scope();
                    self.discard(e);
                    self.pop_scope(e.span);
                }
            }
            self.pop_scope(arm.span);
            self.b.goto(join);
        }
        self.b.cur = join;
    }

    fn bind_fields(
        &mut self,
        span: Span,
        scrut: &Place,
        sty: &SynTy,
        adt: crate::types::AdtId,
        v: u32,
        subs: &[SubPattern],
    ) {
        let ftys: Vec<SynTy> = self.adts.get(adt).variants()[v as usize].fields.clone();
        let by_move = subs
            .iter()
            .zip(&ftys)
            .any(|(s, t)| matches!(s, SubPattern::Bind { by_ref: None, .. }) && !t.is_copy());
        let base = if by_move {
            // take the whole value, bind from it, drop what is left at the end
            let rty = self.with_fresh(sty);
            let t = self.push_local(rty, LocalKind::Temp, None, span);
            let rv = Rvalue::Use(Operand::Move(scrut.clone()));
            self.b.emit(span, |next| Instr::Assign {
                place: Place::local(t),
                rvalue: rv,
                next,
            });
            let rest: Vec<u32> = subs
                .iter()
                .zip(&ftys)
                .enumerate()
                .filter(|(_, (s, ty))| self.adts.needs_drop(*ty) && !matches!(s, SubPattern::Bind { by_ref: None, .. }))
                .map(|(j, _)| j as u32)
                .collect();
            self.scopes.last_mut().unwrap().push(ScopeEntry::Fields(t, v, rest));
            Place::local(t)
        } else {
            scrut.clone()
        };
        let payload = base.project(ProjElem::Downcast(v));
        for (j, (sub, fty)) in subs.iter().zip(&ftys).enumerate() {
            let SubPattern::Bind { by_ref, name, .. } = sub else {
                continue;
            };
            let bid = self.tm.binding_at[&name.span];
            let bty = self.tm.bindings[bid.0 as usize].ty.clone();
            let rty = self.with_fresh(&bty);
            let x = self.push_local(rty, LocalKind::User, Some(name.name.clone()), name.span);
            self.binding_local.insert(bid, x);
            let fp = payload.field(j as u32);
            let rv = match by_ref {
                Some(m) => Rvalue::Ref(self.fresh_region(), *m, fp),
                None if fty.is_copy() => Rvalue::Use(Operand::Copy(fp)),
                None => Rvalue::Use(Operand::Move(fp)),
            };
            self.b.emit(name.span, |next| Instr::Assign {
                place: Place::local(x),
                rvalue: rv,
                next,
            });
            self.scopes.last_mut().unwrap().push(ScopeEntry::Owned(x));
        }
    }

    // ---- expressions ----

    /// Evaluate for side effects only: the value lands in a temp that is
    /// released at statement end.
    fn discard(&mut self, e: &RlExpr) {
        match &e.kind {
            ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Unit => {}
            ExprKind::Paren(inner) => self.discard(inner),
            _ => {
                let ty = self.tm.ty(e).clone();
                let t = self.temp(&ty, e.span);
                self.assign_expr(Place::local(t), e, false);
            }
        }
    }

    /// Emit code computing `e` into `dest`. `coerce` enables the implicit
    /// reborrow of `&mut` places at coercion sites.
    fn assign_expr(&mut self, dest: Place, e: &RlExpr, coerce: bool) {
        let span = e.span;
        match &e.kind {
            ExprKind::Paren(inner) => self.assign_expr(dest, inner, coerce),
            ExprKind::Call(callee, args) if matches!(self.tm.call_targets[&e.id], CallTarget::Fn(_)) => {
                let Callee::Name(name) = callee else { unreachable!() };
                let CallTarget::Fn(fid) = self.tm.call_targets[&e.id] else {
                    unreachable!()
                };
                let ops: Vec<Operand> = args.iter().map(|a| self.arg_operand(a)).collect();
                let n = self.sigs[fid.0 as usize].universals;
                let region_args = (0..n).map(|_| self.fresh_region()).collect();
                self.b.emit(span, |next| Instr::Call {
                    dest,
                    func: FnRef {
                        index: fid.0,
                        name: name.name.clone(),
                    },
                    args: ops,
                    region_args,
                    next,
                });
            }
            ExprKind::Binary(op @ (BinOp::And | BinOp::Or), l, r) => {
                let lc = self.operand(l);
                let (rhs, short) = (self.b.slot(), self.b.slot());
                let (then_, else_) = if *op == BinOp::And { (rhs, short) } else { (short, rhs) };
                self.b.terminate(span, Instr::If { cond: lc, then_, else_ });
                let join = self.b.slot();
                self.b.cur = rhs;
                self.assign_expr(dest.clone(), r, false);
                self.b.goto(join);
                self.b.cur = short;
                let v = Constant::Bool(*op == BinOp::Or);
                self.b.emit(span, |next| Instr::Assign {
                    place: dest,
                    rvalue: Rvalue::Use(Operand::Const(v)),
                    next,
                });
                self.b.goto(join);
                self.b.cur = join;
            }
            _ => {
                let rv = self.rvalue_reborrow(e, coerce);
                self.b.emit(span, |next| Instr::Assign {
                    place: dest,
                    rvalue: rv,
                    next,
                });
            }
        }
    }

    fn rvalue_reborrow(&mut self, e: &RlExpr, coerce: bool) -> Rvalue {
        if coerce && e.is_place() {
            if let Ty::Ref(_, Mutability::Mut, _) = self.tm.ty(e) {
                let p = self.place(e).deref();
                return Rvalue::Ref(self.fresh_region(), Mutability::Mut, p);
            }
        }
        self.rvalue(e)
    }

    fn rvalue(&mut self, e: &RlExpr) -> Rvalue {
        match &e.kind {
            ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Unit => Rvalue::Use(self.operand(e)),
            ExprKind::Var(_) if matches!(self.tm.resolutions[&e.id], Resolution::UnitStruct(_)) => {
                let Resolution::UnitStruct(id) = self.tm.resolutions[&e.id] else {
                    unreachable!()
                };
                Rvalue::Aggregate(id, None, vec![])
            }
            ExprKind::Path(..) => {
                let Resolution::UnitVariant(id, v) = self.tm.resolutions[&e.id] else {
                    unreachable!()
                };
                Rvalue::Aggregate(id, Some(v), vec![])
            }
            ExprKind::Var(_) | ExprKind::Field(..) | ExprKind::Deref(_) => Rvalue::Use(self.operand(e)),
            ExprKind::Paren(inner) => self.rvalue(inner),
            ExprKind::Ref(m, inner) => {
                let p = self.place(inner);
                Rvalue::Ref(self.fresh_region(), *m, p)
            }
            ExprKind::BoxNew(inner) => Rvalue::Box(self.operand(inner)),
            ExprKind::Unary(UnOp::Neg, inner) => {
                if let ExprKind::Int(n) = inner.kind {
                    return Rvalue::Use(Operand::Const(Constant::I32((n as i64).wrapping_neg() as i32)));
                }
                let o = self.operand(inner);
                Rvalue::BinaryOp(BinOp::Sub, Operand::Const(Constant::I32(0)), o)
            }
            ExprKind::Unary(UnOp::Not, inner) => {
                let o = self.operand(inner);
                Rvalue::BinaryOp(BinOp::Eq, o, Operand::Const(Constant::Bool(false)))
            }
            ExprKind::Binary(BinOp::And | BinOp::Or, ..) => Rvalue::Use(self.operand(e)),
            ExprKind::Binary(op, l, r) => {
                let a = self.operand(l);
                let b = self.operand(r);
                Rvalue::BinaryOp(*op, a, b)
            }
            ExprKind::Call(_, args) => match self.tm.call_targets[&e.id] {
                CallTarget::Fn(_) => Rvalue::Use(self.operand(e)),
                CallTarget::TupleStruct(id) => {
                    let ops = args.iter().map(|a| self.operand(a)).collect();
                    Rvalue::Aggregate(id, None, ops)
                }
                CallTarget::Variant(id, v) => {
                    let ops = args.iter().map(|a| self.operand(a)).collect();
                    Rvalue::Aggregate(id, Some(v), ops)
                }
            },
            ExprKind::StructLit(_, fields) => {
                let id = self.tm.struct_lits[&e.id];
                let names: Vec<String> = self
                    .adts
                    .get(id)
                    .struct_fields()
                    .iter()
                    .map(|f| f.name.clone())
                    .collect();
                // evaluate in source order, store in declaration order
                let mut ops: Vec<Option<Operand>> = vec![None; names.len()];
                for (f, v) in fields {
                    let i = names.iter().position(|n| *n == f.name).unwrap();
                    ops[i] = Some(self.operand(v));
                }
                Rvalue::Aggregate(id, None, ops.into_iter().map(|o| o.unwrap()).collect())
            }
        }
    }

    fn operand(&mut self, e: &RlExpr) -> Operand {
        match &e.kind {
            ExprKind::Int(n) => Operand::Const(Constant::I32(*n as i32)),
            ExprKind::Bool(b) => Operand::Const(Constant::Bool(*b)),
            ExprKind::Unit => Operand::Const(Constant::Unit),
            ExprKind::Paren(inner) => self.operand(inner),
            _ if e.is_place() && matches!(self.tm.resolutions.get(&e.id), None | Some(Resolution::Local(_))) => {
                let p = self.place(e);
                if self.tm.ty(e).is_copy() {
                    Operand::Copy(p)
                } else {
                    Operand::Move(p)
                }
            }
            _ => {
                let ty = self.tm.ty(e).clone();
                let t = self.temp(&ty, e.span);
                self.assign_expr(Place::local(t), e, false);
                if ty.is_copy() {
                    Operand::Copy(Place::local(t))
                } else {
                    Operand::Move(Place::local(t))
                }
            }
        }
    }

    /// Call arguments: `&mut` places are reborrowed rather than moved.
    fn arg_operand(&mut self, a: &RlExpr) -> Operand {
        let ty = self.tm.ty(a).clone();
        if a.is_place() && matches!(ty, Ty::Ref(_, Mutability::Mut, _)) {
            let p = self.place(a).deref();
            let t = self.temp(&ty, a.span);
            let rv = Rvalue::Ref(self.fresh_region(), Mutability::Mut, p);
            self.b.emit(a.span, |next| Instr::Assign {
                place: Place::local(t),
                rvalue: rv,
                next,
            });
            return Operand::Move(Place::local(t));
        }
        self.operand(a)
    }

    /// The place denoted by `e`; non-place expressions are evaluated into
    /// a temporary first.
    fn place(&mut self, e: &RlExpr) -> Place {
        match &e.kind {
            ExprKind::Var(_) if matches!(self.tm.resolutions[&e.id], Resolution::Local(_)) => {
                let Resolution::Local(b) = self.tm.resolutions[&e.id] else {
                    unreachable!()
                };
                Place::local(self.binding_local[&b])
            }
            ExprKind::Paren(inner) => self.place(inner),
            ExprKind::Deref(inner) => self.place(inner).deref(),
            ExprKind::Field(base, _) => {
                let mut p = self.place(base);
                for _ in 0..self.tm.auto_derefs[&e.id] {
                    p = p.deref();
                }
                p.field(self.tm.field_index[&e.id])
            }
            _ => {
                let ty = self.tm.ty(e).clone();
                let t = self.temp(&ty, e.span);
                self.assign_expr(Place::local(t), e, false);
                Place::local(t)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, typecheck};

    pub(crate) fn lower_src(src: &str) -> RirModule {
        lower(&typecheck(parse(src).unwrap()).unwrap())
    }

    #[test]
    fn return_constant() {
        let m = lower_src("fn f() -> i32 { return 1; }");
        assert_eq!(
            dump_ir(&m.adts, &m.functions[0]),
            "bb0: _0 = const 1 -> bb1\nbb1: return\n"
        );
    }

    #[test]
    fn empty_fn() {
        let m = lower_src("fn f() {}");
        assert_eq!(dump_ir(&m.adts, &m.functions[0]), "bb0: return\n");
    }

    #[test]
    fn fresh_region_per_borrow() {
        let m = lower_src("fn f() { let x = 1; let y = &x; }");
        let f = &m.functions[0];
        let refs: Vec<Region> = f
            .nodes
            .iter()
            .filter_map(|n| match &n.instr {
                Instr::Assign {
                    rvalue: Rvalue::Ref(r, ..),
                    ..
                } => Some(*r),
                _ => None,
            })
            .collect();
        assert_eq!(refs.len(), 1);
        // y's own region plus the borrow's
        assert_eq!(f.num_regions, 2);
        assert_ne!(f.local_ty(Local(2)).regions()[0], refs[0]);
    }

    #[test]
    fn scope_exit_drops_in_reverse_order() {
        let m = lower_src("fn f() { let a = Box::new(1); let b = Box::new(2); }");
        let dump = dump_ir(&m.adts, &m.functions[0]);
        let pb = dump.find("drop(_2)").unwrap();
        let pa = dump.find("drop(_1)").unwrap();
        assert!(pb < pa, "{}", dump);
    }

    #[test]
    fn early_return_releases_all_scopes() {
        let m = lower_src(
            "fn f(c: bool) -> i32 { let a = Box::new(1); if c { let b = Box::new(2); return 1; } return 2; }",
        );
        let f = &m.functions[0];
        f.validate().unwrap();
        let drops_of_a = f
            .nodes
            .iter()
            .filter(|n| matches!(&n.instr, Instr::Drop { place, .. } if place.local == Local(2)))
            .count();
        assert_eq!(drops_of_a, 2);
    }

    #[test]
    fn while_has_back_edge() {
        let m = lower_src("fn f() { let mut i = 0; while i < 3 { i = i + 1; } }");
        let f = &m.functions[0];
        f.validate().unwrap();
        let back = (0..f.nodes.len()).any(|n| f.successors(n).iter().any(|&s| s <= n));
        assert!(back);
    }

    #[test]
    fn elided_output_lifetime() {
        let m = lower_src("fn f(x: &i32) -> &i32 { return x; } fn g() -> &i32 { let x = 1; return &x; }");
        assert_eq!(m.functions[0].sig.universals, 1);
        assert_eq!(m.functions[0].sig.ret.regions(), vec![Region(0)]);
        assert_eq!(m.functions[1].sig.universals, 1);
    }

    #[test]
    fn mut_ref_args_are_reborrowed() {
        let m = lower_src("fn g(r: &mut i32) {} fn f(r: &mut i32) { g(r); g(r); }");
        let dump = dump_ir(&m.adts, &m.functions[1]);
        assert_eq!(dump.matches("&'r").count(), 2, "{}", dump);
        assert!(!dump.contains("move _1"), "{}", dump);
    }
}
