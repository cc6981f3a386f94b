//! Borrow checking as a forward dataflow analysis over loans and region
//! equalities, with backward region liveness deciding when regions die.
//!
//! Every `Ref` rvalue introduces a loan. Loans flow between regions along
//! assignments and calls: covariant positions copy loan sets, positions
//! under a `&mut` merge the regions in the union-find. A loan is in scope
//! at a node when some live region holds it, and an access conflicting with
//! an in-scope loan is an error.
//!
//! Each universal region starts out holding a placeholder loan standing for
//! the caller's data. A placeholder reaching another universal without a
//! declared or implied outlives relation is a signature violation.
//!
//! A loan that reaches a universal region on some path outlives the call,
//! so it is held by that universal from the borrow onward on every path.
//! This takes a second solve once such loans are known.

pub mod domain;

use std::collections::{BTreeSet, HashMap};

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::dataflow::{solve, Analysis, Direction, FlowResult, NonTermination};
use crate::diag::{Diagnostic, ErrorCode};
use crate::ir::*;
use crate::liveness::{region_liveness, RegionLiveness};
use crate::types::{AdtTable, Mutability, Ty};

pub use domain::{AbstractState, LoanId, RegionSet, RegionUf};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loan {
    pub id: LoanId,
    pub place: Place,
    pub mutability: Mutability,
    pub node: NodeId,
    pub region: Region,
}

/// Real loans in node order, then one placeholder per universal region.
#[derive(Debug, Clone)]
pub struct LoanTable {
    pub loans: Vec<Loan>,
    pub universals: usize,
    /// Per real loan, the universal it escapes into, if any.
    pub escapes: Vec<Option<Region>>,
    by_node: HashMap<NodeId, LoanId>,
}

impl LoanTable {
    pub fn build(func: &RirFunction) -> LoanTable {
        let mut loans = vec![];
        let mut by_node = HashMap::new();
        for (n, node) in func.nodes.iter().enumerate() {
            if let Instr::Assign {
                rvalue: Rvalue::Ref(r, m, p),
                ..
            } = &node.instr
            {
                by_node.insert(n, loans.len());
                loans.push(Loan {
                    id: loans.len(),
                    place: p.clone(),
                    mutability: *m,
                    node: n,
                    region: *r,
                });
            }
        }
        LoanTable {
            escapes: vec![None; loans.len()],
            loans,
            universals: func.sig.universals as usize,
            by_node,
        }
    }

    pub fn len(&self) -> usize {
        self.loans.len() + self.universals
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn placeholder(&self, universal: Region) -> LoanId {
        self.loans.len() + universal.0 as usize
    }

    /// The universal a placeholder stands for.
    pub fn placeholder_region(&self, l: LoanId) -> Option<Region> {
        (l >= self.loans.len()).then(|| Region((l - self.loans.len()) as u32))
    }

    pub fn at_node(&self, n: NodeId) -> Option<&Loan> {
        self.by_node.get(&n).map(|&l| &self.loans[l])
    }
}

/// Reflexive-transitive `'a: 'b` over a signature's universals, including
/// the bounds implied by well-formed parameter and return types
/// (`&'a &'b T` implies `'b: 'a`).
pub fn outlives_closure(sig: &FnRegionSig) -> Vec<FixedBitSet> {
    let n = sig.universals as usize;
    let mut m = vec![FixedBitSet::with_capacity(n); n];
    for (i, row) in m.iter_mut().enumerate() {
        row.insert(i);
    }
    for &(a, b) in &sig.outlives {
        m[a.0 as usize].insert(b.0 as usize);
    }
    fn implied(t: &RTy, m: &mut [FixedBitSet]) {
        match t {
            Ty::Ref(a, _, inner) => {
                for b in inner.regions() {
                    m[b.0 as usize].insert(a.0 as usize);
                }
                implied(inner, m);
            }
            Ty::Box(inner) => implied(inner, m),
            _ => {}
        }
    }
    for t in sig.params.iter().chain(std::iter::once(&sig.ret)) {
        implied(t, &mut m);
    }
    for k in 0..n {
        for i in 0..n {
            if m[i].contains(k) {
                let row = m[k].clone();
                m[i].union_with(&row);
            }
        }
    }
    m
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BorrowOptions {
    /// Treat sibling fields as overlapping.
    pub field_insensitive: bool,
}

pub struct BorrowAnalysis<'a> {
    pub adts: &'a AdtTable,
    pub func: &'a RirFunction,
    /// Signatures of every function in the module, by index.
    pub sigs: &'a [FnRegionSig],
    pub loans: &'a LoanTable,
    pub live: &'a RegionLiveness,
    callee_outlives: Vec<Vec<FixedBitSet>>,
    /// Per local: loans whose place goes through a reference stored in it.
    through_local: Vec<FixedBitSet>,
}

impl<'a> BorrowAnalysis<'a> {
    pub fn new(
        adts: &'a AdtTable,
        func: &'a RirFunction,
        sigs: &'a [FnRegionSig],
        loans: &'a LoanTable,
        live: &'a RegionLiveness,
    ) -> Self {
        let mut through_local = vec![FixedBitSet::with_capacity(loans.len()); func.locals.len()];
        for l in &loans.loans {
            if deref_of_ref_at(adts, func, &l.place, 0).is_some() {
                through_local[l.place.local.index()].insert(l.id);
            }
        }
        BorrowAnalysis {
            adts,
            func,
            sigs,
            loans,
            live,
            callee_outlives: sigs.iter().map(outlives_closure).collect(),
            through_local,
        }
    }

    fn ty(&self, p: &Place) -> RTy {
        self.func.place_ty(self.adts, p)
    }

    fn state(&self) -> AbstractState {
        AbstractState::bottom(self.func.num_regions as usize, self.loans.universals, self.loans.len())
    }

    /// Loans of regions reachable through the dereferenced references of a
    /// reborrowed place flow into the new loan's region. The walk stops
    /// after the first shared reference.
    fn reborrow_flows(&self, s: &mut AbstractState, r: Region, q: &Place) {
        for k in (0..q.proj.len()).rev() {
            if q.proj[k] != ProjElem::Deref {
                continue;
            }
            if let Ty::Ref(a, m, _) = self.ty(&q.truncated(k)) {
                s.flow(a, r);
                if !m.is_mut() {
                    break;
                }
            }
        }
    }

    fn kill_overwritten(&self, s: &mut AbstractState, p: &Place) {
        if p.is_local() {
            s.remove_loans(&self.through_local[p.local.index()]);
        }
    }
}

/// Flow loans from a value of type `src` into a slot of type `dst`.
/// Positions under a `&mut` are invariant and merge regions.
pub fn subtype_flow(s: &mut AbstractState, src: &RTy, dst: &RTy, invariant: bool) {
    match (src, dst) {
        (Ty::Ref(a, ma, ta), Ty::Ref(b, mb, tb)) => {
            if invariant {
                s.union(*a, *b);
            } else {
                s.flow(*a, *b);
            }
            subtype_flow(s, ta, tb, invariant || ma.is_mut() || mb.is_mut());
        }
        (Ty::Box(ta), Ty::Box(tb)) => subtype_flow(s, ta, tb, invariant),
        _ => {}
    }
}

/// Index of the first deref at or after `from` whose operand is a
/// reference.
fn deref_of_ref_at(adts: &AdtTable, func: &RirFunction, p: &Place, from: usize) -> Option<usize> {
    let mut ty = PlaceTy::Ty(func.local_ty(p.local).clone());
    for (i, e) in p.proj.iter().enumerate() {
        if *e == ProjElem::Deref && i >= from {
            if let PlaceTy::Ty(Ty::Ref(..)) = ty {
                return Some(i);
            }
        }
        ty = match ty {
            PlaceTy::Ty(t) => place_ty_of(adts, &t, &[*e]),
            PlaceTy::Variant(id, v) => match e {
                ProjElem::Field(k) => PlaceTy::Ty(lift(adts.field_ty(id, Some(v), *k))),
                _ => unreachable!("only fields follow a downcast"),
            },
        };
    }
    None
}

impl Analysis for BorrowAnalysis<'_> {
    type State = AbstractState;

    fn direction(&self) -> Direction {
        Direction::Forward
    }

    fn bottom(&self) -> AbstractState {
        self.state()
    }

    fn boundary(&self) -> AbstractState {
        let mut s = self.state();
        for u in 0..self.loans.universals as u32 {
            s.add_loan(Region(u), self.loans.placeholder(Region(u)));
        }
        s
    }

    fn transfer(&self, n: NodeId, state: &AbstractState) -> AbstractState {
        let mut s = state.clone();
        match &self.func.nodes[n].instr {
            Instr::Assign { place, rvalue, .. } => {
                self.kill_overwritten(&mut s, place);
                let dst = self.ty(place);
                match rvalue {
                    Rvalue::Ref(r, m, q) => {
                        let l = self.loans.at_node(n).expect("loan for every borrow").id;
                        s.add_loan(*r, l);
                        if let Some(u) = self.loans.escapes[l] {
                            s.add_loan(u, l);
                        }
                        self.reborrow_flows(&mut s, *r, q);
                        let src = Ty::Ref(*r, *m, Box::new(self.ty(q)));
                        subtype_flow(&mut s, &src, &dst, false);
                    }
                    Rvalue::Use(o) => {
                        if let Some(p) = o.place() {
                            subtype_flow(&mut s, &self.ty(p), &dst, false);
                        }
                    }
                    Rvalue::Box(o) => {
                        if let Some(p) = o.place() {
                            subtype_flow(&mut s, &Ty::Box(Box::new(self.ty(p))), &dst, false);
                        }
                    }
                    Rvalue::BinaryOp(..) | Rvalue::Aggregate(..) => {}
                }
            }
            Instr::Call {
                dest,
                func,
                args,
                region_args,
                ..
            } => {
                self.kill_overwritten(&mut s, dest);
                let callee = &self.sigs[func.index as usize];
                let inst = |t: &RTy| t.map_regions(&mut |u: &Region| region_args[u.0 as usize]);
                for (a, pty) in args.iter().zip(&callee.params) {
                    if let Some(p) = a.place() {
                        subtype_flow(&mut s, &self.ty(p), &inst(pty), false);
                    }
                }
                for (a, row) in self.callee_outlives[func.index as usize].iter().enumerate() {
                    for b in row.ones().filter(|&b| b != a) {
                        s.flow(region_args[a], region_args[b]);
                    }
                }
                subtype_flow(&mut s, &inst(&callee.ret), &self.ty(dest), false);
            }
            _ => {}
        }
        let nr = self.func.num_regions as usize;
        let mut dead = FixedBitSet::with_capacity(nr);
        dead.insert_range(self.loans.universals.min(nr)..);
        dead.difference_with(&self.live.after[n]);
        s.kill(&dead);
        s
    }

    fn chain_bound(&self) -> usize {
        let r = self.func.num_regions as usize;
        // merges, loan insertions per region, and dead-set shrinkage
        r + r * self.loans.len() + r + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Access {
    Read,
    SharedBorrow,
    MutBorrow,
    Write,
    Move,
    Drop,
    StorageDead,
}

pub struct BorrowCheckResult {
    pub loans: LoanTable,
    pub live: RegionLiveness,
    pub flow: FlowResult<AbstractState>,
    pub diagnostics: Vec<Diagnostic>,
}

struct Checker<'a> {
    a: &'a BorrowAnalysis<'a>,
    opts: BorrowOptions,
    out: Vec<Diagnostic>,
}

impl Checker<'_> {
    /// Same local and no point where the projections take different fields.
    fn overlap(&self, p: &Place, q: &Place) -> bool {
        if p.local != q.local {
            return false;
        }
        for (x, y) in p.proj.iter().zip(&q.proj) {
            if x != y {
                return match (x, y) {
                    (ProjElem::Field(_), ProjElem::Field(_)) => self.opts.field_insensitive,
                    _ => true,
                };
            }
        }
        true
    }

    /// Overwriting `p` without reading it: a loan of something reached
    /// through a reference stored in `p` survives.
    fn shallow_overlap(&self, p: &Place, q: &Place) -> bool {
        self.overlap(p, q)
            && (q.proj.len() <= p.proj.len() || deref_of_ref_at(self.a.adts, self.a.func, q, p.proj.len()).is_none())
    }

    fn conflicts(&self, access: Access, p: &Place, l: &Loan) -> bool {
        match access {
            Access::Read | Access::SharedBorrow => l.mutability.is_mut() && self.overlap(p, &l.place),
            Access::MutBorrow | Access::Move | Access::Drop => self.overlap(p, &l.place),
            Access::Write | Access::StorageDead => self.shallow_overlap(p, &l.place),
        }
    }

    fn check(&mut self, n: NodeId, access: Access, p: &Place, scope: &FixedBitSet, local_scope: &FixedBitSet) {
        let scope = match access {
            // loans held only by universal regions are reported at return
            Access::Drop | Access::StorageDead => local_scope,
            _ => scope,
        };
        let Some(l) = scope
            .ones()
            .filter(|&l| l < self.a.loans.loans.len())
            .map(|l| &self.a.loans.loans[l])
            .find(|l| self.conflicts(access, p, l))
        else {
            return;
        };
        let (adts, func) = (self.a.adts, self.a.func);
        let name = describe_place(adts, func, p);
        let borrowed = describe_place(adts, func, &l.place);
        let kind = if l.mutability.is_mut() { "mutably " } else { "" };
        let (code, msg) = match access {
            Access::MutBorrow => (
                ErrorCode::MutableBorrowWhileBorrowed,
                format!(
                    "cannot borrow `{}` as mutable because `{}` is also {}borrowed",
                    name, borrowed, kind
                ),
            ),
            Access::SharedBorrow => (
                ErrorCode::UseWhileMutablyBorrowed,
                format!(
                    "cannot borrow `{}` as immutable because `{}` is also mutably borrowed",
                    name, borrowed
                ),
            ),
            Access::Read => (
                ErrorCode::UseWhileMutablyBorrowed,
                format!("cannot use `{}` because `{}` is mutably borrowed", name, borrowed),
            ),
            Access::Write => (
                ErrorCode::AssignWhileBorrowed,
                format!("cannot assign to `{}` because `{}` is {}borrowed", name, borrowed, kind),
            ),
            Access::Move => (
                ErrorCode::MoveWhileBorrowed,
                format!(
                    "cannot move out of `{}` because `{}` is {}borrowed",
                    name, borrowed, kind
                ),
            ),
            Access::Drop | Access::StorageDead => (
                ErrorCode::DroppedWhileBorrowed,
                format!("`{}` dropped while `{}` is still {}borrowed", name, borrowed, kind),
            ),
        };
        self.out.push(
            Diagnostic::new(code, func.nodes[n].span, msg)
                .in_function(&func.name)
                .at_node(n)
                .with_place(name)
                .with_loan(l.id),
        );
    }

    fn node(&mut self, n: NodeId, s: &AbstractState) {
        let a = self.a;
        let live = &a.live.before[n];
        let mut scope = FixedBitSet::with_capacity(a.loans.len());
        let mut local_scope = scope.clone();
        for r in live.ones() {
            let r = Region(r as u32);
            if let Some(ls) = s.loans_of(r) {
                scope.union_with(ls);
                let universal_class = s.uf().members(s.find(r)).any(|m| a.func.is_universal(m));
                if !universal_class {
                    local_scope.union_with(ls);
                }
            }
        }
        let instr = &a.func.nodes[n].instr;
        for o in instr.operands() {
            match o {
                Operand::Copy(p) => self.check(n, Access::Read, p, &scope, &local_scope),
                Operand::Move(p) => self.check(n, Access::Move, p, &scope, &local_scope),
                Operand::Const(_) => {}
            }
        }
        match instr {
            Instr::Assign { place, rvalue, .. } => {
                if let Rvalue::Ref(_, m, q) = rvalue {
                    let k = if m.is_mut() {
                        Access::MutBorrow
                    } else {
                        Access::SharedBorrow
                    };
                    self.check(n, k, q, &scope, &local_scope);
                }
                self.check(n, Access::Write, place, &scope, &local_scope);
            }
            Instr::Call { dest, .. } => self.check(n, Access::Write, dest, &scope, &local_scope),
            Instr::Switch { place, .. } => self.check(n, Access::Read, place, &scope, &local_scope),
            Instr::Drop { place, .. } | Instr::ConditionalDrop { place, .. } => {
                self.check(n, Access::Drop, place, &scope, &local_scope)
            }
            Instr::StorageDead { local, .. } => {
                self.check(n, Access::StorageDead, &Place::local(*local), &scope, &local_scope)
            }
            Instr::Return => self.escaping(n, s),
            Instr::Nop { .. } | Instr::Goto { .. } | Instr::If { .. } => {}
        }
    }

    /// Loans of function-owned storage held by a universal region at
    /// return.
    fn escaping(&mut self, n: NodeId, s: &AbstractState) {
        let a = self.a;
        let mut seen = BTreeSet::new();
        for u in 0..a.func.sig.universals {
            let Some(ls) = s.loans_of(Region(u)) else { continue };
            for l in ls.ones().filter(|&l| l < a.loans.loans.len()) {
                let loan = &a.loans.loans[l];
                if deref_of_ref_at(a.adts, a.func, &loan.place, 0).is_some() || !seen.insert(l) {
                    continue;
                }
                let name = describe_place(a.adts, a.func, &loan.place);
                self.out.push(
                    Diagnostic::new(
                        ErrorCode::ReturnLocalReference,
                        a.func.nodes[loan.node].span,
                        format!("borrow of local `{}` outlives the function", name),
                    )
                    .in_function(&a.func.name)
                    .at_node(n)
                    .with_place(name)
                    .with_loan(l),
                );
            }
        }
    }

    /// A placeholder of `'v` held by universal `'u` requires `'v: 'u`.
    fn universal_violations(&mut self, flow: &FlowResult<AbstractState>) {
        let a = self.a;
        let outlives = outlives_closure(&a.func.sig);
        let mut seen = BTreeSet::new();
        for (n, s) in flow.state_out.iter().enumerate() {
            for u in 0..a.func.sig.universals {
                let Some(ls) = s.loans_of(Region(u)) else { continue };
                for l in ls.ones() {
                    let Some(v) = a.loans.placeholder_region(l) else {
                        continue;
                    };
                    if outlives[v.0 as usize].contains(u as usize) || !seen.insert((v, u)) {
                        continue;
                    }
                    let name = |r: Region| match &a.func.sig.universal_names[r.0 as usize] {
                        Some(x) => format!("'{}", x),
                        None => format!("'r{}", r.0),
                    };
                    self.out.push(
                        Diagnostic::new(
                            ErrorCode::UniversalRegionViolation,
                            a.func.nodes[n].span,
                            format!(
                                "lifetime may not live long enough: `{}` must outlive `{}`",
                                name(v),
                                name(Region(u))
                            ),
                        )
                        .in_function(&a.func.name)
                        .at_node(n),
                    );
                }
            }
        }
    }
}

/// For each real loan, the smallest universal region holding it anywhere.
fn escaping_loans(loans: &LoanTable, flow: &FlowResult<AbstractState>) -> Vec<Option<Region>> {
    let mut out = loans.escapes.clone();
    for s in &flow.state_out {
        for u in (0..loans.universals as u32).rev() {
            let Some(ls) = s.loans_of(Region(u)) else { continue };
            for l in ls.ones().filter(|&l| l < loans.loans.len()) {
                out[l] = Some(out[l].map_or(Region(u), |v| v.min(Region(u))));
            }
        }
    }
    out
}

pub fn borrow_check(
    adts: &AdtTable,
    sigs: &[FnRegionSig],
    func: &RirFunction,
    opts: BorrowOptions,
) -> Result<BorrowCheckResult, NonTermination> {
    let mut loans = LoanTable::build(func);
    let live = region_liveness(func)?;
    let flow = loop {
        let flow = solve(func, &BorrowAnalysis::new(adts, func, sigs, &loans, &live))?;
        let escapes = escaping_loans(&loans, &flow);
        if escapes == loans.escapes {
            break flow;
        }
        loans.escapes = escapes;
    };
    let a = BorrowAnalysis::new(adts, func, sigs, &loans, &live);
    let mut c = Checker {
        a: &a,
        opts,
        out: vec![],
    };
    for (n, s) in flow.state_in.iter().enumerate() {
        c.node(n, s);
    }
    c.universal_violations(&flow);
    let mut diagnostics = c.out;
    diagnostics.sort_by_key(|d| (d.node, d.loan));
    // later conflicts with an already reported loan are cascades of it
    let mut reported = BTreeSet::new();
    diagnostics.retain(|d| d.loan.is_none_or(|l| reported.insert(l)));
    Ok(BorrowCheckResult {
        loans,
        live,
        flow,
        diagnostics,
    })
}

pub fn module_sigs(m: &RirModule) -> Vec<FnRegionSig> {
    m.functions.iter().map(|f| f.sig.clone()).collect()
}

pub fn dump(adts: &AdtTable, func: &RirFunction, r: &BorrowCheckResult) -> String {
    let mut out = String::new();
    for (n, s) in r.flow.state_in.iter().enumerate() {
        out.push_str(&format!("bb{}: {}\n", n, s));
    }
    if !r.loans.loans.is_empty() {
        out.push_str("loans:\n");
        for l in &r.loans.loans {
            out.push_str(&format!(
                "  L{} = &'r{} {}{} at bb{}\n",
                l.id,
                l.region.0,
                if l.mutability.is_mut() { "mut " } else { "" },
                PlaceDisplay {
                    adts,
                    func,
                    place: &l.place
                },
                l.node
            ));
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct LoanFact {
    pub id: LoanId,
    pub place: String,
    pub mutability: &'static str,
    pub node: NodeId,
    pub region: u32,
}

#[derive(Debug, Serialize)]
pub struct FunctionFacts {
    pub function: String,
    pub regions: u32,
    pub universals: u32,
    pub loans: Vec<LoanFact>,
}

pub fn loan_facts(adts: &AdtTable, func: &RirFunction, loans: &LoanTable) -> FunctionFacts {
    FunctionFacts {
        function: func.name.clone(),
        regions: func.num_regions,
        universals: func.sig.universals,
        loans: loans
            .loans
            .iter()
            .map(|l| LoanFact {
                id: l.id,
                place: PlaceDisplay {
                    adts,
                    func,
                    place: &l.place,
                }
                .to_string(),
                mutability: if l.mutability.is_mut() { "mut" } else { "shared" },
                node: l.node,
                region: l.region.0,
            })
            .collect(),
    }
}
