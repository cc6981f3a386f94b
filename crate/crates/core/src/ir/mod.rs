//! RustIR: a control-flow graph with exactly one instruction per node.

mod dump;

pub use dump::{describe_place, dump_ir, dump_module, PlaceDisplay};

use crate::diag::Span;
use crate::syntax::ast::BinOp;
use crate::types::{AdtId, AdtTable, Mutability, RegionFmt, SynTy, Ty};

pub type NodeId = usize;

/// Region ids are dense per function: universals first, then existentials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Region(pub u32);

impl RegionFmt for Region {
    fn region_label(&self) -> Option<String> {
        Some(format!("'r{}", self.0))
    }
}

pub type RTy = Ty<Region>;

/// Lift a region-free type (ADT field types never hold references).
pub fn lift(t: &SynTy) -> RTy {
    t.map_regions(&mut |_| panic!("reference type inside an ADT"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Local(pub u32);

impl Local {
    pub const RETURN: Local = Local(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalKind {
    Return,
    Param,
    User,
    Temp,
    /// Drop flag inserted by elaboration.
    Flag,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalDecl {
    pub ty: RTy,
    pub kind: LocalKind,
    pub name: Option<String>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProjElem {
    Field(u32),
    Deref,
    Downcast(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Place {
    pub local: Local,
    pub proj: Vec<ProjElem>,
}

impl Place {
    pub fn local(l: Local) -> Place {
        Place { local: l, proj: vec![] }
    }

    pub fn project(&self, e: ProjElem) -> Place {
        let mut p = self.clone();
        p.proj.push(e);
        p
    }

    pub fn field(&self, i: u32) -> Place {
        self.project(ProjElem::Field(i))
    }

    pub fn deref(&self) -> Place {
        self.project(ProjElem::Deref)
    }

    pub fn is_local(&self) -> bool {
        self.proj.is_empty()
    }

    /// `self` is a (non-strict) prefix of `other`.
    pub fn is_prefix_of(&self, other: &Place) -> bool {
        self.local == other.local && other.proj.starts_with(&self.proj)
    }

    /// Prefixes from the bare local up to and including `self`.
    pub fn prefixes(&self) -> impl Iterator<Item = Place> + '_ {
        (0..=self.proj.len()).map(move |n| self.truncated(n))
    }

    pub fn truncated(&self, n: usize) -> Place {
        Place {
            local: self.local,
            proj: self.proj[..n].to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constant {
    Unit,
    Bool(bool),
    I32(i32),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Operand {
    Copy(Place),
    Move(Place),
    Const(Constant),
}

impl Operand {
    pub fn place(&self) -> Option<&Place> {
        match self {
            Operand::Copy(p) | Operand::Move(p) => Some(p),
            Operand::Const(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Rvalue {
    Use(Operand),
    Ref(Region, Mutability, Place),
    /// Never `And`/`Or`; those lower to control flow.
    BinaryOp(BinOp, Operand, Operand),
    Box(Operand),
    /// Struct (`variant == None`) or enum variant construction.
    Aggregate(AdtId, Option<u32>, Vec<Operand>),
}

impl Rvalue {
    pub fn operands(&self) -> Vec<&Operand> {
        match self {
            Rvalue::Use(o) | Rvalue::Box(o) => vec![o],
            Rvalue::BinaryOp(_, a, b) => vec![a, b],
            Rvalue::Aggregate(_, _, ops) => ops.iter().collect(),
            Rvalue::Ref(..) => vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FnRef {
    pub index: u32,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Instr {
    Assign {
        place: Place,
        rvalue: Rvalue,
        next: NodeId,
    },
    StorageDead {
        local: Local,
        next: NodeId,
    },
    Drop {
        place: Place,
        next: NodeId,
    },
    ConditionalDrop {
        place: Place,
        flag: Local,
        next: NodeId,
    },
    Nop {
        next: NodeId,
    },
    Goto {
        target: NodeId,
    },
    If {
        cond: Operand,
        then_: NodeId,
        else_: NodeId,
    },
    /// Branch on the discriminant of an enum place; one target per variant.
    Switch {
        place: Place,
        targets: Vec<NodeId>,
    },
    Call {
        dest: Place,
        func: FnRef,
        args: Vec<Operand>,
        /// Instantiation of the callee's universal regions.
        region_args: Vec<Region>,
        next: NodeId,
    },
    Return,
}

impl Instr {
    pub fn successors(&self) -> Vec<NodeId> {
        match self {
            Instr::Assign { next, .. }
            | Instr::StorageDead { next, .. }
            | Instr::Drop { next, .. }
            | Instr::ConditionalDrop { next, .. }
            | Instr::Nop { next }
            | Instr::Call { next, .. } => vec![*next],
            Instr::Goto { target } => vec![*target],
            Instr::If { then_, else_, .. } => vec![*then_, *else_],
            Instr::Switch { targets, .. } => targets.clone(),
            Instr::Return => vec![],
        }
    }

    pub fn successors_mut(&mut self) -> Vec<&mut NodeId> {
        match self {
            Instr::Assign { next, .. }
            | Instr::StorageDead { next, .. }
            | Instr::Drop { next, .. }
            | Instr::ConditionalDrop { next, .. }
            | Instr::Nop { next }
            | Instr::Call { next, .. } => vec![next],
            Instr::Goto { target } => vec![target],
            Instr::If { then_, else_, .. } => vec![then_, else_],
            Instr::Switch { targets, .. } => targets.iter_mut().collect(),
            Instr::Return => vec![],
        }
    }

    /// Operands read by this instruction, in evaluation order.
    pub fn operands(&self) -> Vec<&Operand> {
        match self {
            Instr::Assign { rvalue, .. } => rvalue.operands(),
            Instr::If { cond, .. } => vec![cond],
            Instr::Call { args, .. } => args.iter().collect(),
            _ => vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub instr: Instr,
    pub span: Span,
}

/// A function's signature in region terms. Universals are `0..universals`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FnRegionSig {
    pub universals: u32,
    /// Source names of universals, `None` for elided ones.
    pub universal_names: Vec<Option<String>>,
    pub params: Vec<RTy>,
    pub ret: RTy,
    /// `(a, b)` means `'a: 'b`.
    pub outlives: Vec<(Region, Region)>,
}

impl FnRegionSig {
    /// Whether `a: b` follows from the declared constraints (reflexive,
    /// transitive).
    pub fn outlives(&self, a: Region, b: Region) -> bool {
        if a == b {
            return true;
        }
        let mut seen = vec![a];
        let mut stack = vec![a];
        while let Some(x) = stack.pop() {
            for &(p, q) in &self.outlives {
                if p == x && !seen.contains(&q) {
                    if q == b {
                        return true;
                    }
                    seen.push(q);
                    stack.push(q);
                }
            }
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RirFunction {
    pub name: String,
    pub span: Span,
    pub sig: FnRegionSig,
    /// `_0` is the return place, params follow at `1..=param_count`.
    pub locals: Vec<LocalDecl>,
    pub param_count: usize,
    pub nodes: Vec<Node>,
    pub num_regions: u32,
}

impl RirFunction {
    pub const ENTRY: NodeId = 0;

    pub fn local_ty(&self, l: Local) -> &RTy {
        &self.locals[l.index()].ty
    }

    pub fn params(&self) -> impl Iterator<Item = Local> {
        (1..=self.param_count as u32).map(Local)
    }

    pub fn is_universal(&self, r: Region) -> bool {
        r.0 < self.sig.universals
    }

    pub fn successors(&self, n: NodeId) -> Vec<NodeId> {
        self.nodes[n].instr.successors()
    }

    pub fn predecessors(&self) -> Vec<Vec<NodeId>> {
        let mut preds = vec![vec![]; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            for s in n.instr.successors() {
                if !preds[s].contains(&i) {
                    preds[s].push(i);
                }
            }
        }
        preds
    }

    pub fn place_ty(&self, adts: &AdtTable, p: &Place) -> RTy {
        match place_ty_of(adts, self.local_ty(p.local), &p.proj) {
            PlaceTy::Ty(t) => t,
            PlaceTy::Variant(..) => panic!("place ends in a downcast"),
        }
    }

    pub fn add_local(&mut self, decl: LocalDecl) -> Local {
        self.locals.push(decl);
        Local(self.locals.len() as u32 - 1)
    }

    pub fn add_node(&mut self, instr: Instr, span: Span) -> NodeId {
        self.nodes.push(Node { instr, span });
        self.nodes.len() - 1
    }

    /// Nodes reachable from entry, as a mask.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![Self::ENTRY];
        while let Some(n) = stack.pop() {
            if n >= seen.len() || seen[n] {
                continue;
            }
            seen[n] = true;
            stack.extend(self.successors(n));
        }
        seen
    }

    /// Structural checks: successor ids in range, every node reachable, at
    /// most one `Return`, and a return reachable from entry.
    pub fn validate(&self) -> Result<(), String> {
        if self.nodes.is_empty() {
            return Err(format!("{}: no nodes", self.name));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            for s in n.instr.successors() {
                if s >= self.nodes.len() {
                    return Err(format!("{}: bb{} jumps to missing bb{}", self.name, i, s));
                }
            }
        }
        if let Some(n) = self.reachable().iter().position(|r| !r) {
            return Err(format!("{}: bb{} is unreachable", self.name, n));
        }
        let returns = self.nodes.iter().filter(|n| n.instr == Instr::Return).count();
        if returns > 1 {
            return Err(format!("{}: {} return nodes", self.name, returns));
        }
        Ok(())
    }
}

/// The type reached by a projection, where a trailing downcast yields a
/// variant rather than a type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlaceTy {
    Ty(RTy),
    Variant(AdtId, u32),
}

pub fn place_ty_of(adts: &AdtTable, base: &RTy, proj: &[ProjElem]) -> PlaceTy {
    let mut cur = PlaceTy::Ty(base.clone());
    for e in proj {
        cur = match (cur, e) {
            (PlaceTy::Ty(t), ProjElem::Deref) => PlaceTy::Ty(t.deref().expect("deref of non-pointer").clone()),
            (PlaceTy::Ty(Ty::Adt(id)), ProjElem::Field(i)) => PlaceTy::Ty(lift(adts.field_ty(id, None, *i))),
            (PlaceTy::Ty(Ty::Adt(id)), ProjElem::Downcast(v)) => PlaceTy::Variant(id, *v),
            (PlaceTy::Variant(id, v), ProjElem::Field(i)) => PlaceTy::Ty(lift(adts.field_ty(id, Some(v), *i))),
            (c, e) => panic!("ill-typed projection {:?} on {:?}", e, c),
        };
    }
    cur
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RirModule {
    pub adts: AdtTable,
    pub functions: Vec<RirFunction>,
}

impl RirModule {
    pub fn function(&self, name: &str) -> Option<&RirFunction> {
        self.functions.iter().find(|f| f.name == name)
    }
}
