//! Reference interpreter for elaborated RustIR over a structured memory.
//!
//! Values are trees; heap cells live in an allocation ledger and
//! references are symbolic paths re-resolved on every access, so a path
//! into freed memory or a dead local traps when it is used. Moving a value
//! leaves the source bits in place, as compiled code would, which makes a
//! second drop of a moved box a `DoubleFree` rather than a silent no-op.

use std::fmt;

use serde::Serialize;

use crate::ir::*;
use crate::syntax::ast::BinOp;
use crate::types::Ty;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Root {
    Local { frame: u32, local: u32 },
    Heap(u32),
}

/// A projection step inside a resolved location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Step {
    Field(u32),
    Variant(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SValue {
    Unit,
    Bool(bool),
    I32(i32),
    BoxRef(u32),
    Ref(Root, Vec<Step>),
    Struct(Vec<SValue>),
    Enum(u32, Vec<SValue>),
    Uninit,
}

impl fmt::Display for SValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, vs: &[SValue]| -> fmt::Result {
            for (i, v) in vs.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{}", v)?;
            }
            Ok(())
        };
        match self {
            SValue::Unit => f.write_str("()"),
            SValue::Bool(b) => write!(f, "{}", b),
            SValue::I32(i) => write!(f, "{}", i),
            SValue::BoxRef(id) => write!(f, "box#{}", id),
            SValue::Ref(root, path) => {
                match root {
                    Root::Local { frame, local } => write!(f, "&f{}._{}", frame, local)?,
                    Root::Heap(id) => write!(f, "&#{}", id)?,
                }
                for s in path {
                    match s {
                        Step::Field(i) => write!(f, ".{}", i)?,
                        Step::Variant(v) => write!(f, "@{}", v)?,
                    }
                }
                Ok(())
            }
            SValue::Struct(vs) => {
                f.write_str("{")?;
                list(f, vs)?;
                f.write_str("}")
            }
            SValue::Enum(v, vs) => {
                write!(f, "#{}(", v)?;
                list(f, vs)?;
                f.write_str(")")
            }
            SValue::Uninit => f.write_str("uninit"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum TrapKind {
    UseAfterFree,
    DoubleFree,
    DanglingDeref,
    UninitRead,
    DivByZero,
    StackOverflow,
}

impl TrapKind {
    /// Everything except arithmetic faults is a memory error.
    pub fn is_memory_error(self) -> bool {
        !matches!(self, TrapKind::DivByZero | TrapKind::StackOverflow)
    }
}

impl fmt::Display for TrapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trap {
    pub kind: TrapKind,
    pub function: String,
    pub node: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Returned(SValue),
    Trap(Trap),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Returned(v) => write!(f, "{}", v),
            Outcome::Trap(t) => write!(f, "trap: {} at bb{}", t.kind, t.node),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Call(String),
    Return(String),
    Alloc {
        id: u32,
        func: String,
        node: NodeId,
    },
    Free {
        id: u32,
        func: String,
        node: NodeId,
    },
    Assign {
        func: String,
        node: NodeId,
        place: String,
        value: String,
    },
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Call(n) => write!(f, "call {}", n),
            Event::Return(n) => write!(f, "return {}", n),
            Event::Alloc { id, func, node } => write!(f, "{} bb{}: alloc #{}", func, node, id),
            Event::Free { id, func, node } => write!(f, "{} bb{}: free #{}", func, node, id),
            Event::Assign {
                func,
                node,
                place,
                value,
            } => write!(f, "{} bb{}: {} = {}", func, node, place, value),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub events: Vec<Event>,
}

impl Trace {
    pub fn allocs(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, Event::Alloc { .. })).count()
    }

    pub fn frees(&self) -> usize {
        self.events.iter().filter(|e| matches!(e, Event::Free { .. })).count()
    }

    /// Frees per allocation id, indexed by id.
    pub fn frees_per_alloc(&self) -> Vec<usize> {
        let mut out = vec![0; self.allocs()];
        for e in &self.events {
            if let Event::Free { id, .. } = e {
                out[*id as usize] += 1;
            }
        }
        out
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.events {
            writeln!(f, "{}", e)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Cell {
    live: bool,
    value: SValue,
}

/// Allocation ledger: ids are handed out in order and never reused.
#[derive(Debug, Clone, Default)]
pub struct AllocLedger {
    cells: Vec<Cell>,
}

impl AllocLedger {
    pub fn live_count(&self) -> usize {
        self.cells.iter().filter(|c| c.live).count()
    }

    pub fn total(&self) -> usize {
        self.cells.len()
    }
}

struct Frame {
    id: u32,
    func: usize,
    /// `None` once storage is dead.
    locals: Vec<Option<SValue>>,
    pc: NodeId,
    /// Caller's destination, call node and continuation.
    ret_to: Option<(Place, NodeId, NodeId)>,
}

#[derive(Debug, Clone, Copy)]
pub struct Config {
    pub max_depth: usize,
    /// Record `Assign` events in the trace.
    pub trace_assigns: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            max_depth: 512,
            trace_assigns: true,
        }
    }
}

pub struct Interpreter<'m> {
    module: &'m RirModule,
    config: Config,
    frames: Vec<Frame>,
    next_frame: u32,
    pub ledger: AllocLedger,
    pub trace: Trace,
}

type Res<T> = Result<T, TrapKind>;

/// A resolved location: root plus field and variant steps.
type Loc = (Root, Vec<Step>);

fn walk<'v>(mut v: &'v SValue, path: &[Step]) -> Res<&'v SValue> {
    for s in path {
        v = match (v, s) {
            (SValue::Struct(fs), Step::Field(i)) => &fs[*i as usize],
            (SValue::Enum(_, fs), Step::Field(i)) => &fs[*i as usize],
            (SValue::Enum(var, _), Step::Variant(w)) if var == w => v,
            (SValue::Uninit, _) => return Err(TrapKind::UninitRead),
            _ => return Err(TrapKind::DanglingDeref),
        };
    }
    Ok(v)
}

fn walk_mut<'v>(mut v: &'v mut SValue, path: &[Step]) -> Res<&'v mut SValue> {
    for s in path {
        v = match (v, s) {
            (SValue::Struct(fs), Step::Field(i)) => &mut fs[*i as usize],
            (SValue::Enum(_, fs), Step::Field(i)) => &mut fs[*i as usize],
            (v @ SValue::Enum(..), Step::Variant(w)) => {
                if !matches!(v, SValue::Enum(var, _) if var == w) {
                    return Err(TrapKind::DanglingDeref);
                }
                v
            }
            (SValue::Uninit, _) => return Err(TrapKind::UninitRead),
            _ => return Err(TrapKind::DanglingDeref),
        };
    }
    Ok(v)
}

impl<'m> Interpreter<'m> {
    pub fn new(module: &'m RirModule, config: Config) -> Self {
        Interpreter {
            module,
            config,
            frames: vec![],
            next_frame: 0,
            ledger: AllocLedger::default(),
            trace: Trace::default(),
        }
    }

    fn frame(&self) -> &Frame {
        self.frames.last().expect("active frame")
    }

    fn func(&self) -> &'m RirFunction {
        &self.module.functions[self.frame().func]
    }

    fn root_value(&self, root: Root) -> Res<&SValue> {
        match root {
            Root::Local { frame, local } => {
                let f = self
                    .frames
                    .iter()
                    .find(|f| f.id == frame)
                    .ok_or(TrapKind::DanglingDeref)?;
                f.locals[local as usize].as_ref().ok_or(TrapKind::DanglingDeref)
            }
            Root::Heap(id) => {
                let c = &self.ledger.cells[id as usize];
                if c.live {
                    Ok(&c.value)
                } else {
                    Err(TrapKind::UseAfterFree)
                }
            }
        }
    }

    fn root_value_mut(&mut self, root: Root, revive: bool) -> Res<&mut SValue> {
        match root {
            Root::Local { frame, local } => {
                let f = self
                    .frames
                    .iter_mut()
                    .find(|f| f.id == frame)
                    .ok_or(TrapKind::DanglingDeref)?;
                let slot = &mut f.locals[local as usize];
                if slot.is_none() && revive {
                    *slot = Some(SValue::Uninit);
                }
                slot.as_mut().ok_or(TrapKind::DanglingDeref)
            }
            Root::Heap(id) => {
                let c = &mut self.ledger.cells[id as usize];
                if c.live {
                    Ok(&mut c.value)
                } else {
                    Err(TrapKind::UseAfterFree)
                }
            }
        }
    }

    fn load(&self, loc: &Loc) -> Res<&SValue> {
        walk(self.root_value(loc.0)?, &loc.1)
    }

    fn resolve(&self, p: &Place) -> Res<Loc> {
        let mut loc: Loc = (
            Root::Local {
                frame: self.frame().id,
                local: p.local.0,
            },
            vec![],
        );
        for e in &p.proj {
            match e {
                ProjElem::Field(i) => loc.1.push(Step::Field(*i)),
                ProjElem::Downcast(v) => loc.1.push(Step::Variant(*v)),
                ProjElem::Deref => {
                    loc = match self.load(&loc)? {
                        SValue::BoxRef(id) => {
                            if !self.ledger.cells[*id as usize].live {
                                return Err(TrapKind::UseAfterFree);
                            }
                            (Root::Heap(*id), vec![])
                        }
                        SValue::Ref(root, path) => (*root, path.clone()),
                        SValue::Uninit => return Err(TrapKind::UninitRead),
                        _ => return Err(TrapKind::DanglingDeref),
                    }
                }
            }
        }
        Ok(loc)
    }

    fn read(&self, p: &Place) -> Res<SValue> {
        let v = self.load(&self.resolve(p)?)?;
        if *v == SValue::Uninit {
            return Err(TrapKind::UninitRead);
        }
        Ok(v.clone())
    }

    fn write(&mut self, p: &Place, v: SValue) -> Res<()> {
        let loc = self.resolve(p)?;
        let revive = p.proj.is_empty();
        let slot = walk_mut(self.root_value_mut(loc.0, revive)?, &loc.1)?;
        *slot = v;
        Ok(())
    }

    fn operand(&self, o: &Operand) -> Res<SValue> {
        match o {
            Operand::Copy(p) | Operand::Move(p) => self.read(p),
            Operand::Const(Constant::Unit) => Ok(SValue::Unit),
            Operand::Const(Constant::Bool(b)) => Ok(SValue::Bool(*b)),
            Operand::Const(Constant::I32(i)) => Ok(SValue::I32(*i)),
        }
    }

    fn binop(op: BinOp, a: SValue, b: SValue) -> Res<SValue> {
        use SValue::*;
        Ok(match (op, a, b) {
            (BinOp::Add, I32(x), I32(y)) => I32(x.wrapping_add(y)),
            (BinOp::Sub, I32(x), I32(y)) => I32(x.wrapping_sub(y)),
            (BinOp::Mul, I32(x), I32(y)) => I32(x.wrapping_mul(y)),
            (BinOp::Div | BinOp::Rem, I32(_), I32(0)) => return Err(TrapKind::DivByZero),
            (BinOp::Div, I32(x), I32(y)) => I32(x.wrapping_div(y)),
            (BinOp::Rem, I32(x), I32(y)) => I32(x.wrapping_rem(y)),
            (BinOp::Eq, x, y) => Bool(x == y),
            (BinOp::Ne, x, y) => Bool(x != y),
            (BinOp::Lt, I32(x), I32(y)) => Bool(x < y),
            (BinOp::Le, I32(x), I32(y)) => Bool(x <= y),
            (BinOp::Gt, I32(x), I32(y)) => Bool(x > y),
            (BinOp::Ge, I32(x), I32(y)) => Bool(x >= y),
            (op, a, b) => panic!("ill-typed operands {:?} {} {}", op, a, b),
        })
    }

    fn alloc(&mut self, value: SValue, node: NodeId) -> SValue {
        let id = self.ledger.cells.len() as u32;
        self.ledger.cells.push(Cell { live: true, value });
        self.trace.events.push(Event::Alloc {
            id,
            func: self.func().name.clone(),
            node,
        });
        SValue::BoxRef(id)
    }

    /// Drop glue: contents first, then the allocation itself; fields in
    /// declaration order.
    fn drop_value(&mut self, v: &SValue, node: NodeId) -> Res<()> {
        match v {
            SValue::BoxRef(id) => {
                let cell = &self.ledger.cells[*id as usize];
                if !cell.live {
                    return Err(TrapKind::DoubleFree);
                }
                let inner = cell.value.clone();
                self.drop_value(&inner, node)?;
                self.ledger.cells[*id as usize].live = false;
                self.trace.events.push(Event::Free {
                    id: *id,
                    func: self.func().name.clone(),
                    node,
                });
                Ok(())
            }
            SValue::Struct(fs) | SValue::Enum(_, fs) => {
                for f in fs {
                    self.drop_value(f, node)?;
                }
                Ok(())
            }
            SValue::Uninit => Err(TrapKind::UninitRead),
            _ => Ok(()),
        }
    }

    fn drop_place(&mut self, p: &Place, node: NodeId) -> Res<()> {
        let v = self.load(&self.resolve(p)?)?.clone();
        self.drop_value(&v, node)
    }

    /// Box allocations consumed by the moves of `instr`: moving out of
    /// `*b` takes the contents and frees the shell. Innermost first.
    fn consumed_shells(&self, instr: &Instr) -> Res<Vec<u32>> {
        let mut out = vec![];
        for o in instr.operands() {
            let Operand::Move(p) = o else { continue };
            for (i, e) in p.proj.iter().enumerate() {
                if *e == ProjElem::Deref {
                    if let SValue::BoxRef(id) = self.load(&self.resolve(&p.truncated(i))?)? {
                        out.push(*id);
                    }
                }
            }
        }
        out.reverse();
        Ok(out)
    }

    /// Free allocations without running drop glue on their contents.
    fn free_shells(&mut self, ids: &[u32], node: NodeId) -> Res<()> {
        for &id in ids {
            let cell = &mut self.ledger.cells[id as usize];
            if !cell.live {
                return Err(TrapKind::DoubleFree);
            }
            cell.live = false;
            self.trace.events.push(Event::Free {
                id,
                func: self.func().name.clone(),
                node,
            });
        }
        Ok(())
    }

    fn trap(&self, kind: TrapKind, node: NodeId) -> Trap {
        Trap {
            kind,
            function: self.func().name.clone(),
            node,
        }
    }

    fn push_frame(
        &mut self,
        fi: usize,
        args: Vec<SValue>,
        ret_to: Option<(Place, NodeId, NodeId)>,
    ) -> Result<(), Trap> {
        let f = &self.module.functions[fi];
        if self.frames.len() >= self.config.max_depth {
            return Err(Trap {
                kind: TrapKind::StackOverflow,
                function: f.name.clone(),
                node: 0,
            });
        }
        let mut locals = vec![Some(SValue::Uninit); f.locals.len()];
        for (i, a) in args.into_iter().enumerate() {
            locals[i + 1] = Some(a);
        }
        self.frames.push(Frame {
            id: self.next_frame,
            func: fi,
            locals,
            pc: RirFunction::ENTRY,
            ret_to,
        });
        self.next_frame += 1;
        self.trace.events.push(Event::Call(f.name.clone()));
        Ok(())
    }

    /// Run function `fi` to completion with an explicit frame stack.
    fn run(&mut self, fi: usize, args: Vec<SValue>) -> Result<SValue, Trap> {
        self.push_frame(fi, args, None)?;
        loop {
            let n = self.frame().pc;
            match self.step(n) {
                Ok(Flow::Next(next)) => self.frames.last_mut().expect("active frame").pc = next,
                Ok(Flow::Call(callee, args, dest, next)) => self.push_frame(callee, args, Some((dest, n, next)))?,
                Ok(Flow::Return) => {
                    let f = self.func();
                    let v = if f.sig.ret == Ty::Unit {
                        SValue::Unit
                    } else {
                        self.read(&Place::local(Local::RETURN)).map_err(|k| self.trap(k, n))?
                    };
                    self.trace.events.push(Event::Return(f.name.clone()));
                    let frame = self.frames.pop().expect("active frame");
                    match frame.ret_to {
                        None => return Ok(v),
                        Some((dest, call_node, next)) => {
                            self.write(&dest, v).map_err(|k| self.trap(k, call_node))?;
                            self.assign_event(call_node, &dest);
                            self.frames.last_mut().expect("caller frame").pc = next;
                        }
                    }
                }
                Err(k) => return Err(self.trap(k, n)),
            }
        }
    }

    fn assign_event(&mut self, node: NodeId, p: &Place) {
        if !self.config.trace_assigns {
            return;
        }
        let f = self.func();
        let value = match self.resolve(p).and_then(|l| self.load(&l).cloned()) {
            Ok(v) => v.to_string(),
            Err(_) => "?".into(),
        };
        let place = PlaceDisplay {
            adts: &self.module.adts,
            func: f,
            place: p,
        }
        .to_string();
        self.trace.events.push(Event::Assign {
            func: f.name.clone(),
            node,
            place,
            value,
        });
    }

    fn step(&mut self, n: NodeId) -> Res<Flow> {
        let f = self.func();
        let shells = self.consumed_shells(&f.nodes[n].instr)?;
        match &f.nodes[n].instr {
            Instr::Assign { place, rvalue, next } => {
                let v = match rvalue {
                    Rvalue::Use(o) => self.operand(o)?,
                    Rvalue::Ref(_, _, q) => {
                        let (root, path) = self.resolve(q)?;
                        // validate the borrowed location now as well
                        self.load(&(root, path.clone()))?;
                        SValue::Ref(root, path)
                    }
                    Rvalue::BinaryOp(op, a, b) => {
                        let (a, b) = (self.operand(a)?, self.operand(b)?);
                        Self::binop(*op, a, b)?
                    }
                    Rvalue::Box(o) => {
                        let v = self.operand(o)?;
                        self.alloc(v, n)
                    }
                    Rvalue::Aggregate(id, variant, ops) => {
                        let vs = ops.iter().map(|o| self.operand(o)).collect::<Res<Vec<_>>>()?;
                        let _ = id;
                        match variant {
                            Some(v) => SValue::Enum(*v, vs),
                            None => SValue::Struct(vs),
                        }
                    }
                };
                self.write(place, v)?;
                self.assign_event(n, place);
                self.free_shells(&shells, n)?;
                Ok(Flow::Next(*next))
            }
            Instr::StorageDead { local, next } => {
                let frame = self.frames.last_mut().expect("active frame");
                frame.locals[local.index()] = None;
                Ok(Flow::Next(*next))
            }
            Instr::Drop { place, next } => {
                self.drop_place(place, n)?;
                Ok(Flow::Next(*next))
            }
            Instr::ConditionalDrop { place, flag, next } => {
                if self.read(&Place::local(*flag))? == SValue::Bool(true) {
                    self.drop_place(place, n)?;
                }
                Ok(Flow::Next(*next))
            }
            Instr::Nop { next } => Ok(Flow::Next(*next)),
            Instr::Goto { target } => Ok(Flow::Next(*target)),
            Instr::If { cond, then_, else_ } => match self.operand(cond)? {
                SValue::Bool(true) => Ok(Flow::Next(*then_)),
                SValue::Bool(false) => Ok(Flow::Next(*else_)),
                v => panic!("non-boolean condition {}", v),
            },
            Instr::Switch { place, targets } => match self.read(place)? {
                SValue::Enum(v, _) => Ok(Flow::Next(targets[v as usize])),
                v => panic!("switch on non-enum {}", v),
            },
            Instr::Call {
                dest, func, args, next, ..
            } => {
                let vs = args.iter().map(|o| self.operand(o)).collect::<Res<Vec<_>>>()?;
                self.free_shells(&shells, n)?;
                Ok(Flow::Call(func.index as usize, vs, dest.clone(), *next))
            }
            Instr::Return => Ok(Flow::Return),
        }
    }
}

enum Flow {
    Next(NodeId),
    Call(usize, Vec<SValue>, Place, NodeId),
    Return,
}

/// The result of a whole-program run.
#[derive(Debug, Clone)]
pub struct Run {
    pub outcome: Outcome,
    pub trace: Trace,
    /// Allocations still live when the run ended.
    pub leaked: usize,
}

pub fn eval(module: &RirModule, entry: &str, args: Vec<SValue>, config: Config) -> Run {
    let fi = module
        .functions
        .iter()
        .position(|f| f.name == entry)
        .unwrap_or_else(|| panic!("no function `{}`", entry));
    let mut it = Interpreter::new(module, config);
    let outcome = match it.run(fi, args) {
        Ok(v) => Outcome::Returned(v),
        Err(t) => Outcome::Trap(t),
    };
    Run {
        outcome,
        leaked: it.ledger.live_count(),
        trace: it.trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diag::Span;
    use crate::dropelab::elaborate_module;
    use crate::lower::lower;
    use crate::syntax::{parse, typecheck};

    fn run(src: &str) -> Run {
        let m = elaborate_module(&lower(&typecheck(parse(src).unwrap()).unwrap())).unwrap();
        eval(&m, "main", vec![], Config::default())
    }

    #[test]
    fn returns_constant() {
        assert_eq!(
            run("fn main() -> i32 { return 7; }").outcome,
            Outcome::Returned(SValue::I32(7))
        );
    }

    #[test]
    fn box_is_freed_once() {
        let r = run("fn main() -> i32 { let b = Box::new(3); return *b; }");
        assert_eq!(r.outcome, Outcome::Returned(SValue::I32(3)));
        assert_eq!((r.trace.allocs(), r.trace.frees(), r.leaked), (1, 1, 0));
        let kinds: Vec<bool> = r
            .trace
            .events
            .iter()
            .filter_map(|e| match e {
                Event::Alloc { .. } => Some(true),
                Event::Free { .. } => Some(false),
                _ => None,
            })
            .collect();
        assert_eq!(kinds, [true, false]);
    }

    /// Moving out of `*bb` takes the inner box and frees the outer shell.
    #[test]
    fn consuming_move_frees_the_shell() {
        let r = run("fn main() -> i32 { let bb = Box::new(Box::new(6)); let inner = *bb; return *inner; }");
        assert_eq!(r.outcome, Outcome::Returned(SValue::I32(6)));
        assert_eq!(r.leaked, 0);
        assert_eq!(r.trace.frees_per_alloc(), vec![1, 1]);
    }

    #[test]
    fn division_by_zero_traps() {
        let r = run("fn main() -> i32 { let z = 0; return 1 / z; }");
        assert!(matches!(
            r.outcome,
            Outcome::Trap(Trap {
                kind: TrapKind::DivByZero,
                ..
            })
        ));
    }

    #[test]
    fn wrapping_arithmetic() {
        let r = run("fn main() -> i32 { let x = 2147483647; return x + 1; }");
        assert_eq!(r.outcome, Outcome::Returned(SValue::I32(i32::MIN)));
    }

    #[test]
    fn deep_recursion_overflows() {
        let r = run("fn f(n: i32) -> i32 { return f(n + 1); } fn main() -> i32 { return f(0); }");
        assert!(matches!(
            r.outcome,
            Outcome::Trap(Trap {
                kind: TrapKind::StackOverflow,
                ..
            })
        ));
    }

    /// Hand-built IR that frees a box and then reads through it.
    #[test]
    fn read_after_free_traps() {
        let span = Span::default();
        let b = Local(1);
        let decl = |ty, kind| LocalDecl {
            ty,
            kind,
            name: None,
            span,
        };
        let nodes = vec![
            Instr::Assign {
                place: Place::local(b),
                rvalue: Rvalue::Box(Operand::Const(Constant::I32(5))),
                next: 1,
            },
            Instr::Drop {
                place: Place::local(b),
                next: 2,
            },
            Instr::Assign {
                place: Place::local(Local::RETURN),
                rvalue: Rvalue::Use(Operand::Copy(Place::local(b).deref())),
                next: 3,
            },
            Instr::Return,
        ];
        let f = RirFunction {
            name: "main".into(),
            span,
            sig: FnRegionSig {
                universals: 0,
                universal_names: vec![],
                params: vec![],
                ret: Ty::I32,
                outlives: vec![],
            },
            locals: vec![
                decl(Ty::I32, LocalKind::Return),
                decl(Ty::Box(Box::new(Ty::I32)), LocalKind::User),
            ],
            param_count: 0,
            nodes: nodes.into_iter().map(|instr| Node { instr, span }).collect(),
            num_regions: 0,
        };
        let m = RirModule {
            adts: Default::default(),
            functions: vec![f],
        };
        let r = eval(&m, "main", vec![], Config::default());
        assert_eq!(
            r.outcome,
            Outcome::Trap(Trap {
                kind: TrapKind::UseAfterFree,
                function: "main".into(),
                node: 2
            })
        );
    }

    #[test]
    fn runs_are_deterministic() {
        let src = "enum O { S(Box<i32>), N }
                   fn main() -> i32 { let o = O::S(Box::new(4)); match o { O::S(b) => { return *b; } O::N => { return 0; } } }";
        let (a, b) = (run(src), run(src));
        assert_eq!(a.trace.to_string(), b.trace.to_string());
        assert_eq!(a.outcome, Outcome::Returned(SValue::I32(4)));
        assert_eq!(a.leaked, 0);
    }
}
