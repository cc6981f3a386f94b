//! Textual listing of RustIR. One line per node, `bbN: <instr>`, with
//! successors spelled out; the format is stable and golden-tested.

use std::fmt::{self, Write as _};

use super::*;
use crate::types::AdtKind;

/// Renders a place in IR syntax: `(*_1).0`, `(_2 as Some).0`.
pub struct PlaceDisplay<'a> {
    pub adts: &'a AdtTable,
    pub func: &'a RirFunction,
    pub place: &'a Place,
}

impl fmt::Display for PlaceDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = format!("_{}", self.place.local.0);
        f.write_str(&render_place(self.adts, self.func, self.place, base, false))
    }
}

/// Renders a place using source names where available (`*r`, `p.x`); used
/// in diagnostics.
pub fn describe_place(adts: &AdtTable, func: &RirFunction, place: &Place) -> String {
    let decl = &func.locals[place.local.index()];
    let base = match (&decl.kind, &decl.name) {
        (LocalKind::User | LocalKind::Param, Some(n)) => n.clone(),
        (LocalKind::Return, _) => "return value".into(),
        _ => format!("_{}", place.local.0),
    };
    render_place(adts, func, place, base, true)
}

fn render_place(adts: &AdtTable, func: &RirFunction, place: &Place, base: String, source: bool) -> String {
    let mut s = base;
    let mut ty = PlaceTy::Ty(func.local_ty(place.local).clone());
    for (i, e) in place.proj.iter().enumerate() {
        match e {
            ProjElem::Deref => {
                let parens = if source {
                    matches!(place.proj.get(i + 1), Some(ProjElem::Field(_)))
                } else {
                    i + 1 < place.proj.len()
                };
                s = if parens { format!("(*{})", s) } else { format!("*{}", s) };
            }
            ProjElem::Field(k) => {
                let name = match &ty {
                    PlaceTy::Ty(Ty::Adt(id)) if source => match &adts.get(*id).kind {
                        AdtKind::Struct { fields, .. } => fields[*k as usize].name.clone(),
                        AdtKind::Enum { .. } => k.to_string(),
                    },
                    _ => k.to_string(),
                };
                write!(s, ".{}", name).unwrap();
            }
            ProjElem::Downcast(v) => {
                let name = match &ty {
                    PlaceTy::Ty(Ty::Adt(id)) => adts.get(*id).variants()[*v as usize].name.clone(),
                    _ => format!("#{}", v),
                };
                s = format!("({} as {})", s, name);
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
    s
}

struct Printer<'a> {
    adts: &'a AdtTable,
    func: &'a RirFunction,
}

impl Printer<'_> {
    fn place(&self, p: &Place) -> String {
        render_place(self.adts, self.func, p, format!("_{}", p.local.0), false)
    }

    fn operand(&self, o: &Operand) -> String {
        match o {
            Operand::Copy(p) => format!("copy {}", self.place(p)),
            Operand::Move(p) => format!("move {}", self.place(p)),
            Operand::Const(c) => match c {
                Constant::Unit => "const ()".into(),
                Constant::Bool(b) => format!("const {}", b),
                Constant::I32(n) => format!("const {}", n),
            },
        }
    }

    fn operands(&self, ops: &[Operand]) -> String {
        ops.iter().map(|o| self.operand(o)).collect::<Vec<_>>().join(", ")
    }

    fn rvalue(&self, r: &Rvalue) -> String {
        match r {
            Rvalue::Use(o) => self.operand(o),
            Rvalue::Ref(region, m, p) => {
                let m = if m.is_mut() { "mut " } else { "" };
                format!("&'r{} {}{}", region.0, m, self.place(p))
            }
            Rvalue::BinaryOp(op, a, b) => format!("{:?}({}, {})", op, self.operand(a), self.operand(b)),
            Rvalue::Box(o) => format!("Box({})", self.operand(o)),
            Rvalue::Aggregate(id, v, ops) => {
                let def = self.adts.get(*id);
                let name = match v {
                    Some(v) => format!("{}::{}", def.name, def.variants()[*v as usize].name),
                    None => def.name.clone(),
                };
                format!("{}({})", name, self.operands(ops))
            }
        }
    }

    fn instr(&self, i: &Instr) -> String {
        match i {
            Instr::Assign { place, rvalue, next } => {
                format!("{} = {} -> bb{}", self.place(place), self.rvalue(rvalue), next)
            }
            Instr::StorageDead { local, next } => format!("StorageDead(_{}) -> bb{}", local.0, next),
            Instr::Drop { place, next } => format!("drop({}) -> bb{}", self.place(place), next),
            Instr::ConditionalDrop { place, flag, next } => {
                format!("drop({}) if _{} -> bb{}", self.place(place), flag.0, next)
            }
            Instr::Nop { next } => format!("nop -> bb{}", next),
            Instr::Goto { target } => format!("goto -> bb{}", target),
            Instr::If { cond, then_, else_ } => {
                format!("if {} -> [true: bb{}, false: bb{}]", self.operand(cond), then_, else_)
            }
            Instr::Switch { place, targets } => {
                let ty = self.func.place_ty(self.adts, place);
                let names: Vec<String> = match ty {
                    Ty::Adt(id) => self.adts.get(id).variants().iter().map(|v| v.name.clone()).collect(),
                    _ => (0..targets.len()).map(|i| i.to_string()).collect(),
                };
                let arms: Vec<String> = names
                    .iter()
                    .zip(targets)
                    .map(|(n, t)| format!("{}: bb{}", n, t))
                    .collect();
                format!("switch {} -> [{}]", self.place(place), arms.join(", "))
            }
            Instr::Call {
                dest,
                func,
                args,
                region_args,
                next,
            } => {
                let mut s = format!("{} = {}({})", self.place(dest), func.name, self.operands(args));
                if !region_args.is_empty() {
                    let rs: Vec<String> = region_args.iter().map(|r| format!("'r{}", r.0)).collect();
                    write!(s, " [{}]", rs.join(", ")).unwrap();
                }
                write!(s, " -> bb{}", next).unwrap();
                s
            }
            Instr::Return => "return".into(),
        }
    }
}

/// The node listing of one function.
pub fn dump_ir(adts: &AdtTable, func: &RirFunction) -> String {
    let p = Printer { adts, func };
    let mut out = String::new();
    for (i, n) in func.nodes.iter().enumerate() {
        writeln!(out, "bb{}: {}", i, p.instr(&n.instr)).unwrap();
    }
    out
}

fn dump_fn(adts: &AdtTable, func: &RirFunction, out: &mut String) {
    let sig = &func.sig;
    let mut header = format!("fn {}", func.name);
    if sig.universals > 0 {
        let rs: Vec<String> = (0..sig.universals).map(|r| format!("'r{}", r)).collect();
        write!(header, "<{}>", rs.join(", ")).unwrap();
    }
    let params: Vec<String> = func
        .params()
        .map(|l| format!("_{}: {}", l.0, adts.display(func.local_ty(l))))
        .collect();
    write!(header, "({}) -> {}", params.join(", "), adts.display(&sig.ret)).unwrap();
    if !sig.outlives.is_empty() {
        let ws: Vec<String> = sig
            .outlives
            .iter()
            .map(|(a, b)| format!("'r{}: 'r{}", a.0, b.0))
            .collect();
        write!(header, " where {}", ws.join(", ")).unwrap();
    }
    writeln!(out, "{} {{", header).unwrap();
    for (i, d) in func.locals.iter().enumerate() {
        let kind = match d.kind {
            LocalKind::Return => "return",
            LocalKind::Param => "param",
            LocalKind::User => "user",
            LocalKind::Temp => "temp",
            LocalKind::Flag => "flag",
        };
        let name = d.name.as_deref().map(|n| format!(" {}", n)).unwrap_or_default();
        writeln!(out, "    let _{}: {}; // {}{}", i, adts.display(&d.ty), kind, name).unwrap();
    }
    for line in dump_ir(adts, func).lines() {
        writeln!(out, "    {}", line).unwrap();
    }
    out.push_str("}\n");
}

/// Every function, with signature and local declarations.
pub fn dump_module(m: &RirModule) -> String {
    let mut out = String::new();
    for (i, f) in m.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        dump_fn(&m.adts, f, &mut out);
    }
    out
}
