//! C99 code generation from elaborated RustIR.
//!
//! Structs become C structs, enums tagged unions, boxes heap pointers and
//! references plain pointers. Every type with a drop obligation gets a
//! `drop_<mangle>` glue function. User functions are `fn_<name>` and ADTs
//! `ty_<Name>`, keeping them apart from the `rl_` runtime helpers. Each
//! node becomes a labeled statement ending in an explicit `goto`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::ir::*;
use crate::syntax::ast::BinOp;
use crate::types::{AdtId, AdtKind, AdtTable, Mutability, SynTy, Ty};

/// Exit status of a compiled program that divides by zero.
pub const TRAP_EXIT: i32 = 101;

/// Injective name for a region-erased type: `box_i32`, `ref_mut_3Node`.
/// ADT names are length-prefixed so they cannot collide with the builtin
/// spellings.
pub fn mangle(adts: &AdtTable, ty: &SynTy) -> String {
    match ty {
        Ty::Unit => "unit".into(),
        Ty::Bool => "bool".into(),
        Ty::I32 => "i32".into(),
        Ty::Box(t) => format!("box_{}", mangle(adts, t)),
        Ty::Ref(_, Mutability::Shared, t) => format!("ref_{}", mangle(adts, t)),
        Ty::Ref(_, Mutability::Mut, t) => format!("ref_mut_{}", mangle(adts, t)),
        Ty::Adt(id) => {
            let n = &adts.get(*id).name;
            format!("{}{}", n.len(), n)
        }
    }
}

fn adt_cname(adts: &AdtTable, id: AdtId) -> String {
    format!("ty_{}", adts.get(id).name)
}

fn cty<R: Clone>(adts: &AdtTable, ty: &Ty<R>) -> String {
    match ty {
        Ty::Unit => "rl_unit".into(),
        Ty::Bool => "bool".into(),
        Ty::I32 => "int32_t".into(),
        Ty::Box(t) | Ty::Ref(_, _, t) => format!("{}*", cty(adts, t)),
        Ty::Adt(id) => adt_cname(adts, *id),
    }
}

const PRELUDE: &str = r#"#include <stdbool.h>
#include <stdint.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

typedef uint8_t rl_unit;

static inline int32_t rl_add(int32_t a, int32_t b) { return (int32_t)((uint32_t)a + (uint32_t)b); }
static inline int32_t rl_sub(int32_t a, int32_t b) { return (int32_t)((uint32_t)a - (uint32_t)b); }
static inline int32_t rl_mul(int32_t a, int32_t b) { return (int32_t)((uint32_t)a * (uint32_t)b); }
static inline int32_t rl_div(int32_t a, int32_t b) {
    if (b == 0) exit(RL_TRAP_EXIT);
    if (a == INT32_MIN && b == -1) return INT32_MIN;
    return a / b;
}
static inline int32_t rl_rem(int32_t a, int32_t b) {
    if (b == 0) exit(RL_TRAP_EXIT);
    if (a == INT32_MIN && b == -1) return 0;
    return a % b;
}
static inline void *rl_alloc(size_t n) {
    void *p = malloc(n);
    if (p == NULL) abort();
    return p;
}
"#;

/// ADTs in an order where every by-value field type comes first.
fn adt_order(adts: &AdtTable) -> Vec<AdtId> {
    fn visit(adts: &AdtTable, id: AdtId, done: &mut Vec<AdtId>, active: &mut Vec<AdtId>) {
        if done.contains(&id) || active.contains(&id) {
            return;
        }
        active.push(id);
        let def = adts.get(id);
        let tys: Vec<&SynTy> = match &def.kind {
            AdtKind::Struct { fields, .. } => fields.iter().map(|f| &f.ty).collect(),
            AdtKind::Enum { variants } => variants.iter().flat_map(|v| v.fields.iter()).collect(),
        };
        for t in tys {
            if let Ty::Adt(inner) = t {
                visit(adts, *inner, done, active);
            }
        }
        active.pop();
        done.push(id);
    }
    let mut done = vec![];
    for id in adts.ids() {
        visit(adts, id, &mut done, &mut vec![]);
    }
    done
}

fn emit_types(adts: &AdtTable, out: &mut String) {
    for id in adts.ids() {
        let n = adt_cname(adts, id);
        writeln!(out, "typedef struct {} {};", n, n).unwrap();
    }
    if !adts.defs.is_empty() {
        out.push('\n');
    }
    for id in adt_order(adts) {
        let n = adt_cname(adts, id);
        writeln!(out, "struct {} {{", n).unwrap();
        match &adts.get(id).kind {
            AdtKind::Struct { fields, .. } => {
                for (i, f) in fields.iter().enumerate() {
                    writeln!(out, "    {} f{};", cty(adts, &f.ty), i).unwrap();
                }
                if fields.is_empty() {
                    out.push_str("    uint8_t rl_empty;\n");
                }
            }
            AdtKind::Enum { variants } => {
                out.push_str("    int32_t tag;\n    union {\n");
                for (v, var) in variants.iter().enumerate() {
                    out.push_str("        struct {\n");
                    for (i, t) in var.fields.iter().enumerate() {
                        writeln!(out, "            {} f{};", cty(adts, t), i).unwrap();
                    }
                    if var.fields.is_empty() {
                        out.push_str("            uint8_t rl_empty;\n");
                    }
                    writeln!(out, "        }} v{};", v).unwrap();
                }
                if variants.is_empty() {
                    out.push_str("        uint8_t rl_empty;\n");
                }
                out.push_str("    } payload;\n");
            }
        }
        out.push_str("};\n\n");
    }
}

struct Glue<'a> {
    adts: &'a AdtTable,
    /// Types needing glue, in discovery order.
    types: Vec<SynTy>,
    seen: BTreeSet<String>,
}

impl Glue<'_> {
    fn require(&mut self, ty: &SynTy) {
        if !self.adts.needs_drop(ty) || !self.seen.insert(mangle(self.adts, ty)) {
            return;
        }
        self.types.push(ty.clone());
        match ty {
            Ty::Box(t) => self.require(t),
            Ty::Adt(id) => {
                let def = self.adts.get(*id).clone();
                match def.kind {
                    AdtKind::Struct { fields, .. } => fields.iter().for_each(|f| self.require(&f.ty)),
                    AdtKind::Enum { variants } => variants
                        .iter()
                        .flat_map(|v| v.fields.iter())
                        .for_each(|t| self.require(t)),
                }
            }
            _ => {}
        }
    }

    fn emit(&self, out: &mut String) {
        let adts = self.adts;
        let sig = |t: &SynTy| format!("static void drop_{}({} *p)", mangle(adts, t), cty(adts, t));
        for t in &self.types {
            writeln!(out, "{};", sig(t)).unwrap();
        }
        if !self.types.is_empty() {
            out.push('\n');
        }
        let call = |t: &SynTy, place: &str| -> Option<String> {
            adts.needs_drop(t)
                .then(|| format!("drop_{}(&{});", mangle(adts, t), place))
        };
        for t in &self.types {
            writeln!(out, "{} {{", sig(t)).unwrap();
            match t {
                Ty::Box(inner) => {
                    if let Some(c) = call(inner, "**p") {
                        writeln!(out, "    {}", c).unwrap();
                    }
                    out.push_str("    free(*p);\n");
                }
                Ty::Adt(id) => match &adts.get(*id).kind {
                    AdtKind::Struct { fields, .. } => {
                        for (i, f) in fields.iter().enumerate() {
                            if let Some(c) = call(&f.ty, &format!("p->f{}", i)) {
                                writeln!(out, "    {}", c).unwrap();
                            }
                        }
                    }
                    AdtKind::Enum { variants } => {
                        out.push_str("    switch (p->tag) {\n");
                        for (v, var) in variants.iter().enumerate() {
                            let calls: Vec<String> = var
                                .fields
                                .iter()
                                .enumerate()
                                .filter_map(|(i, f)| call(f, &format!("p->payload.v{}.f{}", v, i)))
                                .collect();
                            if calls.is_empty() {
                                continue;
                            }
                            writeln!(out, "    case {}:", v).unwrap();
                            for c in calls {
                                writeln!(out, "        {}", c).unwrap();
                            }
                            out.push_str("        break;\n");
                        }
                        out.push_str("    default:\n        break;\n    }\n");
                    }
                },
                _ => unreachable!("only boxes and ADTs need drop glue"),
            }
            out.push_str("}\n\n");
        }
    }
}

fn fn_cname(name: &str) -> String {
    format!("fn_{}", name)
}

struct FnGen<'a> {
    adts: &'a AdtTable,
    func: &'a RirFunction,
}

impl FnGen<'_> {
    fn place(&self, p: &Place) -> String {
        let mut s = format!("_{}", p.local.0);
        let mut ty = PlaceTy::Ty(self.func.local_ty(p.local).clone());
        for e in &p.proj {
            match e {
                ProjElem::Deref => s = format!("(*{})", s),
                ProjElem::Field(k) => match &ty {
                    PlaceTy::Variant(_, v) => write!(s, ".payload.v{}.f{}", v, k).unwrap(),
                    _ => write!(s, ".f{}", k).unwrap(),
                },
                ProjElem::Downcast(_) => {}
            }
            ty = match ty {
                PlaceTy::Ty(t) => place_ty_of(self.adts, &t, &[*e]),
                PlaceTy::Variant(id, v) => PlaceTy::Ty(match e {
                    ProjElem::Field(k) => lift(self.adts.field_ty(id, Some(v), *k)),
                    _ => unreachable!("only fields follow a downcast"),
                }),
            };
        }
        s
    }

    fn operand(&self, o: &Operand) -> String {
        match o {
            Operand::Copy(p) | Operand::Move(p) => self.place(p),
            Operand::Const(Constant::Unit) => "0".into(),
            Operand::Const(Constant::Bool(b)) => b.to_string(),
            Operand::Const(Constant::I32(i)) if *i == i32::MIN => "INT32_MIN".into(),
            Operand::Const(Constant::I32(i)) => i.to_string(),
        }
    }

    fn ty(&self, p: &Place) -> RTy {
        self.func.place_ty(self.adts, p)
    }

    fn assign(&self, place: &Place, rv: &Rvalue) -> String {
        let dst = self.place(place);
        match rv {
            Rvalue::Use(o) => format!("{} = {};", dst, self.operand(o)),
            Rvalue::Ref(_, _, q) => format!("{} = &{};", dst, self.place(q)),
            Rvalue::BinaryOp(op, a, b) => {
                let (a, b) = (self.operand(a), self.operand(b));
                let e = match op {
                    BinOp::Add => format!("rl_add({}, {})", a, b),
                    BinOp::Sub => format!("rl_sub({}, {})", a, b),
                    BinOp::Mul => format!("rl_mul({}, {})", a, b),
                    BinOp::Div => format!("rl_div({}, {})", a, b),
                    BinOp::Rem => format!("rl_rem({}, {})", a, b),
                    BinOp::And | BinOp::Or => unreachable!("short-circuit operators lower to branches"),
                    cmp => format!("({} {} {})", a, cmp.symbol(), b),
                };
                format!("{} = {};", dst, e)
            }
            Rvalue::Box(o) => {
                let inner = match self.ty(place) {
                    Ty::Box(t) => cty(self.adts, &t),
                    t => panic!("box rvalue into {:?}", t),
                };
                format!(
                    "{{ {} *rl_tmp = ({} *)rl_alloc(sizeof({})); *rl_tmp = {}; {} = rl_tmp; }}",
                    inner,
                    inner,
                    inner,
                    self.operand(o),
                    dst
                )
            }
            Rvalue::Aggregate(id, variant, ops) => {
                let n = adt_cname(self.adts, *id);
                let mut s = format!("{{ {} rl_tmp; memset(&rl_tmp, 0, sizeof rl_tmp);", n);
                match variant {
                    Some(v) => {
                        write!(s, " rl_tmp.tag = {};", v).unwrap();
                        for (i, o) in ops.iter().enumerate() {
                            write!(s, " rl_tmp.payload.v{}.f{} = {};", v, i, self.operand(o)).unwrap();
                        }
                    }
                    None => {
                        for (i, o) in ops.iter().enumerate() {
                            write!(s, " rl_tmp.f{} = {};", i, self.operand(o)).unwrap();
                        }
                    }
                }
                write!(s, " {} = rl_tmp; }}", dst).unwrap();
                s
            }
        }
    }

    /// Box pointers a statement's moves consume: moving out of `*b` takes
    /// the contents and frees the shell. Outermost first.
    fn consumed_shells(&self, instr: &Instr) -> Vec<String> {
        let mut out = vec![];
        for o in instr.operands() {
            let Operand::Move(p) = o else { continue };
            for (i, e) in p.proj.iter().enumerate() {
                let base = p.truncated(i);
                if *e == ProjElem::Deref && self.ty(&base).is_box() {
                    out.push(self.place(&base));
                }
            }
        }
        out
    }

    /// Wrap `stmt` so the shells are captured before it runs and freed,
    /// innermost first, after.
    fn with_shells(&self, instr: &Instr, stmt: String) -> String {
        let shells = self.consumed_shells(instr);
        if shells.is_empty() {
            return stmt;
        }
        let mut s = String::from("{");
        for (i, e) in shells.iter().enumerate() {
            write!(s, " void *rl_shell{} = (void *){};", i, e).unwrap();
        }
        write!(s, " {}", stmt).unwrap();
        for i in (0..shells.len()).rev() {
            write!(s, " free(rl_shell{});", i).unwrap();
        }
        s.push_str(" }");
        s
    }

    fn drop_call(&self, p: &Place) -> String {
        let t = self.ty(p).erase();
        format!("drop_{}(&{});", mangle(self.adts, &t), self.place(p))
    }

    fn prototype(&self) -> String {
        let f = self.func;
        let params: Vec<String> = f
            .params()
            .map(|l| format!("{} _{}", cty(self.adts, f.local_ty(l)), l.0))
            .collect();
        format!(
            "{} {}({})",
            cty(self.adts, &f.sig.ret),
            fn_cname(&f.name),
            if params.is_empty() {
                "void".into()
            } else {
                params.join(", ")
            }
        )
    }

    fn emit(&self, out: &mut String) {
        let f = self.func;
        writeln!(out, "{} {{", self.prototype()).unwrap();
        for (i, d) in f.locals.iter().enumerate() {
            if i == 0 || i > f.param_count {
                writeln!(out, "    {} _{};", cty(self.adts, &d.ty), i).unwrap();
            }
        }
        for i in 0..f.locals.len() {
            if i == 0 || i > f.param_count {
                writeln!(out, "    memset(&_{}, 0, sizeof _{});", i, i).unwrap();
            } else {
                writeln!(out, "    (void)_{};", i).unwrap();
            }
        }
        let preds = f.predecessors();
        for (n, node) in f.nodes.iter().enumerate() {
            let label = if preds[n].is_empty() {
                String::new()
            } else {
                format!("bb{}: ", n)
            };
            let goto = |t: NodeId| format!("goto bb{};", t);
            let body = match &node.instr {
                Instr::Assign { place, rvalue, next } => {
                    format!(
                        "{} {}",
                        self.with_shells(&node.instr, self.assign(place, rvalue)),
                        goto(*next)
                    )
                }
                Instr::StorageDead { next, .. } | Instr::Nop { next } => goto(*next),
                Instr::Goto { target } => goto(*target),
                Instr::Drop { place, next } => format!("{} {}", self.drop_call(place), goto(*next)),
                Instr::ConditionalDrop { place, flag, next } => {
                    format!("if (_{}) {} {}", flag.0, self.drop_call(place), goto(*next))
                }
                Instr::If { cond, then_, else_ } => {
                    format!("if ({}) {} else {}", self.operand(cond), goto(*then_), goto(*else_))
                }
                Instr::Switch { place, targets } => {
                    let mut s = format!("switch ({}.tag) {{", self.place(place));
                    for (v, t) in targets.iter().enumerate() {
                        write!(s, " case {}: {}", v, goto(*t)).unwrap();
                    }
                    s.push_str(" default: abort(); }");
                    s
                }
                Instr::Call {
                    dest, func, args, next, ..
                } => {
                    let args: Vec<String> = args.iter().map(|a| self.operand(a)).collect();
                    let call = format!("{} = {}({});", self.place(dest), fn_cname(&func.name), args.join(", "));
                    format!("{} {}", self.with_shells(&node.instr, call), goto(*next))
                }
                Instr::Return => "return _0;".into(),
            };
            writeln!(out, "{}{}", label, body).unwrap();
        }
        out.push_str("}\n\n");
    }
}

/// Header comment: tool version and the SHA-256 of the source text.
pub fn header(source: &str) -> String {
    let digest = Sha256::digest(source.as_bytes());
    format!(
        "/* generated by rustlight {} */\n/* input sha256: {:x} */\n",
        env!("CARGO_PKG_VERSION"),
        digest
    )
}

/// Emit a complete C translation unit. `main` is wrapped so that the
/// process prints the returned value and exits with it (modulo 256).
pub fn emit(module: &RirModule, source: &str) -> String {
    let adts = &module.adts;
    let mut out = header(source);
    out.push('\n');
    writeln!(out, "#define RL_TRAP_EXIT {}", TRAP_EXIT).unwrap();
    out.push_str(PRELUDE);
    out.push('\n');
    emit_types(adts, &mut out);

    let mut glue = Glue {
        adts,
        types: vec![],
        seen: BTreeSet::new(),
    };
    for f in &module.functions {
        for node in &f.nodes {
            if let Instr::Drop { place, .. } | Instr::ConditionalDrop { place, .. } = &node.instr {
                glue.require(&f.place_ty(adts, place).erase());
            }
        }
    }
    glue.emit(&mut out);

    let gens: Vec<FnGen> = module.functions.iter().map(|func| FnGen { adts, func }).collect();
    for g in &gens {
        writeln!(out, "{};", g.prototype()).unwrap();
    }
    out.push('\n');
    for g in &gens {
        g.emit(&mut out);
    }
    if let Some(main) = module.function("main") {
        emit_entry(main, &mut out);
    }
    out
}

fn emit_entry(main: &RirFunction, out: &mut String) {
    let params: Vec<(Local, &RTy)> = main.params().map(|l| (l, main.local_ty(l))).collect();
    let argc_used = !params.is_empty();
    if argc_used {
        out.push_str("int main(int argc, char **argv) {\n");
    } else {
        out.push_str("int main(void) {\n");
    }
    let mut args = vec![];
    for (i, (_, ty)) in params.iter().enumerate() {
        let idx = i + 1;
        let conv = match ty {
            Ty::Bool => format!("(argc > {} && strcmp(argv[{}], \"true\") == 0)", idx, idx),
            _ => format!("(argc > {} ? (int32_t)atol(argv[{}]) : 0)", idx, idx),
        };
        args.push(conv);
    }
    let call = format!("{}({})", fn_cname("main"), args.join(", "));
    match &main.sig.ret {
        Ty::I32 => {
            writeln!(out, "    int32_t r = {};", call).unwrap();
            out.push_str("    printf(\"%d\\n\", (int)r);\n    return (int)((uint32_t)r & 255u);\n");
        }
        Ty::Bool => {
            writeln!(out, "    bool r = {};", call).unwrap();
            out.push_str("    printf(\"%s\\n\", r ? \"true\" : \"false\");\n    return r ? 1 : 0;\n");
        }
        _ => {
            writeln!(out, "    (void){};", call).unwrap();
            out.push_str("    return 0;\n");
        }
    }
    out.push_str("}\n");
}
