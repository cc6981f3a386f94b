//! Canonical pretty-printer. `parse(print(m))` is structurally equal to `m`
//! up to spans and expression ids.

use std::fmt::Write;

use super::ast::*;
use crate::types::Mutability;

pub fn print_module(m: &RlModule) -> String {
    let mut p = Printer::default();
    for (i, item) in m.items.iter().enumerate() {
        if i > 0 {
            p.out.push('\n');
        }
        p.item(item);
    }
    p.out
}

pub fn print_type(t: &RlType) -> String {
    let mut s = String::new();
    write_type(&mut s, t);
    s
}

pub fn print_expr(e: &RlExpr) -> String {
    let mut p = Printer::default();
    p.expr(e, 0);
    p.out
}

fn write_type(s: &mut String, t: &RlType) {
    match t {
        RlType::Unit => s.push_str("()"),
        RlType::Bool => s.push_str("bool"),
        RlType::I32 => s.push_str("i32"),
        RlType::Box(inner) => {
            s.push_str("Box<");
            write_type(s, inner);
            s.push('>');
        }
        RlType::Ref(r, m, inner) => {
            s.push('&');
            if let RegionAnnot::Named(n) = r {
                let _ = write!(s, "'{} ", n);
            }
            if m.is_mut() {
                s.push_str("mut ");
            }
            if matches!(**inner, RlType::Ref(..)) && *r == RegionAnnot::Elided && !m.is_mut() {
                s.push(' ');
            }
            write_type(s, inner);
        }
        RlType::Adt(n) => s.push_str(n),
    }
}

#[derive(Default)]
struct Printer {
    out: String,
    indent: usize,
}

impl Printer {
    fn line_start(&mut self) {
        for _ in 0..self.indent {
            self.out.push_str("    ");
        }
    }

    fn item(&mut self, item: &RlItem) {
        match item {
            RlItem::Struct(s) => {
                let _ = write!(self.out, "struct {}", s.name.name);
                match &s.fields {
                    StructFields::Unit => self.out.push_str(";\n"),
                    StructFields::Tuple(tys) => {
                        self.out.push('(');
                        for (i, t) in tys.iter().enumerate() {
                            if i > 0 {
                                self.out.push_str(", ");
                            }
                            write_type(&mut self.out, t);
                        }
                        self.out.push_str(");\n");
                    }
                    StructFields::Named(fs) => {
                        self.out.push_str(" {\n");
                        for (n, t) in fs {
                            let _ = write!(self.out, "    {}: ", n.name);
                            write_type(&mut self.out, t);
                            self.out.push_str(",\n");
                        }
                        self.out.push_str("}\n");
                    }
                }
            }
            RlItem::Enum(e) => {
                let _ = writeln!(self.out, "enum {} {{", e.name.name);
                for v in &e.variants {
                    let _ = write!(self.out, "    {}", v.name.name);
                    if v.parens {
                        self.out.push('(');
                        for (i, t) in v.fields.iter().enumerate() {
                            if i > 0 {
                                self.out.push_str(", ");
                            }
                            write_type(&mut self.out, t);
                        }
                        self.out.push(')');
                    }
                    self.out.push_str(",\n");
                }
                self.out.push_str("}\n");
            }
            RlItem::Fn(f) => {
                let _ = write!(self.out, "fn {}", f.name.name);
                if !f.lifetimes.is_empty() {
                    self.out.push('<');
                    for (i, lt) in f.lifetimes.iter().enumerate() {
                        if i > 0 {
                            self.out.push_str(", ");
                        }
                        let _ = write!(self.out, "'{}", lt.name.name);
                        for (j, o) in lt.outlives.iter().enumerate() {
                            self.out.push_str(if j == 0 { ": " } else { " + " });
                            let _ = write!(self.out, "'{}", o.name);
                        }
                    }
                    self.out.push('>');
                }
                self.out.push('(');
                for (i, p) in f.params.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(", ");
                    }
                    if p.mutable {
                        self.out.push_str("mut ");
                    }
                    let _ = write!(self.out, "{}: ", p.name.name);
                    write_type(&mut self.out, &p.ty);
                }
                self.out.push(')');
                if let Some(r) = &f.ret {
                    self.out.push_str(" -> ");
                    write_type(&mut self.out, r);
                }
                self.out.push(' ');
                self.block(&f.body);
                self.out.push('\n');
            }
        }
    }

    fn block(&mut self, b: &Block) {
        if b.stmts.is_empty() && b.tail.is_none() {
            self.out.push_str("{}");
            return;
        }
        self.out.push_str("{\n");
        self.indent += 1;
        for s in &b.stmts {
            self.line_start();
            self.stmt(s);
            self.out.push('\n');
        }
        if let Some(t) = &b.tail {
            self.line_start();
            self.expr(t, 0);
            self.out.push('\n');
        }
        self.indent -= 1;
        self.line_start();
        self.out.push('}');
    }

    fn stmt(&mut self, s: &RlStmt) {
        match &s.kind {
            StmtKind::Let {
                mutable,
                name,
                ty,
                init,
            } => {
                self.out.push_str("let ");
                if *mutable {
                    self.out.push_str("mut ");
                }
                self.out.push_str(&name.name);
                if let Some(t) = ty {
                    self.out.push_str(": ");
                    write_type(&mut self.out, t);
                }
                if let Some(e) = init {
                    self.out.push_str(" = ");
                    self.expr(e, 0);
                }
                self.out.push(';');
            }
            StmtKind::Assign { place, value } => {
                self.expr(place, 0);
                self.out.push_str(" = ");
                self.expr(value, 0);
                self.out.push(';');
            }
            StmtKind::Expr(e) => {
                self.expr(e, 0);
                self.out.push(';');
            }
            StmtKind::If { .. } => self.if_stmt(s),
            StmtKind::While { cond, body } => {
                self.out.push_str("while ");
                self.cond_expr(cond);
                self.out.push(' ');
                self.block(body);
            }
            StmtKind::Match { scrutinee, arms } => {
                self.out.push_str("match ");
                self.cond_expr(scrutinee);
                self.out.push_str(" {\n");
                self.indent += 1;
                for arm in arms {
                    self.line_start();
                    self.pattern(&arm.pattern);
                    self.out.push_str(" => ");
                    match &arm.body {
                        ArmBody::Block(b) => self.block(b),
                        ArmBody::Expr(e) => {
                            self.expr(e, 0);
                            self.out.push(',');
                        }
                    }
                    self.out.push('\n');
                }
                self.indent -= 1;
                self.line_start();
                self.out.push('}');
            }
            StmtKind::Return(e) => {
                self.out.push_str("return");
                if let Some(e) = e {
                    self.out.push(' ');
                    self.expr(e, 0);
                }
                self.out.push(';');
            }
            StmtKind::Block(b) => self.block(b),
        }
    }

    fn if_stmt(&mut self, s: &RlStmt) {
        if let StmtKind::If {
            cond,
            then_block,
            else_branch,
        } = &s.kind
        {
            self.out.push_str("if ");
            self.cond_expr(cond);
            self.out.push(' ');
            self.block(then_block);
            match else_branch {
                Some(ElseBranch::Block(b)) => {
                    self.out.push_str(" else ");
                    self.block(b);
                }
                Some(ElseBranch::If(inner)) => {
                    self.out.push_str(" else ");
                    self.if_stmt(inner);
                }
                None => {}
            }
        }
    }

    /// Struct literals are not allowed bare in condition position.
    fn cond_expr(&mut self, e: &RlExpr) {
        self.expr(e, 0);
    }

    fn pattern(&mut self, p: &Pattern) {
        match p {
            Pattern::Wild => self.out.push('_'),
            Pattern::Variant {
                enum_name,
                variant,
                fields,
            } => {
                let _ = write!(self.out, "{}::{}", enum_name.name, variant.name);
                if let Some(fs) = fields {
                    self.out.push('(');
                    for (i, sp) in fs.iter().enumerate() {
                        if i > 0 {
                            self.out.push_str(", ");
                        }
                        match sp {
                            SubPattern::Wild => self.out.push('_'),
                            SubPattern::Bind { by_ref, mutable, name } => {
                                match by_ref {
                                    Some(Mutability::Shared) => self.out.push_str("ref "),
                                    Some(Mutability::Mut) => self.out.push_str("ref mut "),
                                    None => {}
                                }
                                if *mutable {
                                    self.out.push_str("mut ");
                                }
                                self.out.push_str(&name.name);
                            }
                        }
                    }
                    self.out.push(')');
                }
            }
        }
    }

    /// `min_prec` is the binding power required by the context; a binary
    /// expression of lower precedence is parenthesized.
    fn expr(&mut self, e: &RlExpr, min_prec: u8) {
        match &e.kind {
            ExprKind::Int(n) => {
                let _ = write!(self.out, "{}", n);
            }
            ExprKind::Bool(b) => {
                let _ = write!(self.out, "{}", b);
            }
            ExprKind::Unit => self.out.push_str("()"),
            ExprKind::Var(n) => self.out.push_str(n),
            ExprKind::Path(a, b) => {
                let _ = write!(self.out, "{}::{}", a.name, b.name);
            }
            ExprKind::Field(base, f) => {
                self.postfix_operand(base);
                match f {
                    FieldName::Named(n) => {
                        let _ = write!(self.out, ".{}", n);
                    }
                    FieldName::Index(i) => {
                        let _ = write!(self.out, ".{}", i);
                    }
                }
            }
            ExprKind::Deref(inner) => {
                self.out.push('*');
                self.unary_operand(inner);
            }
            ExprKind::Ref(m, inner) => {
                self.out.push('&');
                if m.is_mut() {
                    self.out.push_str("mut ");
                } else if matches!(inner.kind, ExprKind::Ref(..)) {
                    self.out.push(' ');
                }
                self.unary_operand(inner);
            }
            ExprKind::BoxNew(inner) => {
                self.out.push_str("Box::new(");
                self.expr(inner, 0);
                self.out.push(')');
            }
            ExprKind::Unary(op, inner) => {
                self.out.push(match op {
                    UnOp::Neg => '-',
                    UnOp::Not => '!',
                });
                self.unary_operand(inner);
            }
            ExprKind::Binary(op, l, r) => {
                let prec = op.precedence();
                let wrap = prec <= min_prec;
                if wrap {
                    self.out.push('(');
                }
                self.expr(l, prec - 1);
                let _ = write!(self.out, " {} ", op.symbol());
                self.expr(r, prec);
                if wrap {
                    self.out.push(')');
                }
            }
            ExprKind::Call(callee, args) => {
                match callee {
                    Callee::Name(n) => self.out.push_str(&n.name),
                    Callee::Variant(a, b) => {
                        let _ = write!(self.out, "{}::{}", a.name, b.name);
                    }
                }
                self.out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        self.out.push_str(", ");
                    }
                    self.expr(a, 0);
                }
                self.out.push(')');
            }
            ExprKind::StructLit(n, fields) => {
                let _ = write!(self.out, "{} {{", n.name);
                for (i, (f, v)) in fields.iter().enumerate() {
                    self.out.push_str(if i == 0 { " " } else { ", " });
                    let _ = write!(self.out, "{}: ", f.name);
                    self.expr(v, 0);
                }
                self.out.push_str(if fields.is_empty() { "}" } else { " }" });
            }
            ExprKind::Paren(inner) => {
                self.out.push('(');
                self.expr(inner, 0);
                self.out.push(')');
            }
        }
    }

    fn unary_operand(&mut self, e: &RlExpr) {
        if matches!(e.kind, ExprKind::Binary(..)) {
            self.out.push('(');
            self.expr(e, 0);
            self.out.push(')');
        } else {
            self.expr(e, 0);
        }
    }

    fn postfix_operand(&mut self, e: &RlExpr) {
        if matches!(
            e.kind,
            ExprKind::Binary(..) | ExprKind::Unary(..) | ExprKind::Deref(_) | ExprKind::Ref(..)
        ) {
            self.out.push('(');
            self.expr(e, 0);
            self.out.push(')');
        } else {
            self.expr(e, 0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse;
    use super::*;

    fn roundtrip(src: &str) {
        let mut a = parse(src).unwrap();
        let printed = print_module(&a);
        let mut b = parse(&printed).unwrap_or_else(|e| panic!("{:?}\n{}", e, printed));
        a.strip_spans();
        b.strip_spans();
        assert_eq!(a, b, "{}", printed);
        assert_eq!(print_module(&b), printed);
    }

    #[test]
    fn roundtrips() {
        roundtrip("fn main() {}");
        roundtrip("struct P { x: i32, y: Box<i32> } struct T(i32, bool); struct U;");
        roundtrip("enum E { A(i32, Box<E>), B, C() }");
        roundtrip("fn f<'a, 'b: 'a>(x: &'a mut &'b i32, y: && i32) -> &'a i32 { return *x; }");
        roundtrip(
            "fn g(mut x: i32) -> i32 { let mut y: i32 = -(x + 1) * 2; while y < 10 && !false { y = y + 1; } if y == 3 { return 1; } else if y > 4 { return 2; } else { x = 0; } { let z = &mut y; *z = (*z).max; } y }",
        );
        roundtrip(
            "enum O { S(Box<i32>), N } fn h(o: O) { match o { O::S(ref mut b) => { **b = 1; } O::N => f(1, &&2), _ => {} } let p = P { a: 1 }; p.a = Box::new(3); }",
        );
    }

    #[test]
    fn type_printing() {
        let m = parse("fn f(x: &'a mut Box<&i32>) {}").unwrap();
        let f = m.functions().next().unwrap();
        assert_eq!(print_type(&f.params[0].ty), "&'a mut Box<&i32>");
    }
}
