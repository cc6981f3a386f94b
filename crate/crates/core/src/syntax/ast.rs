//! Surface syntax of Rustlight.

use crate::diag::Span;
use crate::types::Mutability;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExprId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegionAnnot {
    /// `'a`, only legal in function signatures.
    Named(String),
    Elided,
}

/// A written type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RlType {
    Unit,
    Bool,
    I32,
    Box(Box<RlType>),
    Ref(RegionAnnot, Mutability, Box<RlType>),
    Adt(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RlModule {
    pub items: Vec<RlItem>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RlItem {
    Struct(StructDecl),
    Enum(EnumDecl),
    Fn(FnDecl),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StructFields {
    Named(Vec<(Ident, RlType)>),
    Tuple(Vec<RlType>),
    Unit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructDecl {
    pub name: Ident,
    pub fields: StructFields,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariantDecl {
    pub name: Ident,
    pub fields: Vec<RlType>,
    /// `V()` vs `V`; kept so printing round-trips.
    pub parens: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumDecl {
    pub name: Ident,
    pub variants: Vec<VariantDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LifetimeParam {
    pub name: Ident,
    /// `'a: 'b + 'c` lists `b` and `c`.
    pub outlives: Vec<Ident>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub mutable: bool,
    pub name: Ident,
    pub ty: RlType,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FnDecl {
    pub name: Ident,
    pub lifetimes: Vec<LifetimeParam>,
    pub params: Vec<Param>,
    pub ret: Option<RlType>,
    pub body: Block,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub stmts: Vec<RlStmt>,
    pub tail: Option<Box<RlExpr>>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RlStmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Let {
        mutable: bool,
        name: Ident,
        ty: Option<RlType>,
        init: Option<RlExpr>,
    },
    Assign {
        place: RlExpr,
        value: RlExpr,
    },
    Expr(RlExpr),
    If {
        cond: RlExpr,
        then_block: Block,
        else_branch: Option<ElseBranch>,
    },
    While {
        cond: RlExpr,
        body: Block,
    },
    Match {
        scrutinee: RlExpr,
        arms: Vec<Arm>,
    },
    Return(Option<RlExpr>),
    Block(Block),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElseBranch {
    Block(Block),
    If(Box<RlStmt>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arm {
    pub pattern: Pattern,
    pub body: ArmBody,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArmBody {
    Block(Block),
    Expr(RlExpr),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pattern {
    Wild,
    Variant {
        enum_name: Ident,
        variant: Ident,
        /// `None` for a unit variant pattern `E::V`.
        fields: Option<Vec<SubPattern>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SubPattern {
    Wild,
    Bind {
        /// `ref` / `ref mut`
        by_ref: Option<Mutability>,
        mutable: bool,
        name: Ident,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    /// Binding power; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 5,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldName {
    Named(String),
    Index(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Callee {
    /// A function or tuple-struct constructor.
    Name(Ident),
    /// `Enum::Variant(..)`
    Variant(Ident, Ident),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RlExpr {
    pub id: ExprId,
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Int(u64),
    Bool(bool),
    Unit,
    Var(String),
    /// `Enum::Variant` without payload.
    Path(Ident, Ident),
    Field(Box<RlExpr>, FieldName),
    Deref(Box<RlExpr>),
    Ref(Mutability, Box<RlExpr>),
    BoxNew(Box<RlExpr>),
    Unary(UnOp, Box<RlExpr>),
    Binary(BinOp, Box<RlExpr>, Box<RlExpr>),
    Call(Callee, Vec<RlExpr>),
    StructLit(Ident, Vec<(Ident, RlExpr)>),
    Paren(Box<RlExpr>),
}

impl RlExpr {
    /// Place expressions name memory: variables, fields and dereferences.
    pub fn is_place(&self) -> bool {
        match &self.kind {
            ExprKind::Var(_) | ExprKind::Deref(_) => true,
            ExprKind::Field(base, _) => base.is_place(),
            ExprKind::Paren(inner) => inner.is_place(),
            _ => false,
        }
    }
}

impl RlModule {
    pub fn functions(&self) -> impl Iterator<Item = &FnDecl> {
        self.items.iter().filter_map(|i| match i {
            RlItem::Fn(f) => Some(f),
            _ => None,
        })
    }

    /// Zero every span, so modules parsed from different texts compare
    /// structurally.
    pub fn strip_spans(&mut self) {
        let mut z = SpanZero;
        for item in &mut self.items {
            z.item(item);
        }
    }
}

struct SpanZero;

impl SpanZero {
    fn ident(&mut self, i: &mut Ident) {
        i.span = Span::default();
    }

    fn item(&mut self, item: &mut RlItem) {
        match item {
            RlItem::Struct(s) => {
                self.ident(&mut s.name);
                if let StructFields::Named(fs) = &mut s.fields {
                    for (n, _) in fs {
                        self.ident(n);
                    }
                }
            }
            RlItem::Enum(e) => {
                self.ident(&mut e.name);
                for v in &mut e.variants {
                    self.ident(&mut v.name);
                }
            }
            RlItem::Fn(f) => {
                self.ident(&mut f.name);
                for lt in &mut f.lifetimes {
                    self.ident(&mut lt.name);
                    for o in &mut lt.outlives {
                        self.ident(o);
                    }
                }
                for p in &mut f.params {
                    self.ident(&mut p.name);
                }
                self.block(&mut f.body);
            }
        }
    }

    fn block(&mut self, b: &mut Block) {
        b.span = Span::default();
        for s in &mut b.stmts {
            self.stmt(s);
        }
        if let Some(t) = &mut b.tail {
            self.expr(t);
        }
    }

    fn stmt(&mut self, s: &mut RlStmt) {
        s.span = Span::default();
        match &mut s.kind {
            StmtKind::Let { name, init, .. } => {
                self.ident(name);
                if let Some(e) = init {
                    self.expr(e);
                }
            }
            StmtKind::Assign { place, value } => {
                self.expr(place);
                self.expr(value);
            }
            StmtKind::Expr(e) => self.expr(e),
            StmtKind::If {
                cond,
                then_block,
                else_branch,
            } => {
                self.expr(cond);
                self.block(then_block);
                match else_branch {
                    Some(ElseBranch::Block(b)) => self.block(b),
                    Some(ElseBranch::If(s)) => self.stmt(s),
                    None => {}
                }
            }
            StmtKind::While { cond, body } => {
                self.expr(cond);
                self.block(body);
            }
            StmtKind::Match { scrutinee, arms } => {
                self.expr(scrutinee);
                for arm in arms {
                    arm.span = Span::default();
                    if let Pattern::Variant {
                        enum_name,
                        variant,
                        fields,
                    } = &mut arm.pattern
                    {
                        self.ident(enum_name);
                        self.ident(variant);
                        for sp in fields.iter_mut().flatten() {
                            if let SubPattern::Bind { name, .. } = sp {
                                self.ident(name);
                            }
                        }
                    }
                    match &mut arm.body {
                        ArmBody::Block(b) => self.block(b),
                        ArmBody::Expr(e) => self.expr(e),
                    }
                }
            }
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    self.expr(e);
                }
            }
            StmtKind::Block(b) => self.block(b),
        }
    }

    fn expr(&mut self, e: &mut RlExpr) {
        e.span = Span::default();
        match &mut e.kind {
            ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::Unit | ExprKind::Var(_) => {}
            ExprKind::Path(a, b) => {
                self.ident(a);
                self.ident(b);
            }
            ExprKind::Field(b, _)
            | ExprKind::Deref(b)
            | ExprKind::Ref(_, b)
            | ExprKind::BoxNew(b)
            | ExprKind::Unary(_, b)
            | ExprKind::Paren(b) => self.expr(b),
            ExprKind::Binary(_, l, r) => {
                self.expr(l);
                self.expr(r);
            }
            ExprKind::Call(callee, args) => {
                match callee {
                    Callee::Name(n) => self.ident(n),
                    Callee::Variant(a, b) => {
                        self.ident(a);
                        self.ident(b);
                    }
                }
                for a in args {
                    self.expr(a);
                }
            }
            ExprKind::StructLit(n, fields) => {
                self.ident(n);
                for (f, v) in fields {
                    self.ident(f);
                    self.expr(v);
                }
            }
        }
    }
}
