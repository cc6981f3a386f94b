//! Recursive-descent parser for Rustlight.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use crate::diag::{Diagnostic, ErrorCode, Span};
use crate::types::Mutability;

pub fn parse(source: &str) -> Result<RlModule, Vec<Diagnostic>> {
    let tokens = tokenize(source).map_err(|d| vec![d])?;
    let mut p = Parser {
        tokens,
        pos: 0,
        next_id: 0,
    };
    p.module().map_err(|d| vec![d])
}

type PResult<T> = Result<T, Diagnostic>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    next_id: u32,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(Diagnostic::new(
            ErrorCode::SyntaxError,
            self.span(),
            format!("expected {}, found {}", expected, self.peek()),
        ))
    }

    fn expect(&mut self, tok: Tok) -> PResult<Token> {
        if *self.peek() == tok {
            Ok(self.bump())
        } else {
            self.error(&tok.to_string())
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().span;
                Ok(Ident { name, span })
            }
            _ => self.error("identifier"),
        }
    }

    fn fresh_id(&mut self) -> ExprId {
        let id = ExprId(self.next_id);
        self.next_id += 1;
        id
    }

    fn mk(&mut self, kind: ExprKind, span: Span) -> RlExpr {
        RlExpr {
            id: self.fresh_id(),
            kind,
            span,
        }
    }

    fn module(&mut self) -> PResult<RlModule> {
        let mut items = Vec::new();
        while *self.peek() != Tok::Eof {
            items.push(self.item()?);
        }
        Ok(RlModule { items })
    }

    fn item(&mut self) -> PResult<RlItem> {
        match self.peek() {
            Tok::Struct => self.struct_decl().map(RlItem::Struct),
            Tok::Enum => self.enum_decl().map(RlItem::Enum),
            Tok::Fn => self.fn_decl().map(RlItem::Fn),
            _ => self.error("`struct`, `enum` or `fn`"),
        }
    }

    fn struct_decl(&mut self) -> PResult<StructDecl> {
        self.expect(Tok::Struct)?;
        let name = self.ident()?;
        let fields = match self.peek() {
            Tok::Semi => {
                self.bump();
                StructFields::Unit
            }
            Tok::LParen => {
                self.bump();
                let tys = self.comma_list(Tok::RParen, |p| p.ty())?;
                self.expect(Tok::Semi)?;
                StructFields::Tuple(tys)
            }
            Tok::LBrace => {
                self.bump();
                let fs = self.comma_list(Tok::RBrace, |p| {
                    let n = p.ident()?;
                    p.expect(Tok::Colon)?;
                    Ok((n, p.ty()?))
                })?;
                StructFields::Named(fs)
            }
            _ => return self.error("`{`, `(` or `;`"),
        };
        Ok(StructDecl { name, fields })
    }

    fn enum_decl(&mut self) -> PResult<EnumDecl> {
        self.expect(Tok::Enum)?;
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let variants = self.comma_list(Tok::RBrace, |p| {
            let name = p.ident()?;
            if p.eat(&Tok::LParen) {
                let fields = p.comma_list(Tok::RParen, |p| p.ty())?;
                Ok(VariantDecl {
                    name,
                    fields,
                    parens: true,
                })
            } else {
                Ok(VariantDecl {
                    name,
                    fields: vec![],
                    parens: false,
                })
            }
        })?;
        Ok(EnumDecl { name, variants })
    }

    /// Parses `elem, elem, ...` up to and including `close`; trailing comma allowed.
    fn comma_list<T>(&mut self, close: Tok, mut elem: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        let mut out = Vec::new();
        loop {
            if self.eat(&close) {
                return Ok(out);
            }
            out.push(elem(self)?);
            if !self.eat(&Tok::Comma) {
                self.expect(close)?;
                return Ok(out);
            }
        }
    }

    fn fn_decl(&mut self) -> PResult<FnDecl> {
        self.expect(Tok::Fn)?;
        let name = self.ident()?;
        let mut lifetimes = Vec::new();
        if self.eat(&Tok::Lt) {
            lifetimes = self.comma_list(Tok::Gt, |p| {
                let name = p.lifetime()?;
                let mut outlives = Vec::new();
                if p.eat(&Tok::Colon) {
                    outlives.push(p.lifetime()?);
                    while p.eat(&Tok::Plus) {
                        outlives.push(p.lifetime()?);
                    }
                }
                Ok(LifetimeParam { name, outlives })
            })?;
        }
        self.expect(Tok::LParen)?;
        let params = self.comma_list(Tok::RParen, |p| {
            let mutable = p.eat(&Tok::Mut);
            let name = p.ident()?;
            p.expect(Tok::Colon)?;
            let ty = p.ty()?;
            Ok(Param { mutable, name, ty })
        })?;
        let ret = if self.eat(&Tok::Arrow) { Some(self.ty()?) } else { None };
        let body = self.block()?;
        Ok(FnDecl {
            name,
            lifetimes,
            params,
            ret,
            body,
        })
    }

    fn lifetime(&mut self) -> PResult<Ident> {
        match self.peek().clone() {
            Tok::Lifetime(name) => {
                let span = self.bump().span;
                Ok(Ident { name, span })
            }
            _ => self.error("lifetime"),
        }
    }

    fn ty(&mut self) -> PResult<RlType> {
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                self.expect(Tok::RParen)?;
                Ok(RlType::Unit)
            }
            Tok::Amp => {
                self.bump();
                self.ref_ty()
            }
            Tok::AmpAmp => {
                // `&&T` is two reference constructors
                self.bump();
                let inner = self.ref_ty()?;
                Ok(RlType::Ref(RegionAnnot::Elided, Mutability::Shared, Box::new(inner)))
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "i32" => Ok(RlType::I32),
                    "bool" => Ok(RlType::Bool),
                    "Box" => {
                        self.expect(Tok::Lt)?;
                        let inner = self.ty()?;
                        self.expect(Tok::Gt)?;
                        Ok(RlType::Box(Box::new(inner)))
                    }
                    _ => Ok(RlType::Adt(name)),
                }
            }
            _ => self.error("type"),
        }
    }

    /// The part of a reference type after `&`.
    fn ref_ty(&mut self) -> PResult<RlType> {
        let region = match self.peek().clone() {
            Tok::Lifetime(l) => {
                self.bump();
                RegionAnnot::Named(l)
            }
            _ => RegionAnnot::Elided,
        };
        let m = if self.eat(&Tok::Mut) {
            Mutability::Mut
        } else {
            Mutability::Shared
        };
        let inner = self.ty()?;
        Ok(RlType::Ref(region, m, Box::new(inner)))
    }

    fn block(&mut self) -> PResult<Block> {
        let span = self.expect(Tok::LBrace)?.span;
        let mut stmts = Vec::new();
        let mut tail = None;
        loop {
            match self.peek() {
                Tok::RBrace => {
                    self.bump();
                    break;
                }
                Tok::Semi => {
                    self.bump();
                }
                Tok::Eof => return self.error("`}`"),
                _ => match self.stmt()? {
                    StmtOrTail::Stmt(s) => stmts.push(s),
                    StmtOrTail::Tail(e) => {
                        tail = Some(Box::new(e));
                        self.expect(Tok::RBrace)?;
                        break;
                    }
                },
            }
        }
        Ok(Block { stmts, tail, span })
    }

    fn stmt(&mut self) -> PResult<StmtOrTail> {
        let span = self.span();
        let kind = match self.peek() {
            Tok::Let => {
                self.bump();
                let mutable = self.eat(&Tok::Mut);
                let name = self.ident()?;
                let ty = if self.eat(&Tok::Colon) { Some(self.ty()?) } else { None };
                let init = if self.eat(&Tok::Eq) {
                    Some(self.expr(false)?)
                } else {
                    None
                };
                self.expect(Tok::Semi)?;
                StmtKind::Let {
                    mutable,
                    name,
                    ty,
                    init,
                }
            }
            Tok::If => return self.if_stmt().map(StmtOrTail::Stmt),
            Tok::While => {
                self.bump();
                let cond = self.expr(true)?;
                let body = self.block()?;
                StmtKind::While { cond, body }
            }
            Tok::Match => {
                self.bump();
                let scrutinee = self.expr(true)?;
                self.expect(Tok::LBrace)?;
                let mut arms = Vec::new();
                while !self.eat(&Tok::RBrace) {
                    arms.push(self.arm()?);
                }
                StmtKind::Match { scrutinee, arms }
            }
            Tok::Return => {
                self.bump();
                let value = if *self.peek() == Tok::Semi {
                    None
                } else {
                    Some(self.expr(false)?)
                };
                self.expect(Tok::Semi)?;
                StmtKind::Return(value)
            }
            Tok::LBrace => StmtKind::Block(self.block()?),
            _ => {
                let e = self.expr(false)?;
                if self.eat(&Tok::Eq) {
                    let value = self.expr(false)?;
                    self.expect(Tok::Semi)?;
                    StmtKind::Assign { place: e, value }
                } else if self.eat(&Tok::Semi) {
                    StmtKind::Expr(e)
                } else if *self.peek() == Tok::RBrace {
                    return Ok(StmtOrTail::Tail(e));
                } else {
                    return self.error("`;`, `=` or `}`");
                }
            }
        };
        Ok(StmtOrTail::Stmt(RlStmt { kind, span }))
    }

    fn if_stmt(&mut self) -> PResult<RlStmt> {
        let span = self.expect(Tok::If)?.span;
        let cond = self.expr(true)?;
        let then_block = self.block()?;
        let else_branch = if self.eat(&Tok::Else) {
            if *self.peek() == Tok::If {
                Some(ElseBranch::If(Box::new(self.if_stmt()?)))
            } else {
                Some(ElseBranch::Block(self.block()?))
            }
        } else {
            None
        };
        Ok(RlStmt {
            kind: StmtKind::If {
                cond,
                then_block,
                else_branch,
            },
            span,
        })
    }

    fn arm(&mut self) -> PResult<Arm> {
        let span = self.span();
        let pattern = if self.eat(&Tok::Underscore) {
            Pattern::Wild
        } else {
            let enum_name = self.ident()?;
            self.expect(Tok::ColonColon)?;
            let variant = self.ident()?;
            let fields = if self.eat(&Tok::LParen) {
                Some(self.comma_list(Tok::RParen, |p| p.sub_pattern())?)
            } else {
                None
            };
            Pattern::Variant {
                enum_name,
                variant,
                fields,
            }
        };
        self.expect(Tok::FatArrow)?;
        let body = if *self.peek() == Tok::LBrace {
            let b = self.block()?;
            self.eat(&Tok::Comma);
            ArmBody::Block(b)
        } else {
            let e = self.expr(false)?;
            if *self.peek() != Tok::RBrace {
                self.expect(Tok::Comma)?;
            }
            ArmBody::Expr(e)
        };
        Ok(Arm { pattern, body, span })
    }

    fn sub_pattern(&mut self) -> PResult<SubPattern> {
        if self.eat(&Tok::Underscore) {
            return Ok(SubPattern::Wild);
        }
        let by_ref = if self.eat(&Tok::Ref) {
            if self.eat(&Tok::Mut) {
                Some(Mutability::Mut)
            } else {
                Some(Mutability::Shared)
            }
        } else {
            None
        };
        let mutable = by_ref.is_none() && self.eat(&Tok::Mut);
        let name = self.ident()?;
        Ok(SubPattern::Bind { by_ref, mutable, name })
    }

    /// `no_struct` forbids struct literals at the top level, as in `if`
    /// conditions and `match` scrutinees.
    fn expr(&mut self, no_struct: bool) -> PResult<RlExpr> {
        self.binary(0, no_struct)
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            Tok::Percent => BinOp::Rem,
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            Tok::AmpAmp => BinOp::And,
            Tok::PipePipe => BinOp::Or,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8, no_struct: bool) -> PResult<RlExpr> {
        let mut lhs = self.unary(no_struct)?;
        while let Some(op) = self.binop() {
            let prec = op.precedence();
            if prec <= min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary(prec, no_struct)?;
            let span = lhs.span;
            lhs = self.mk(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn unary(&mut self, no_struct: bool) -> PResult<RlExpr> {
        let span = self.span();
        match self.peek() {
            Tok::Minus => {
                self.bump();
                let e = self.unary(no_struct)?;
                Ok(self.mk(ExprKind::Unary(UnOp::Neg, Box::new(e)), span))
            }
            Tok::Bang => {
                self.bump();
                let e = self.unary(no_struct)?;
                Ok(self.mk(ExprKind::Unary(UnOp::Not, Box::new(e)), span))
            }
            Tok::Star => {
                self.bump();
                let e = self.unary(no_struct)?;
                Ok(self.mk(ExprKind::Deref(Box::new(e)), span))
            }
            Tok::Amp => {
                self.bump();
                let m = if self.eat(&Tok::Mut) {
                    Mutability::Mut
                } else {
                    Mutability::Shared
                };
                let e = self.unary(no_struct)?;
                Ok(self.mk(ExprKind::Ref(m, Box::new(e)), span))
            }
            Tok::AmpAmp => {
                self.bump();
                let m = if self.eat(&Tok::Mut) {
                    Mutability::Mut
                } else {
                    Mutability::Shared
                };
                let e = self.unary(no_struct)?;
                let inner_span = Span::new(span.line, span.col + 1);
                let inner = self.mk(ExprKind::Ref(m, Box::new(e)), inner_span);
                Ok(self.mk(ExprKind::Ref(Mutability::Shared, Box::new(inner)), span))
            }
            _ => self.postfix(no_struct),
        }
    }

    fn postfix(&mut self, no_struct: bool) -> PResult<RlExpr> {
        let mut e = self.primary(no_struct)?;
        while self.eat(&Tok::Dot) {
            let span = e.span;
            let field = match self.peek().clone() {
                Tok::Ident(n) => {
                    self.bump();
                    FieldName::Named(n)
                }
                Tok::Int(n) if n <= u32::MAX as u64 => {
                    self.bump();
                    FieldName::Index(n as u32)
                }
                _ => return self.error("field name"),
            };
            e = self.mk(ExprKind::Field(Box::new(e), field), span);
        }
        Ok(e)
    }

    fn primary(&mut self, no_struct: bool) -> PResult<RlExpr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(self.mk(ExprKind::Int(n), span))
            }
            Tok::True => {
                self.bump();
                Ok(self.mk(ExprKind::Bool(true), span))
            }
            Tok::False => {
                self.bump();
                Ok(self.mk(ExprKind::Bool(false), span))
            }
            Tok::LParen => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    return Ok(self.mk(ExprKind::Unit, span));
                }
                let inner = self.expr(false)?;
                self.expect(Tok::RParen)?;
                Ok(self.mk(ExprKind::Paren(Box::new(inner)), span))
            }
            Tok::Ident(_) => {
                let first = self.ident()?;
                if *self.peek() == Tok::ColonColon {
                    self.bump();
                    let second = self.ident()?;
                    if first.name == "Box" && second.name == "new" {
                        self.expect(Tok::LParen)?;
                        let arg = self.expr(false)?;
                        self.eat(&Tok::Comma);
                        self.expect(Tok::RParen)?;
                        return Ok(self.mk(ExprKind::BoxNew(Box::new(arg)), span));
                    }
                    if self.eat(&Tok::LParen) {
                        let args = self.comma_list(Tok::RParen, |p| p.expr(false))?;
                        return Ok(self.mk(ExprKind::Call(Callee::Variant(first, second), args), span));
                    }
                    return Ok(self.mk(ExprKind::Path(first, second), span));
                }
                if self.eat(&Tok::LParen) {
                    let args = self.comma_list(Tok::RParen, |p| p.expr(false))?;
                    return Ok(self.mk(ExprKind::Call(Callee::Name(first), args), span));
                }
                if !no_struct && *self.peek() == Tok::LBrace && self.looks_like_struct_lit() {
                    self.bump();
                    let fields = self.comma_list(Tok::RBrace, |p| {
                        let f = p.ident()?;
                        p.expect(Tok::Colon)?;
                        Ok((f, p.expr(false)?))
                    })?;
                    return Ok(self.mk(ExprKind::StructLit(first, fields), span));
                }
                Ok(self.mk(ExprKind::Var(first.name), span))
            }
            _ => self.error("expression"),
        }
    }

    /// After `Name`, with `{` current: `Name { }` or `Name { ident: ...`.
    fn looks_like_struct_lit(&self) -> bool {
        matches!(
            (self.peek_at(1), self.peek_at(2)),
            (Tok::RBrace, _) | (Tok::Ident(_), Tok::Colon)
        )
    }
}

enum StmtOrTail {
    Stmt(RlStmt),
    Tail(RlExpr),
}
