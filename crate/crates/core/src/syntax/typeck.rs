//! Name resolution and type checking. The result annotates every expression
//! with its type and resolves every name, in side tables keyed by
//! [`ExprId`] (expressions) or by the declaring identifier's span
//! (bindings).

use std::collections::{HashMap, HashSet};

use super::ast::*;
use crate::diag::{Diagnostic, ErrorCode, Span};
use crate::types::{AdtDef, AdtId, AdtKind, AdtTable, CtorKind, FieldDef, Mutability, SynTy, Ty, VariantDef};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BindingId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FnId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BindingInfo {
    pub name: String,
    pub ty: SynTy,
    pub mutable: bool,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    Local(BindingId),
    UnitStruct(AdtId),
    UnitVariant(AdtId, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallTarget {
    Fn(FnId),
    TupleStruct(AdtId),
    Variant(AdtId, u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FnSig {
    pub name: String,
    pub params: Vec<SynTy>,
    pub ret: SynTy,
}

#[derive(Debug, Clone)]
pub struct TypedModule {
    pub module: RlModule,
    pub adts: AdtTable,
    /// Indexed by [`FnId`], in item order.
    pub sigs: Vec<FnSig>,
    pub expr_types: HashMap<ExprId, SynTy>,
    /// Implicit dereferences applied to the base of a field access.
    pub auto_derefs: HashMap<ExprId, u32>,
    pub field_index: HashMap<ExprId, u32>,
    pub resolutions: HashMap<ExprId, Resolution>,
    pub call_targets: HashMap<ExprId, CallTarget>,
    pub struct_lits: HashMap<ExprId, AdtId>,
    pub bindings: Vec<BindingInfo>,
    /// Declaring identifier span -> binding, for lets, params and pattern
    /// binders.
    pub binding_at: HashMap<Span, BindingId>,
}

impl TypedModule {
    pub fn fn_decls(&self) -> Vec<&FnDecl> {
        self.module.functions().collect()
    }

    pub fn ty(&self, e: &RlExpr) -> &SynTy {
        &self.expr_types[&e.id]
    }

    pub fn fn_by_name(&self, name: &str) -> Option<FnId> {
        self.sigs.iter().position(|s| s.name == name).map(|i| FnId(i as u32))
    }
}

pub fn typecheck(module: RlModule) -> Result<TypedModule, Vec<Diagnostic>> {
    let mut cx = Checker::default();
    cx.collect_adts(&module);
    cx.collect_sigs(&module);
    if cx.diags.is_empty() {
        for f in module.functions() {
            cx.check_fn(f);
        }
    }
    if !cx.diags.is_empty() {
        return Err(cx.diags);
    }
    Ok(TypedModule {
        module,
        adts: cx.adts,
        sigs: cx.sigs,
        expr_types: cx.expr_types,
        auto_derefs: cx.auto_derefs,
        field_index: cx.field_index,
        resolutions: cx.resolutions,
        call_targets: cx.call_targets,
        struct_lits: cx.struct_lits,
        bindings: cx.bindings,
        binding_at: cx.binding_at,
    })
}

#[derive(Default)]
struct Checker {
    adts: AdtTable,
    sigs: Vec<FnSig>,
    fn_names: HashMap<String, FnId>,
    expr_types: HashMap<ExprId, SynTy>,
    auto_derefs: HashMap<ExprId, u32>,
    field_index: HashMap<ExprId, u32>,
    resolutions: HashMap<ExprId, Resolution>,
    call_targets: HashMap<ExprId, CallTarget>,
    struct_lits: HashMap<ExprId, AdtId>,
    bindings: Vec<BindingInfo>,
    binding_at: HashMap<Span, BindingId>,
    /// Bindings declared without initializer may be assigned once without `mut`.
    deferred: HashSet<BindingId>,
    scopes: Vec<HashMap<String, BindingId>>,
    ret_ty: SynTy,
    diags: Vec<Diagnostic>,
}

fn err(code: ErrorCode, span: Span, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::new(code, span, msg)
}

impl Checker {
    fn error(&mut self, code: ErrorCode, span: Span, msg: impl Into<String>) {
        self.diags.push(err(code, span, msg));
    }

    fn show(&self, t: &SynTy) -> String {
        self.adts.display(t).to_string()
    }

    // ---- items ----

    fn collect_adts(&mut self, m: &RlModule) {
        let mut spans = Vec::new();
        for item in &m.items {
            let (name, kind) = match item {
                RlItem::Struct(s) => (
                    &s.name,
                    AdtKind::Struct {
                        ctor: match s.fields {
                            StructFields::Named(_) => CtorKind::Named,
                            StructFields::Tuple(_) => CtorKind::Tuple,
                            StructFields::Unit => CtorKind::Unit,
                        },
                        fields: vec![],
                    },
                ),
                RlItem::Enum(e) => (&e.name, AdtKind::Enum { variants: vec![] }),
                RlItem::Fn(_) => continue,
            };
            if self.adts.lookup(&name.name).is_some() || is_builtin_type(&name.name) {
                self.error(
                    ErrorCode::DuplicateDefinition,
                    name.span,
                    format!("type `{}` is defined more than once", name.name),
                );
                continue;
            }
            self.adts.defs.push(AdtDef {
                name: name.name.clone(),
                kind,
            });
            spans.push(name.span);
        }
        // second pass: field types, now that all names are known
        for item in &m.items {
            match item {
                RlItem::Struct(s) => {
                    let Some(id) = self.adts.lookup(&s.name.name) else {
                        continue;
                    };
                    let fields: Vec<FieldDef> = match &s.fields {
                        StructFields::Named(fs) => {
                            let mut seen = HashSet::new();
                            let mut out = vec![];
                            for (n, t) in fs {
                                if !seen.insert(n.name.clone()) {
                                    self.error(
                                        ErrorCode::DuplicateDefinition,
                                        n.span,
                                        format!("field `{}` is declared more than once", n.name),
                                    );
                                }
                                let ty = self.adt_field_ty(t, n.span);
                                out.push(FieldDef {
                                    name: n.name.clone(),
                                    ty,
                                });
                            }
                            out
                        }
                        StructFields::Tuple(ts) => ts
                            .iter()
                            .enumerate()
                            .map(|(i, t)| FieldDef {
                                name: i.to_string(),
                                ty: self.adt_field_ty(t, s.name.span),
                            })
                            .collect(),
                        StructFields::Unit => vec![],
                    };
                    if let AdtKind::Struct { fields: f, .. } = &mut self.adts.defs[id.0 as usize].kind {
                        *f = fields;
                    }
                }
                RlItem::Enum(e) => {
                    let Some(id) = self.adts.lookup(&e.name.name) else {
                        continue;
                    };
                    let mut seen = HashSet::new();
                    let mut variants = vec![];
                    for v in &e.variants {
                        if !seen.insert(v.name.name.clone()) {
                            self.error(
                                ErrorCode::DuplicateDefinition,
                                v.name.span,
                                format!("variant `{}` is declared more than once", v.name.name),
                            );
                        }
                        let fields = v.fields.iter().map(|t| self.adt_field_ty(t, v.name.span)).collect();
                        variants.push(VariantDef {
                            name: v.name.name.clone(),
                            fields,
                        });
                    }
                    if let AdtKind::Enum { variants: vs } = &mut self.adts.defs[id.0 as usize].kind {
                        *vs = variants;
                    }
                }
                RlItem::Fn(_) => {}
            }
        }
        // types must have finite size: no by-value cycles
        for (i, span) in spans.into_iter().enumerate() {
            let id = AdtId(i as u32);
            if self.contains_by_value(id, id, &mut HashSet::new()) {
                let name = self.adts.get(id).name.clone();
                self.error(
                    ErrorCode::InvalidType,
                    span,
                    format!("recursive type `{}` has infinite size; use `Box`", name),
                );
            }
        }
    }

    fn contains_by_value(&self, target: AdtId, cur: AdtId, seen: &mut HashSet<AdtId>) -> bool {
        if !seen.insert(cur) {
            return false;
        }
        let def = self.adts.get(cur);
        let tys: Vec<&SynTy> = match &def.kind {
            AdtKind::Struct { fields, .. } => fields.iter().map(|f| &f.ty).collect(),
            AdtKind::Enum { variants } => variants.iter().flat_map(|v| &v.fields).collect(),
        };
        tys.into_iter().any(|t| match t {
            Ty::Adt(inner) => *inner == target || self.contains_by_value(target, *inner, seen),
            _ => false,
        })
    }

    fn adt_field_ty(&mut self, t: &RlType, span: Span) -> SynTy {
        if contains_ref(t) {
            self.error(
                ErrorCode::InvalidType,
                span,
                "struct and enum fields cannot hold references",
            );
        }
        self.resolve_ty(t, span, None)
    }

    /// `lifetimes`: the declared lifetime parameters, or `None` in a body
    /// where named lifetimes are not allowed.
    fn resolve_ty(&mut self, t: &RlType, span: Span, lifetimes: Option<&[String]>) -> SynTy {
        match t {
            RlType::Unit => Ty::Unit,
            RlType::Bool => Ty::Bool,
            RlType::I32 => Ty::I32,
            RlType::Box(inner) => Ty::Box(Box::new(self.resolve_ty(inner, span, lifetimes))),
            RlType::Ref(region, m, inner) => {
                if let RegionAnnot::Named(n) = region {
                    match lifetimes {
                        None => self.error(
                            ErrorCode::InvalidType,
                            span,
                            format!("named lifetime `'{}` is only allowed in function signatures", n),
                        ),
                        Some(ls) if !ls.contains(n) => self.error(
                            ErrorCode::UnknownName,
                            span,
                            format!("use of undeclared lifetime `'{}`", n),
                        ),
                        _ => {}
                    }
                }
                Ty::Ref((), *m, Box::new(self.resolve_ty(inner, span, lifetimes)))
            }
            RlType::Adt(name) => match self.adts.lookup(name) {
                Some(id) => Ty::Adt(id),
                None => {
                    self.error(ErrorCode::UnknownName, span, format!("cannot find type `{}`", name));
                    Ty::Unit
                }
            },
        }
    }

    fn collect_sigs(&mut self, m: &RlModule) {
        for f in m.functions() {
            let mut lts: Vec<String> = Vec::new();
            for lt in &f.lifetimes {
                if lts.contains(&lt.name.name) {
                    self.error(
                        ErrorCode::DuplicateDefinition,
                        lt.name.span,
                        format!("lifetime `'{}` is declared more than once", lt.name.name),
                    );
                }
                lts.push(lt.name.name.clone());
            }
            for lt in &f.lifetimes {
                for o in &lt.outlives {
                    if !lts.contains(&o.name) {
                        self.error(
                            ErrorCode::UnknownName,
                            o.span,
                            format!("use of undeclared lifetime `'{}`", o.name),
                        );
                    }
                }
            }
            let params: Vec<SynTy> = f
                .params
                .iter()
                .map(|p| self.resolve_ty(&p.ty, p.name.span, Some(&lts)))
                .collect();
            let ret = match &f.ret {
                Some(t) => self.resolve_ty(t, f.name.span, Some(&lts)),
                None => Ty::Unit,
            };
            if let Some(rt) = &f.ret {
                let input_positions: usize = f.params.iter().map(|p| ref_count(&p.ty)).sum();
                if has_elided(rt) && input_positions > 1 {
                    self.error(
                        ErrorCode::MissingLifetime,
                        f.name.span,
                        "missing lifetime specifier: the return type borrows from more than one parameter",
                    );
                }
            }
            if self.fn_names.contains_key(&f.name.name) {
                self.error(
                    ErrorCode::DuplicateDefinition,
                    f.name.span,
                    format!("function `{}` is defined more than once", f.name.name),
                );
                continue;
            }
            let id = FnId(self.sigs.len() as u32);
            self.fn_names.insert(f.name.name.clone(), id);
            self.sigs.push(FnSig {
                name: f.name.name.clone(),
                params,
                ret,
            });
        }
    }

    // ---- bodies ----

    fn declare(&mut self, name: &Ident, ty: SynTy, mutable: bool) -> BindingId {
        let id = BindingId(self.bindings.len() as u32);
        self.bindings.push(BindingInfo {
            name: name.name.clone(),
            ty,
            mutable,
            span: name.span,
        });
        self.binding_at.insert(name.span, id);
        self.scopes.last_mut().expect("scope").insert(name.name.clone(), id);
        id
    }

    fn lookup(&self, name: &str) -> Option<BindingId> {
        self.scopes.iter().rev().find_map(|s| s.get(name).copied())
    }

    fn check_fn(&mut self, f: &FnDecl) {
        let id = self.fn_names[&f.name.name];
        let sig = self.sigs[id.0 as usize].clone();
        self.ret_ty = sig.ret.clone();
        self.scopes.push(HashMap::new());
        let mut seen = HashSet::new();
        for (p, ty) in f.params.iter().zip(sig.params) {
            if !seen.insert(p.name.name.clone()) {
                self.error(
                    ErrorCode::DuplicateDefinition,
                    p.name.span,
                    format!("parameter `{}` is bound more than once", p.name.name),
                );
            }
            self.declare(&p.name, ty, p.mutable);
        }
        let diverges = self.block(&f.body, true);
        if sig.ret != Ty::Unit && !diverges && f.body.tail.is_none() {
            self.error(
                ErrorCode::MissingReturn,
                f.name.span,
                format!(
                    "function `{}` may finish without returning a value of type `{}`",
                    f.name.name,
                    self.show(&sig.ret)
                ),
            );
        }
        self.scopes.pop();
    }

    /// Returns whether control never falls off the end of the block.
    fn block(&mut self, b: &Block, fn_body: bool) -> bool {
        self.scopes.push(HashMap::new());
        let mut diverges = false;
        for s in &b.stmts {
            diverges |= self.stmt(s);
        }
        if let Some(t) = &b.tail {
            let ty = self.expr(t);
            let want = if fn_body { self.ret_ty.clone() } else { Ty::Unit };
            if let Some(ty) = ty {
                if ty != want {
                    self.error(
                        ErrorCode::TypeMismatch,
                        t.span,
                        format!(
                            "mismatched types: expected `{}`, found `{}`",
                            self.show(&want),
                            self.show(&ty)
                        ),
                    );
                }
            }
            if fn_body {
                diverges = true;
            }
        }
        self.scopes.pop();
        diverges
    }

    fn expect_ty(&mut self, e: &RlExpr, want: &SynTy) {
        if let Some(got) = self.expr(e) {
            if got != *want {
                let msg = format!(
                    "mismatched types: expected `{}`, found `{}`",
                    self.show(want),
                    self.show(&got)
                );
                self.error(ErrorCode::TypeMismatch, e.span, msg);
            }
        }
    }

    fn stmt(&mut self, s: &RlStmt) -> bool {
        match &s.kind {
            StmtKind::Let {
                mutable,
                name,
                ty,
                init,
            } => {
                let declared = ty.as_ref().map(|t| self.resolve_ty(t, name.span, None));
                let ty = match (declared, init) {
                    (Some(d), Some(e)) => {
                        self.expect_ty(e, &d);
                        d
                    }
                    (Some(d), None) => d,
                    (None, Some(e)) => match self.expr(e) {
                        Some(t) => t,
                        None => Ty::Unit,
                    },
                    (None, None) => {
                        self.error(
                            ErrorCode::InvalidType,
                            name.span,
                            format!("type annotations needed for `{}`", name.name),
                        );
                        Ty::Unit
                    }
                };
                let id = self.declare(name, ty, *mutable);
                if init.is_none() {
                    self.deferred.insert(id);
                }
                false
            }
            StmtKind::Assign { place, value } => {
                if !place.is_place() {
                    self.error(
                        ErrorCode::TypeMismatch,
                        place.span,
                        "invalid left-hand side of assignment",
                    );
                    self.expr(value);
                    return false;
                }
                let pt = self.expr(place);
                if let Some(pt) = pt {
                    self.expect_ty(value, &pt);
                    self.check_mutable(place, "assign to");
                } else {
                    self.expr(value);
                }
                false
            }
            StmtKind::Expr(e) => {
                self.expr(e);
                false
            }
            StmtKind::If {
                cond,
                then_block,
                else_branch,
            } => {
                self.expect_ty(cond, &Ty::Bool);
                let t = self.block(then_block, false);
                let e = match else_branch {
                    Some(ElseBranch::Block(b)) => self.block(b, false),
                    Some(ElseBranch::If(s)) => self.stmt(s),
                    None => false,
                };
                t && e
            }
            StmtKind::While { cond, body } => {
                self.expect_ty(cond, &Ty::Bool);
                self.block(body, false);
                false
            }
            StmtKind::Match { scrutinee, arms } => self.match_stmt(s.span, scrutinee, arms),
            StmtKind::Return(value) => {
                let want = self.ret_ty.clone();
                match value {
                    Some(e) => self.expect_ty(e, &want),
                    None if want != Ty::Unit => {
                        let msg = format!("`return;` in a function returning `{}`", self.show(&want));
                        self.error(ErrorCode::TypeMismatch, s.span, msg);
                    }
                    None => {}
                }
                true
            }
            StmtKind::Block(b) => self.block(b, false),
        }
    }

    fn match_stmt(&mut self, span: Span, scrutinee: &RlExpr, arms: &[Arm]) -> bool {
        let Some(st) = self.expr(scrutinee) else { return false };
        let adt = match &st {
            Ty::Adt(id) if self.adts.get(*id).is_enum() => *id,
            _ => {
                let msg = format!("`match` requires an enum value, found `{}`", self.show(&st));
                self.error(ErrorCode::TypeMismatch, scrutinee.span, msg);
                return false;
            }
        };
        let def = self.adts.get(adt).clone();
        let mut covered = vec![false; def.variants().len()];
        let mut wildcard = false;
        let mut all_diverge = !arms.is_empty();
        for arm in arms {
            self.scopes.push(HashMap::new());
            match &arm.pattern {
                Pattern::Wild => wildcard = true,
                Pattern::Variant {
                    enum_name,
                    variant,
                    fields,
                } => {
                    if enum_name.name != def.name {
                        self.error(
                            ErrorCode::TypeMismatch,
                            enum_name.span,
                            format!("expected pattern of enum `{}`, found `{}`", def.name, enum_name.name),
                        );
                    } else if let Some(vi) = def.variants().iter().position(|v| v.name == variant.name) {
                        covered[vi] = true;
                        let vfields = def.variants()[vi].fields.clone();
                        let pat_fields: &[SubPattern] = fields.as_deref().unwrap_or(&[]);
                        if pat_fields.len() != vfields.len() || (fields.is_none() && !vfields.is_empty()) {
                            self.error(
                                ErrorCode::ArityMismatch,
                                variant.span,
                                format!(
                                    "pattern `{}::{}` has {} fields, variant has {}",
                                    def.name,
                                    variant.name,
                                    pat_fields.len(),
                                    vfields.len()
                                ),
                            );
                        }
                        for (sp, fty) in pat_fields.iter().zip(vfields) {
                            if let SubPattern::Bind { by_ref, mutable, name } = sp {
                                let ty = match by_ref {
                                    Some(m) => {
                                        if m.is_mut() && scrutinee.is_place() {
                                            self.check_mutable(scrutinee, "borrow as mutable");
                                        }
                                        Ty::Ref((), *m, Box::new(fty))
                                    }
                                    None => fty,
                                };
                                self.declare(name, ty, *mutable);
                            }
                        }
                    } else {
                        self.error(
                            ErrorCode::UnknownName,
                            variant.span,
                            format!("no variant `{}` in enum `{}`", variant.name, def.name),
                        );
                    }
                }
            }
            let d = match &arm.body {
                ArmBody::Block(b) => self.block(b, false),
                ArmBody::Expr(e) => {
                    if let Some(t) = self.expr(e) {
                        if t != Ty::Unit {
                            let msg = format!("match arm must have type `()`, found `{}`", self.show(&t));
                            self.error(ErrorCode::TypeMismatch, e.span, msg);
                        }
                    }
                    false
                }
            };
            all_diverge &= d;
            self.scopes.pop();
        }
        if !wildcard && covered.iter().any(|c| !c) {
            let missing: Vec<String> = def
                .variants()
                .iter()
                .zip(&covered)
                .filter(|(_, c)| !**c)
                .map(|(v, _)| format!("{}::{}", def.name, v.name))
                .collect();
            self.error(
                ErrorCode::NonExhaustiveMatch,
                span,
                format!("non-exhaustive patterns: {} not covered", missing.join(", ")),
            );
        }
        all_diverge
    }

    /// Mutability of a place expression: `(mutable, behind_shared_ref)`.
    fn place_mutability(&self, e: &RlExpr) -> (bool, bool, Option<String>) {
        match &e.kind {
            ExprKind::Var(name) => match self.resolutions.get(&e.id) {
                Some(Resolution::Local(b)) => {
                    let info = &self.bindings[b.0 as usize];
                    (info.mutable || self.deferred.contains(b), false, Some(name.clone()))
                }
                _ => (false, false, Some(name.clone())),
            },
            ExprKind::Paren(inner) => self.place_mutability(inner),
            ExprKind::Field(base, _) => {
                let (mut m, mut shared, name) = self.place_mutability(base);
                let mut t = self.expr_types.get(&base.id).cloned();
                let n = self.auto_derefs.get(&e.id).copied().unwrap_or(0);
                for _ in 0..n {
                    let Some(cur) = t else { break };
                    (m, shared) = deref_mutability(&cur, m, shared);
                    t = cur.deref().cloned();
                }
                (m, shared, name)
            }
            ExprKind::Deref(base) => {
                let (m, shared, name) = self.place_mutability(base);
                match self.expr_types.get(&base.id) {
                    Some(t) => {
                        let (m, s) = deref_mutability(t, m, shared);
                        (m, s, name)
                    }
                    None => (m, shared, name),
                }
            }
            _ => (true, false, None),
        }
    }

    fn check_mutable(&mut self, place: &RlExpr, what: &str) {
        let (m, shared, name) = self.place_mutability(place);
        if !m {
            let desc = name.unwrap_or_else(|| "value".into());
            let msg = if shared {
                format!("cannot {} data behind a `&` reference (through `{}`)", what, desc)
            } else {
                format!("cannot {} `{}`, as it is not declared as mutable", what, desc)
            };
            self.error(ErrorCode::NotMutable, place.span, msg);
        }
    }

    fn record(&mut self, e: &RlExpr, t: SynTy) -> Option<SynTy> {
        self.expr_types.insert(e.id, t.clone());
        Some(t)
    }

    fn expr(&mut self, e: &RlExpr) -> Option<SynTy> {
        match &e.kind {
            ExprKind::Int(n) => {
                if *n > i32::MAX as u64 {
                    self.error(
                        ErrorCode::TypeMismatch,
                        e.span,
                        "integer literal is out of range for `i32`",
                    );
                }
                self.record(e, Ty::I32)
            }
            ExprKind::Bool(_) => self.record(e, Ty::Bool),
            ExprKind::Unit => self.record(e, Ty::Unit),
            ExprKind::Var(name) => {
                if let Some(b) = self.lookup(name) {
                    self.resolutions.insert(e.id, Resolution::Local(b));
                    let t = self.bindings[b.0 as usize].ty.clone();
                    return self.record(e, t);
                }
                if let Some(id) = self.adts.lookup(name) {
                    if matches!(
                        self.adts.get(id).kind,
                        AdtKind::Struct {
                            ctor: CtorKind::Unit,
                            ..
                        }
                    ) {
                        self.resolutions.insert(e.id, Resolution::UnitStruct(id));
                        return self.record(e, Ty::Adt(id));
                    }
                }
                self.error(
                    ErrorCode::UnknownName,
                    e.span,
                    format!("cannot find value `{}` in this scope", name),
                );
                None
            }
            ExprKind::Path(en, vn) => {
                let (id, vi) = self.resolve_variant(en, vn)?;
                let vdef = &self.adts.get(id).variants()[vi as usize];
                if !vdef.fields.is_empty() {
                    let msg = format!(
                        "variant `{}::{}` expects {} fields",
                        en.name,
                        vn.name,
                        vdef.fields.len()
                    );
                    self.error(ErrorCode::ArityMismatch, e.span, msg);
                    return None;
                }
                self.resolutions.insert(e.id, Resolution::UnitVariant(id, vi));
                self.record(e, Ty::Adt(id))
            }
            ExprKind::Field(base, field) => {
                let bt = self.expr(base)?;
                let mut t = bt;
                let mut derefs = 0;
                while let Some(inner) = t.deref() {
                    t = inner.clone();
                    derefs += 1;
                }
                let Ty::Adt(id) = t else {
                    let msg = format!("no field `{}` on type `{}`", field_str(field), self.show(&t));
                    self.error(ErrorCode::TypeMismatch, e.span, msg);
                    return None;
                };
                let def = self.adts.get(id);
                let idx = match (&def.kind, field) {
                    (
                        AdtKind::Struct {
                            ctor: CtorKind::Named,
                            fields,
                        },
                        FieldName::Named(n),
                    ) => fields.iter().position(|f| f.name == *n),
                    (
                        AdtKind::Struct {
                            ctor: CtorKind::Tuple,
                            fields,
                        },
                        FieldName::Index(i),
                    ) => ((*i as usize) < fields.len()).then_some(*i as usize),
                    _ => None,
                };
                let Some(idx) = idx else {
                    let msg = format!("no field `{}` on type `{}`", field_str(field), def.name);
                    self.error(ErrorCode::UnknownName, e.span, msg);
                    return None;
                };
                let fty = def.struct_fields()[idx].ty.clone();
                self.auto_derefs.insert(e.id, derefs);
                self.field_index.insert(e.id, idx as u32);
                self.record(e, fty)
            }
            ExprKind::Deref(inner) => {
                let t = self.expr(inner)?;
                match t.deref() {
                    Some(pointee) => {
                        let p = pointee.clone();
                        self.record(e, p)
                    }
                    None => {
                        let msg = format!("type `{}` cannot be dereferenced", self.show(&t));
                        self.error(ErrorCode::TypeMismatch, e.span, msg);
                        None
                    }
                }
            }
            ExprKind::Ref(m, inner) => {
                let t = self.expr(inner)?;
                if m.is_mut() && inner.is_place() {
                    self.check_mutable(inner, "borrow as mutable");
                }
                self.record(e, Ty::Ref((), *m, Box::new(t)))
            }
            ExprKind::BoxNew(inner) => {
                let t = self.expr(inner)?;
                self.record(e, Ty::Box(Box::new(t)))
            }
            ExprKind::Unary(op, inner) => {
                let want = match op {
                    UnOp::Neg => Ty::I32,
                    UnOp::Not => Ty::Bool,
                };
                let is_min_literal = *op == UnOp::Neg && matches!(inner.kind, ExprKind::Int(n) if n == 1u64 << 31);
                if is_min_literal {
                    self.expr_types.insert(inner.id, Ty::I32);
                } else {
                    self.expect_ty(inner, &want);
                }
                self.record(e, want)
            }
            ExprKind::Binary(op, l, r) => {
                let lt = self.expr(l);
                let rt = self.expr(r);
                let (lt, rt) = (lt?, rt?);
                let (operand_ok, result) = match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem => {
                        (lt == Ty::I32 && rt == Ty::I32, Ty::I32)
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => (lt == Ty::I32 && rt == Ty::I32, Ty::Bool),
                    BinOp::Eq | BinOp::Ne => (lt == rt && matches!(lt, Ty::I32 | Ty::Bool), Ty::Bool),
                    BinOp::And | BinOp::Or => (lt == Ty::Bool && rt == Ty::Bool, Ty::Bool),
                };
                if !operand_ok {
                    let msg = format!(
                        "cannot apply `{}` to `{}` and `{}`",
                        op.symbol(),
                        self.show(&lt),
                        self.show(&rt)
                    );
                    self.error(ErrorCode::TypeMismatch, e.span, msg);
                }
                self.record(e, result)
            }
            ExprKind::Call(callee, args) => self.call(e, callee, args),
            ExprKind::StructLit(name, fields) => {
                let Some(id) = self.adts.lookup(&name.name) else {
                    self.error(
                        ErrorCode::UnknownName,
                        name.span,
                        format!("cannot find struct `{}`", name.name),
                    );
                    return None;
                };
                let def = self.adts.get(id).clone();
                let AdtKind::Struct {
                    ctor: CtorKind::Named,
                    fields: defs,
                } = &def.kind
                else {
                    self.error(
                        ErrorCode::TypeMismatch,
                        name.span,
                        format!("`{}` is not a struct with named fields", name.name),
                    );
                    return None;
                };
                let mut seen = HashSet::new();
                for (f, v) in fields {
                    match defs.iter().find(|d| d.name == f.name) {
                        Some(d) => {
                            if !seen.insert(f.name.clone()) {
                                self.error(
                                    ErrorCode::DuplicateDefinition,
                                    f.span,
                                    format!("field `{}` specified more than once", f.name),
                                );
                            }
                            let want = d.ty.clone();
                            self.expect_ty(v, &want);
                        }
                        None => {
                            self.error(
                                ErrorCode::UnknownName,
                                f.span,
                                format!("struct `{}` has no field `{}`", def.name, f.name),
                            );
                            self.expr(v);
                        }
                    }
                }
                let missing: Vec<&str> = defs
                    .iter()
                    .filter(|d| !seen.contains(&d.name))
                    .map(|d| d.name.as_str())
                    .collect();
                if !missing.is_empty() {
                    self.error(
                        ErrorCode::ArityMismatch,
                        e.span,
                        format!("missing fields {} in initializer of `{}`", missing.join(", "), def.name),
                    );
                }
                self.struct_lits.insert(e.id, id);
                self.record(e, Ty::Adt(id))
            }
            ExprKind::Paren(inner) => {
                let t = self.expr(inner)?;
                self.record(e, t)
            }
        }
    }

    fn resolve_variant(&mut self, en: &Ident, vn: &Ident) -> Option<(AdtId, u32)> {
        let Some(id) = self.adts.lookup(&en.name).filter(|id| self.adts.get(*id).is_enum()) else {
            self.error(
                ErrorCode::UnknownName,
                en.span,
                format!("cannot find enum `{}`", en.name),
            );
            return None;
        };
        match self.adts.get(id).variants().iter().position(|v| v.name == vn.name) {
            Some(vi) => Some((id, vi as u32)),
            None => {
                self.error(
                    ErrorCode::UnknownName,
                    vn.span,
                    format!("no variant `{}` in enum `{}`", vn.name, en.name),
                );
                None
            }
        }
    }

    fn call(&mut self, e: &RlExpr, callee: &Callee, args: &[RlExpr]) -> Option<SynTy> {
        let (target, params, ret, what) = match callee {
            Callee::Name(n) => {
                if let Some(fid) = self.fn_names.get(&n.name).copied() {
                    let sig = &self.sigs[fid.0 as usize];
                    (
                        CallTarget::Fn(fid),
                        sig.params.clone(),
                        sig.ret.clone(),
                        format!("function `{}`", n.name),
                    )
                } else if let Some(id) = self.adts.lookup(&n.name) {
                    match &self.adts.get(id).kind {
                        AdtKind::Struct {
                            ctor: CtorKind::Tuple,
                            fields,
                        } => (
                            CallTarget::TupleStruct(id),
                            fields.iter().map(|f| f.ty.clone()).collect(),
                            Ty::Adt(id),
                            format!("struct `{}`", n.name),
                        ),
                        _ => {
                            self.error(
                                ErrorCode::TypeMismatch,
                                n.span,
                                format!("`{}` is not a function", n.name),
                            );
                            return None;
                        }
                    }
                } else {
                    self.error(
                        ErrorCode::UnknownName,
                        n.span,
                        format!("cannot find function `{}`", n.name),
                    );
                    for a in args {
                        self.expr(a);
                    }
                    return None;
                }
            }
            Callee::Variant(en, vn) => {
                let (id, vi) = self.resolve_variant(en, vn)?;
                let fields = self.adts.get(id).variants()[vi as usize].fields.clone();
                (
                    CallTarget::Variant(id, vi),
                    fields,
                    Ty::Adt(id),
                    format!("variant `{}::{}`", en.name, vn.name),
                )
            }
        };
        if params.len() != args.len() {
            self.error(
                ErrorCode::ArityMismatch,
                e.span,
                format!(
                    "{} takes {} arguments but {} were supplied",
                    what,
                    params.len(),
                    args.len()
                ),
            );
            for a in args {
                self.expr(a);
            }
        } else {
            for (a, p) in args.iter().zip(&params) {
                self.expect_ty(a, p);
            }
        }
        self.call_targets.insert(e.id, target);
        self.record(e, ret)
    }
}

fn deref_mutability(t: &SynTy, m: bool, shared: bool) -> (bool, bool) {
    match t {
        Ty::Box(_) => (m, shared),
        Ty::Ref(_, Mutability::Shared, _) => (false, true),
        Ty::Ref(_, Mutability::Mut, _) => (!shared, shared),
        _ => (m, shared),
    }
}

fn field_str(f: &FieldName) -> String {
    match f {
        FieldName::Named(n) => n.clone(),
        FieldName::Index(i) => i.to_string(),
    }
}

fn is_builtin_type(name: &str) -> bool {
    matches!(name, "i32" | "bool" | "Box")
}

fn contains_ref(t: &RlType) -> bool {
    match t {
        RlType::Ref(..) => true,
        RlType::Box(inner) => contains_ref(inner),
        _ => false,
    }
}

fn ref_count(t: &RlType) -> usize {
    match t {
        RlType::Ref(_, _, inner) => 1 + ref_count(inner),
        RlType::Box(inner) => ref_count(inner),
        _ => 0,
    }
}

fn has_elided(t: &RlType) -> bool {
    match t {
        RlType::Ref(RegionAnnot::Elided, _, _) => true,
        RlType::Ref(_, _, inner) | RlType::Box(inner) => has_elided(inner),
        _ => false,
    }
}
