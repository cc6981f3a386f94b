//! Semantic types shared by the type checker, RustIR, and the backends.
//!
//! `Ty<R>` is parameterized by the region annotation carried on references:
//! `()` after type checking, [`Region`](crate::ir::Region) once lowering has
//! assigned inference regions.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mutability {
    Shared,
    Mut,
}

impl Mutability {
    pub fn is_mut(self) -> bool {
        self == Mutability::Mut
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AdtId(pub u32);

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub enum Ty<R> {
    #[default]
    Unit,
    Bool,
    I32,
    Box(Box<Ty<R>>),
    Ref(R, Mutability, Box<Ty<R>>),
    Adt(AdtId),
}

/// A type with regions erased.
pub type SynTy = Ty<()>;

impl<R: Clone> Ty<R> {
    pub fn erase(&self) -> SynTy {
        self.map_regions(&mut |_| ())
    }

    pub fn map_regions<S>(&self, f: &mut impl FnMut(&R) -> S) -> Ty<S> {
        match self {
            Ty::Unit => Ty::Unit,
            Ty::Bool => Ty::Bool,
            Ty::I32 => Ty::I32,
            Ty::Box(t) => Ty::Box(Box::new(t.map_regions(f))),
            Ty::Ref(r, m, t) => {
                let r = f(r);
                Ty::Ref(r, *m, Box::new(t.map_regions(f)))
            }
            Ty::Adt(id) => Ty::Adt(*id),
        }
    }

    /// Regions in pre-order (outermost first).
    pub fn regions(&self) -> Vec<R> {
        let mut out = Vec::new();
        let mut t = self;
        loop {
            match t {
                Ty::Box(inner) => t = inner,
                Ty::Ref(r, _, inner) => {
                    out.push(r.clone());
                    t = inner;
                }
                _ => return out,
            }
        }
    }

    /// Copy types: unit, bool, i32 and shared references.
    pub fn is_copy(&self) -> bool {
        matches!(self, Ty::Unit | Ty::Bool | Ty::I32 | Ty::Ref(_, Mutability::Shared, _))
    }

    pub fn is_ref(&self) -> bool {
        matches!(self, Ty::Ref(..))
    }

    pub fn is_box(&self) -> bool {
        matches!(self, Ty::Box(..))
    }

    /// The pointee of a `Box` or reference.
    pub fn deref(&self) -> Option<&Ty<R>> {
        match self {
            Ty::Box(t) | Ty::Ref(_, _, t) => Some(t),
            _ => None,
        }
    }
}

impl SynTy {
    pub fn with_regions<R>(&self, f: &mut impl FnMut() -> R) -> Ty<R> {
        self.map_regions(&mut |_| f())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CtorKind {
    Named,
    Tuple,
    Unit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDef {
    pub name: String,
    pub ty: SynTy,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariantDef {
    pub name: String,
    pub fields: Vec<SynTy>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdtKind {
    Struct { ctor: CtorKind, fields: Vec<FieldDef> },
    Enum { variants: Vec<VariantDef> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdtDef {
    pub name: String,
    pub kind: AdtKind,
}

impl AdtDef {
    pub fn is_enum(&self) -> bool {
        matches!(self.kind, AdtKind::Enum { .. })
    }

    pub fn struct_fields(&self) -> &[FieldDef] {
        match &self.kind {
            AdtKind::Struct { fields, .. } => fields,
            AdtKind::Enum { .. } => &[],
        }
    }

    pub fn variants(&self) -> &[VariantDef] {
        match &self.kind {
            AdtKind::Enum { variants } => variants,
            AdtKind::Struct { .. } => &[],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AdtTable {
    pub defs: Vec<AdtDef>,
}

impl AdtTable {
    pub fn get(&self, id: AdtId) -> &AdtDef {
        &self.defs[id.0 as usize]
    }

    pub fn lookup(&self, name: &str) -> Option<AdtId> {
        self.defs.iter().position(|d| d.name == name).map(|i| AdtId(i as u32))
    }

    pub fn ids(&self) -> impl Iterator<Item = AdtId> {
        (0..self.defs.len() as u32).map(AdtId)
    }

    /// Whether dropping a value of this type releases heap memory. Only
    /// `Box` carries a drop obligation.
    pub fn needs_drop<R>(&self, ty: &Ty<R>) -> bool {
        match ty {
            Ty::Box(_) => true,
            Ty::Adt(id) => self.adt_needs_drop(*id, &mut Vec::new()),
            _ => false,
        }
    }

    fn adt_needs_drop(&self, id: AdtId, visiting: &mut Vec<AdtId>) -> bool {
        if visiting.contains(&id) {
            return false;
        }
        visiting.push(id);
        let def = self.get(id);
        let field_tys: Vec<&SynTy> = match &def.kind {
            AdtKind::Struct { fields, .. } => fields.iter().map(|f| &f.ty).collect(),
            AdtKind::Enum { variants } => variants.iter().flat_map(|v| v.fields.iter()).collect(),
        };
        let res = field_tys.into_iter().any(|t| match t {
            Ty::Box(_) => true,
            Ty::Adt(inner) => self.adt_needs_drop(*inner, visiting),
            _ => false,
        });
        visiting.pop();
        res
    }

    /// Type of field `idx` of a struct, or of the payload of `variant`.
    pub fn field_ty(&self, id: AdtId, variant: Option<u32>, idx: u32) -> &SynTy {
        let def = self.get(id);
        match (&def.kind, variant) {
            (AdtKind::Struct { fields, .. }, None) => &fields[idx as usize].ty,
            (AdtKind::Enum { variants }, Some(v)) => &variants[v as usize].fields[idx as usize],
            _ => panic!("field projection does not match ADT kind of `{}`", def.name),
        }
    }

    pub fn display<'a, R: RegionFmt>(&'a self, ty: &'a Ty<R>) -> TyDisplay<'a, R> {
        TyDisplay { adts: self, ty }
    }
}

pub struct TyDisplay<'a, R> {
    adts: &'a AdtTable,
    ty: &'a Ty<R>,
}

impl<R: RegionFmt> fmt::Display for TyDisplay<'_, R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ty(f, self.ty, Some(self.adts))
    }
}

fn write_ty<R: RegionFmt>(f: &mut fmt::Formatter<'_>, ty: &Ty<R>, adts: Option<&AdtTable>) -> fmt::Result {
    match ty {
        Ty::Unit => f.write_str("()"),
        Ty::Bool => f.write_str("bool"),
        Ty::I32 => f.write_str("i32"),
        Ty::Box(t) => {
            f.write_str("Box<")?;
            write_ty(f, t, adts)?;
            f.write_str(">")
        }
        Ty::Ref(r, m, t) => {
            f.write_str("&")?;
            if let Some(r) = r.region_label() {
                write!(f, "{} ", r)?;
            }
            if m.is_mut() {
                f.write_str("mut ")?;
            }
            write_ty(f, t, adts)
        }
        Ty::Adt(id) => match adts {
            Some(a) => f.write_str(&a.get(*id).name),
            None => write!(f, "adt#{}", id.0),
        },
    }
}

/// How a region annotation renders inside a type; `None` prints nothing.
pub trait RegionFmt {
    fn region_label(&self) -> Option<String>;
}

impl RegionFmt for () {
    fn region_label(&self) -> Option<String> {
        None
    }
}

impl<R: RegionFmt> fmt::Display for Ty<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ty(f, self, None)
    }
}
