//! Structured diagnostics shared by every pass.

use std::fmt;

use serde::Serialize;

/// A source position (1-based line and column).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Stable diagnostic codes. Golden tests match on these rather than on
/// message wording.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ErrorCode {
    SyntaxError,
    UnknownName,
    TypeMismatch,
    ArityMismatch,
    NonExhaustiveMatch,
    NotMutable,
    InvalidType,
    DuplicateDefinition,
    MissingReturn,
    MissingLifetime,

    UseAfterMove,
    BorrowAfterMove,
    CannotMoveOutOfReference,
    UseOfUninitialized,
    CannotMoveOutOfBoxInterior,

    MutableBorrowWhileBorrowed,
    UseWhileMutablyBorrowed,
    AssignWhileBorrowed,
    MoveWhileBorrowed,
    UniversalRegionViolation,
    ReturnLocalReference,
    DroppedWhileBorrowed,
}

impl ErrorCode {
    pub fn code(self) -> &'static str {
        use ErrorCode::*;
        match self {
            SyntaxError => "RL0001",
            UnknownName => "RL0002",
            TypeMismatch => "RL0003",
            ArityMismatch => "RL0004",
            NonExhaustiveMatch => "RL0005",
            NotMutable => "RL0006",
            InvalidType => "RL0007",
            DuplicateDefinition => "RL0008",
            MissingReturn => "RL0009",
            MissingLifetime => "RL0010",
            UseAfterMove => "RL0101",
            BorrowAfterMove => "RL0102",
            CannotMoveOutOfReference => "RL0103",
            UseOfUninitialized => "RL0104",
            CannotMoveOutOfBoxInterior => "RL0105",
            MutableBorrowWhileBorrowed => "RL0201",
            UseWhileMutablyBorrowed => "RL0202",
            AssignWhileBorrowed => "RL0203",
            MoveWhileBorrowed => "RL0204",
            UniversalRegionViolation => "RL0205",
            ReturnLocalReference => "RL0206",
            DroppedWhileBorrowed => "RL0207",
        }
    }

    pub fn from_code(code: &str) -> Option<ErrorCode> {
        ErrorCode::ALL.iter().copied().find(|c| c.code() == code)
    }

    pub const ALL: [ErrorCode; 22] = {
        use ErrorCode::*;
        [
            SyntaxError,
            UnknownName,
            TypeMismatch,
            ArityMismatch,
            NonExhaustiveMatch,
            NotMutable,
            InvalidType,
            DuplicateDefinition,
            MissingReturn,
            MissingLifetime,
            UseAfterMove,
            BorrowAfterMove,
            CannotMoveOutOfReference,
            UseOfUninitialized,
            CannotMoveOutOfBoxInterior,
            MutableBorrowWhileBorrowed,
            UseWhileMutablyBorrowed,
            AssignWhileBorrowed,
            MoveWhileBorrowed,
            UniversalRegionViolation,
            ReturnLocalReference,
            DroppedWhileBorrowed,
        ]
    };

    /// True for the codes emitted by move checking and borrow checking.
    pub fn is_ownership_error(self) -> bool {
        self.code().starts_with("RL01") || self.code().starts_with("RL02")
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    #[serde(skip)]
    pub code: ErrorCode,
    #[serde(skip)]
    pub span: Span,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub function: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub node: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub place: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loan: Option<usize>,
}

impl Diagnostic {
    pub fn new(code: ErrorCode, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            code,
            span,
            message: message.into(),
            function: None,
            node: None,
            place: None,
            loan: None,
        }
    }

    pub fn in_function(mut self, name: &str) -> Self {
        self.function = Some(name.to_string());
        self
    }

    pub fn at_node(mut self, node: usize) -> Self {
        self.node = Some(node);
        self
    }

    pub fn with_place(mut self, place: impl Into<String>) -> Self {
        self.place = Some(place.into());
        self
    }

    pub fn with_loan(mut self, loan: usize) -> Self {
        self.loan = Some(loan);
        self
    }

    /// `file:line:col: error[CODE]: message`
    pub fn render(&self, file: &str) -> String {
        format!(
            "{}:{}:{}: error[{}]: {}",
            file,
            self.span.line,
            self.span.col,
            self.code.code(),
            self.message
        )
    }

    pub fn to_json(&self, file: &str) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            file: &'a str,
            line: u32,
            col: u32,
            code: &'static str,
            kind: String,
            #[serde(flatten)]
            diag: &'a Diagnostic,
        }
        let rec = Record {
            file,
            line: self.span.line,
            col: self.span.col,
            code: self.code.code(),
            kind: format!("{:?}", self.code),
            diag: self,
        };
        serde_json::to_string(&rec).expect("diagnostic serializes")
    }
}

/// Deterministic ordering used before printing.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(|a, b| {
        (&a.function, a.span, a.node, a.loan, a.code, &a.message).cmp(&(
            &b.function,
            b.span,
            b.node,
            b.loan,
            b.code,
            &b.message,
        ))
    });
}
