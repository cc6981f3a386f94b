use std::fmt;

use crate::diag::{Diagnostic, ErrorCode, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    Lifetime(String),
    // keywords
    Fn,
    Struct,
    Enum,
    Let,
    Mut,
    If,
    Else,
    While,
    Match,
    Return,
    True,
    False,
    Ref,
    // punctuation
    LParen,
    RParen,
    LBrace,
    RBrace,
    Lt,
    Gt,
    Le,
    Ge,
    EqEq,
    Ne,
    Eq,
    Comma,
    Semi,
    Colon,
    ColonColon,
    Dot,
    Arrow,
    FatArrow,
    Amp,
    AmpAmp,
    PipePipe,
    Star,
    Plus,
    Minus,
    Slash,
    Percent,
    Bang,
    Underscore,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{}`", s),
            Tok::Int(n) => return write!(f, "integer `{}`", n),
            Tok::Lifetime(s) => return write!(f, "lifetime `'{}`", s),
            Tok::Fn => "fn",
            Tok::Struct => "struct",
            Tok::Enum => "enum",
            Tok::Let => "let",
            Tok::Mut => "mut",
            Tok::If => "if",
            Tok::Else => "else",
            Tok::While => "while",
            Tok::Match => "match",
            Tok::Return => "return",
            Tok::True => "true",
            Tok::False => "false",
            Tok::Ref => "ref",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::EqEq => "==",
            Tok::Ne => "!=",
            Tok::Eq => "=",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::ColonColon => "::",
            Tok::Dot => ".",
            Tok::Arrow => "->",
            Tok::FatArrow => "=>",
            Tok::Amp => "&",
            Tok::AmpAmp => "&&",
            Tok::PipePipe => "||",
            Tok::Star => "*",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Slash => "/",
            Tok::Percent => "%",
            Tok::Bang => "!",
            Tok::Underscore => "_",
            Tok::Eof => "end of file",
        };
        write!(f, "`{}`", s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn keyword(s: &str) -> Option<Tok> {
    Some(match s {
        "fn" => Tok::Fn,
        "struct" => Tok::Struct,
        "enum" => Tok::Enum,
        "let" => Tok::Let,
        "mut" => Tok::Mut,
        "if" => Tok::If,
        "else" => Tok::Else,
        "while" => Tok::While,
        "match" => Tok::Match,
        "return" => Tok::Return,
        "true" => Tok::True,
        "false" => Tok::False,
        "ref" => Tok::Ref,
        "_" => Tok::Underscore,
        _ => return None,
    })
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, Diagnostic> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            bump!();
            continue;
        }
        let span = Span::new(line, col);
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let mut depth = 0;
            loop {
                if i >= chars.len() {
                    return Err(Diagnostic::new(
                        ErrorCode::SyntaxError,
                        span,
                        "unterminated block comment",
                    ));
                }
                if chars[i] == '/' && chars.get(i + 1) == Some(&'*') {
                    depth += 1;
                    bump!();
                    bump!();
                } else if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    depth -= 1;
                    bump!();
                    bump!();
                    if depth == 0 {
                        break;
                    }
                } else {
                    bump!();
                }
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            let word: String = chars[start..i].iter().collect();
            let tok = keyword(&word).unwrap_or(Tok::Ident(word));
            out.push(Token { tok, span });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '_') {
                bump!();
            }
            let digits: String = chars[start..i].iter().filter(|c| **c != '_').collect();
            // tolerate an `i32` suffix
            if chars[i..].starts_with(&['i', '3', '2']) {
                for _ in 0..3 {
                    bump!();
                }
            }
            let n: u64 = digits
                .parse()
                .map_err(|_| Diagnostic::new(ErrorCode::SyntaxError, span, "integer literal is too large"))?;
            out.push(Token { tok: Tok::Int(n), span });
            continue;
        }
        if c == '\'' {
            bump!();
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump!();
            }
            if start == i {
                return Err(Diagnostic::new(
                    ErrorCode::SyntaxError,
                    span,
                    "expected lifetime name after `'`",
                ));
            }
            let name: String = chars[start..i].iter().collect();
            out.push(Token {
                tok: Tok::Lifetime(name),
                span,
            });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('=', Some('>')) => (Tok::FatArrow, 2),
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('!', Some('=')) => (Tok::Ne, 2),
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('&', Some('&')) => (Tok::AmpAmp, 2),
            ('|', Some('|')) => (Tok::PipePipe, 2),
            (':', Some(':')) => (Tok::ColonColon, 2),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('<', _) => (Tok::Lt, 1),
            ('>', _) => (Tok::Gt, 1),
            ('=', _) => (Tok::Eq, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            (':', _) => (Tok::Colon, 1),
            ('.', _) => (Tok::Dot, 1),
            ('&', _) => (Tok::Amp, 1),
            ('*', _) => (Tok::Star, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('/', _) => (Tok::Slash, 1),
            ('%', _) => (Tok::Percent, 1),
            ('!', _) => (Tok::Bang, 1),
            _ => {
                return Err(Diagnostic::new(
                    ErrorCode::SyntaxError,
                    span,
                    format!("unexpected character `{}`", c),
                ))
            }
        };
        for _ in 0..len {
            bump!();
        }
        out.push(Token { tok, span });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span::new(line, col),
    });
    Ok(out)
}
