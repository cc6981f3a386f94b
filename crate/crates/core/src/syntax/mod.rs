//! Rustlight front end: lexing, parsing, printing and type checking.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod typeck;

pub use parser::parse;
pub use printer::print_module;
pub use typeck::{typecheck, TypedModule};
