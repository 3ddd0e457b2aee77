//! Parsing of the restricted Java-like input subset into an API unit model.

mod ast;
mod lexer;
mod lower;
mod parser;

pub use ast::{ApiUnitModel, Arg, ConditionExpr, FieldDecl, MethodModel, PlainOp, StatementTree};
pub use lexer::{tokenize, Token, TokenKind};
pub use lower::lower_condition;
pub use parser::parse_unit;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SourceError {
    #[error("line {line}:{col}: {msg}")]
    Lex { line: u32, col: u32, msg: String },
    #[error("line {line}: {msg}")]
    Format { line: u32, msg: String },
    #[error("line {line}: {msg}")]
    Parse { line: u32, msg: String },
    #[error("line {line}: unsupported construct: {construct}")]
    Unsupported { line: u32, construct: String },
}

/// Tokenizes and parses a complete source unit.
pub fn parse_source(text: &str) -> Result<ApiUnitModel, SourceError> {
    parse_unit(&tokenize(text)?)
}
