//! Front end for the SELECT/WHERE subset: lexer, parser, and binder.

pub mod ast;
pub(crate) mod binder;
pub mod lexer;
mod parser;

use thiserror::Error;

pub use ast::{BoolExpr, Columns, ComparisonOp, SelectStatement, SimpleCondition};
pub use binder::{bind, BindError, BoundSelect};
pub use lexer::{tokenize, Keyword, Token, TokenKind};
pub use parser::{parse, parse_select, parse_tokens};

/// Lexical and syntax errors. Every variant carries a character offset.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("illegal character '{found}' at offset {pos}")]
    Lexical { pos: usize, found: char },
    #[error("unterminated string literal starting at offset {pos}")]
    UnterminatedString { pos: usize },
    #[error("integer literal out of range at offset {pos}")]
    IntegerRange { pos: usize },
    #[error("syntax error at offset {pos}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        pos: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unsupported clause {clause} at offset {pos}")]
    Unsupported { pos: usize, clause: String },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Lexical { pos, .. }
            | ParseError::UnterminatedString { pos }
            | ParseError::IntegerRange { pos }
            | ParseError::Syntax { pos, .. }
            | ParseError::Unsupported { pos, .. } => *pos,
        }
    }
}
