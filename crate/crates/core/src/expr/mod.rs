//! Statement DSL: field expressions over named random variables and linear
//! entropy inequalities with rational coefficients.

mod ast;
mod eval;
mod lexer;
mod parser;
mod statement;

pub use ast::{FieldExpr, NodeKind};
pub use eval::{evaluate, CompiledExpr, FieldValue};
#[allow(unused_imports)]
pub(crate) use eval::{inv_mod, pow_mod};
pub use parser::{parse_expression, parse_statement};
pub use statement::{
    DeclGroup, EntropyTerm, Hypothesis, InequalityStatement, LinearForm, Relation, Side, Term,
};

use thiserror::Error;

/// Words with a fixed meaning in statements; never usable as variable names.
pub const RESERVED_WORDS: &[&str] = &[
    "H", "log", "where", "iid", "indep", "nonzero", "using", "given", "identity", "assuming",
];

pub fn is_reserved(word: &str) -> bool {
    RESERVED_WORDS.contains(&word)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty input")]
    Empty,
    #[error("unexpected character `{ch}` at offset {offset}")]
    UnexpectedChar { ch: char, offset: usize },
    #[error("integer literal at offset {offset} does not fit in 64 bits")]
    IntegerOverflow { offset: usize },
    #[error("syntax error at offset {offset}: expected {expected}, found {found}")]
    Unexpected {
        expected: String,
        found: String,
        offset: usize,
    },
    #[error("syntax error at offset {offset}: unexpected end of input, expected {expected}")]
    UnexpectedEnd { expected: String, offset: usize },
    #[error("unbalanced parentheses: `(` at offset {offset} is never closed")]
    UnclosedParen { offset: usize },
    #[error("unbalanced parentheses: `)` at offset {offset} has no matching `(`")]
    UnmatchedParen { offset: usize },
    #[error("`{word}` at offset {offset} is a reserved word")]
    Reserved { word: String, offset: usize },
    #[error("zero denominator in coefficient at offset {offset}")]
    ZeroDenominator { offset: usize },
    #[error("variable `{name}` at offset {offset} is not declared")]
    Undeclared { name: String, offset: usize },
    #[error("variable `{name}` declared twice (second declaration at offset {offset})")]
    DuplicateDeclaration { name: String, offset: usize },
    #[error("unknown flag `{flag}` at offset {offset}")]
    UnknownFlag { flag: String, offset: usize },
}

impl ParseError {
    /// Byte offset into the source text, when the error has a location.
    pub fn offset(&self) -> Option<usize> {
        use ParseError::*;
        match self {
            Empty => None,
            UnexpectedChar { offset, .. }
            | IntegerOverflow { offset }
            | Unexpected { offset, .. }
            | UnexpectedEnd { offset, .. }
            | UnclosedParen { offset }
            | UnmatchedParen { offset }
            | Reserved { offset, .. }
            | ZeroDenominator { offset }
            | Undeclared { offset, .. }
            | DuplicateDeclaration { offset, .. }
            | UnknownFlag { offset, .. } => Some(*offset),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no value bound for variable `{0}`")]
    Unbound(String),
}

#[cfg(test)]
mod tests;
