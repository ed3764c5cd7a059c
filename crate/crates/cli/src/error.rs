use std::path::PathBuf;

use sumprod_core::dist::DistError;
use sumprod_core::expr::ParseError;
use sumprod_core::lab::LabError;
use sumprod_core::prover::ProverError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Json {
        context: String,
        source: serde_json::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{}", render_parse(.text, .error))]
    Parse { text: String, error: ParseError },
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error(transparent)]
    Prover(#[from] ProverError),
    #[error(transparent)]
    Dist(#[from] DistError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        CliError::Json { context: context.into(), source }
    }
}

fn parse_offset(e: &ParseError) -> Option<usize> {
    use ParseError::*;
    match e {
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

/// The parser message followed by the input and a caret under the offset.
fn render_parse(text: &str, e: &ParseError) -> String {
    match parse_offset(e) {
        Some(offset) => {
            let col = text.get(..offset.min(text.len())).map_or(offset, |s| s.chars().count());
            format!("{e}\n  {text}\n  {}^", " ".repeat(col))
        }
        None => e.to_string(),
    }
}
