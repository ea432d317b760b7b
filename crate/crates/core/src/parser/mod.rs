//! Text formats: `.bn` networks, `.ev` evidence and the JSON report.

mod evidence;
mod lexer;
mod network;
mod report;

pub use evidence::parse_evidence;
pub use network::{parse_network, write_network};
pub use report::{emit_hypercubes, emit_report};

use std::fmt;

use thiserror::Error;

use crate::model::ModelError;

/// 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl Position {
    pub fn new(line: usize, column: usize) -> Self {
        Self { line, column }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("`{variable}` names unknown parent `{parent}`")]
    UnknownParent { variable: String, parent: String },
    #[error("`{variable}` has no value `{value}`")]
    UnknownValue { variable: String, value: String },
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("variable `{variable}` declares value `{value}` twice")]
    DuplicateValue { variable: String, value: String },
    #[error("`{variable}` lists parent `{parent}` twice")]
    DuplicateParent { variable: String, parent: String },
    #[error("second table for `{0}`")]
    DuplicateCpt(String),
    #[error("`{0}` is bound twice")]
    DuplicateBinding(String),
    #[error("no table for `{0}`")]
    MissingCpt(String),
    #[error("variable `{0}` needs at least two values")]
    DomainTooSmall(String),
    #[error("table of `{variable}` has {found} rows, expected {expected}")]
    RowCount {
        variable: String,
        expected: usize,
        found: usize,
    },
    #[error("table of `{variable}`, row {row}: {found} entries, expected {expected}")]
    RowArity {
        variable: String,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("`{0}` is not a probability literal")]
    BadNumber(String),
    #[error("table of `{variable}`, row {row}: entry {value} outside [0, 1]")]
    ProbabilityRange { variable: String, row: usize, value: f64 },
    #[error("table of `{variable}`, row {row}: row sum {sum} is not 1")]
    RowSum { variable: String, row: usize, sum: f64 },
    #[error("cycle through edge {from} -> {to}")]
    Cycle { from: String, to: String },
    #[error(transparent)]
    Model(ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{position}: {kind}")]
pub struct ParseError {
    pub position: Position,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub fn new(position: Position, kind: ParseErrorKind) -> Self {
        Self { position, kind }
    }
}
