//! Certainty grades: a finite generator poset and the distributive lattice it
//! generates.

mod expr;
mod lattice;
mod normal;
mod poset;

use thiserror::Error;

use crate::lexer::SyntaxError;

pub use expr::GradeExpr;
pub(crate) use expr::parse_grade;
pub use lattice::{Lattice, MAX_ENUMERATION_GENERATORS, MAX_LATTICE_ELEMENTS, MAX_ORACLE_GENERATORS};
pub use normal::{GradeNF, MeetSet};
pub use poset::GeneratorPoset;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GradeError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("order contains a cycle among {}", .0.join(", "))]
    Cycle(Vec<String>),
    #[error("undeclared generator `{0}`")]
    UndeclaredGenerator(String),
    #[error("missing top generator")]
    MissingTop,
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("size guard exceeded: {0}")]
    GuardExceeded(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}
