use std::fmt;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("problem file contains no rules, declarations or examples")]
    EmptyProblem,

    #[error("invalid framework or problem:\n{}", DisplayList(.0))]
    Invalid(Vec<Violation>),

    #[error("assumption `{0}` cannot be the head of a rule (flatness)")]
    FlatnessViolation(String),

    #[error("variable `{variable}` in `{rule}` is not range restricted")]
    RangeRestriction { variable: String, rule: String },

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("{count} ground assumptions exceed the enumeration bound of {bound}")]
    AssumptionBoundExceeded { count: usize, bound: usize },

    #[error("predicate `{0}` already exists in the framework")]
    NameCollision(String),

    #[error("external solver: {0}")]
    ExternalSolver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

struct DisplayList<'a>(&'a [Violation]);

impl fmt::Display for DisplayList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {v}")?;
        }
        Ok(())
    }
}
