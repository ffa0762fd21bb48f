use thiserror::Error;

use crate::validation::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alternative space must be non-empty and strictly increasing: {0}")]
    InvalidSpace(String),

    #[error("society must contain at least one agent")]
    EmptySociety,

    #[error("society of {0} agents does not fit in a 64-bit coalition")]
    TooManyAgents(usize),

    #[error("{what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("{0} is not an element of the alternative space")]
    UnknownElement(String),

    #[error("invalid ranking: {0}")]
    InvalidRanking(String),

    #[error("malformed rule: {0}")]
    Malformed(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("rule violates {} condition(s): {}", .0.len(), render(.0))]
    Invalid(Vec<Violation>),

    #[error("coalition enumeration over {agents} agents exceeds the guard of {guard}")]
    GuardExceeded { agents: usize, guard: usize },

    #[error("{needed} profiles exceed the exhaustive budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    #[error("not expressible as a median rule: {0}")]
    Inexpressible(String),

    #[error("cannot generate a rule: {0}")]
    Unsatisfiable(String),
}

fn render(violations: &[Violation]) -> String {
    violations.iter().map(|v| v.code.code()).collect::<Vec<_>>().join(", ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
