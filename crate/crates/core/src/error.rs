//! Error type shared across the toolkit.
//!
//! Variants map onto the CLI exit codes: parse/validation problems are usage
//! errors (exit 2), contract violations are exit 3, exhausted search budgets
//! are exit 4, and internal errors (which indicate a bug, not bad input) are
//! exit 1.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text. `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Structurally well-formed input that violates a model invariant
    /// (e.g. a delay table that is not strictly increasing).
    #[error("invalid input: {0}")]
    Validation(String),

    /// A precondition of the called operation does not hold
    /// (e.g. a state that must be a Nash equilibrium is not).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Clique enumeration hit its output cap before finishing.
    /// `partial` is the number of cliques found before giving up.
    #[error("clique cap exceeded: more than {cap} cliques (found {partial} before aborting)")]
    CliqueCap { cap: usize, partial: usize },

    /// An exhaustive search ran out of budget. The search was truncated;
    /// nothing is known about the part that was not explored.
    #[error("search budget exceeded: {0}")]
    Budget(String),

    /// A condition that should be unreachable. Indicates a bug in this
    /// crate, not a problem with the input.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Validation(_) | Error::Io(_) => 2,
            Error::Contract(_) => 3,
            Error::CliqueCap { .. } | Error::Budget(_) => 4,
            Error::Internal(_) => 1,
        }
    }

    /// Stable machine-parseable category tag used in CLI diagnostics.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::Contract(_) => "contract",
            Error::CliqueCap { .. } => "clique-cap",
            Error::Budget(_) => "budget",
            Error::Internal(_) => "internal",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
