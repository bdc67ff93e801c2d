use thiserror::Error;

use crate::qbf::Var;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown variable {0}")]
    UnknownVariable(Var),

    #[error("invalid poset: {0}")]
    InvalidPoset(String),

    #[error("graph and poset are defined over different variable sets")]
    ElementMismatch,

    #[error("invalid elimination ordering: {0}")]
    InvalidOrdering(String),

    #[error("ordering is incompatible with the poset: {later} must be eliminated before {earlier}")]
    Incompatible { later: Var, earlier: Var },

    #[error("{what} has size {size}, above the bound {bound}")]
    BoundExceeded {
        what: &'static str,
        size: usize,
        bound: usize,
    },

    #[error("invalid tree decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("the robber wins from the start position")]
    RobberWins,

    #[error("unknown instance family {0:?}")]
    UnknownFamily(String),

    #[error("family parameter {0} out of range")]
    FamilyRange(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
