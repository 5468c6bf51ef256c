use thiserror::Error;

use crate::matrix::Matrix;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix dimension {0} outside supported range 2..=16")]
    Dimension(usize),

    #[error("expected {expected} entries for a {d}x{d} matrix, got {got}", d = .dim)]
    EntryCount { dim: usize, expected: usize, got: usize },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("card(K) ≥ 2 required, got {0} generator(s)")]
    TooFewGenerators(usize),

    #[error("generator {index} does not match the set: {reason}")]
    Incompatible { index: usize, reason: String },

    #[error("word index {index} out of range for {card} generators")]
    WordIndex { index: usize, card: usize },

    #[error("empty word")]
    EmptyWord,

    #[error("eigenvalue iteration did not converge for {0:?}")]
    NoConvergence(Box<Matrix>),

    #[error("enumeration needs {needed} product evaluations at depth {depth}, budget is {budget}")]
    BudgetExceeded { depth: usize, needed: u128, budget: u64 },

    #[error("line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("invalid parameter: {0}")]
    Domain(String),
}
