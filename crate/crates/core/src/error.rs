use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    /// `column` is 1-based and counts characters.
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },

    #[error(
        "component {component:?} spans {size} tuples, over the enumeration budget of {budget}"
    )]
    EnumerationBudget {
        component: Vec<usize>,
        size: u128,
        budget: u64,
    },

    #[error("{count} subsets of size {k} exceed the subset budget of {budget}")]
    SubsetBudget { k: usize, count: u128, budget: u64 },

    #[error("event {name:?} (index {index}) has probability 1, so no point avoids every event")]
    CertainEvent { index: usize, name: String },

    #[error("no composition map validated (last attempt: alpha = {alpha}, q = {q}, rho = {rho})")]
    Construction { alpha: f64, q: usize, rho: f64 },

    #[error("root iteration did not converge after {iterations} iterations")]
    NoConvergence {
        iterations: usize,
        partial: Vec<[f64; 2]>,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
