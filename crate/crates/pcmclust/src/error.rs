//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by validation, solvers and file handling.
#[derive(Debug, Error)]
pub enum Error {
    /// The input grid is not a square matrix of order at least 2.
    #[error("matrix '{label}': {detail}")]
    BadShape { label: String, detail: String },

    /// A diagonal entry is missing or differs from 1.
    #[error("matrix '{label}': diagonal entry ({i},{i}) must be present and equal to 1")]
    BadDiagonal { label: String, i: usize },

    /// A pair of mirrored entries violates a_ij * a_ji = 1.
    #[error("matrix '{label}': entries ({i},{j})/({j},{i}) are not reciprocal: {detail}")]
    NonReciprocal {
        label: String,
        i: usize,
        j: usize,
        detail: String,
    },

    /// An entry is zero, negative, or not finite.
    #[error("matrix '{label}': entry ({i},{j}) = {value} is not a positive finite number")]
    NonPositiveEntry {
        label: String,
        i: usize,
        j: usize,
        value: f64,
    },

    /// The comparison graph of present entries is not connected.
    #[error(
        "matrix '{label}': comparison graph is disconnected (alternative {index} unreachable)"
    )]
    DisconnectedGraph { label: String, index: usize },

    /// An operation that needs every comparison was given an incomplete matrix.
    #[error("matrix '{label}' has missing entries; this operation needs a complete matrix")]
    IncompleteMatrix { label: String },

    /// No random index is known for the given matrix order.
    #[error("no random index available for matrices of order {n}")]
    MissingRandomIndex { n: usize },

    /// The dominant-eigenvalue iteration hit its cap without converging.
    #[error("dominant eigenvalue iteration did not converge within {max_iter} iterations")]
    NoConvergence { max_iter: usize },

    /// Two matrices that must share an order do not.
    #[error("matrices '{a}' (order {an}) and '{b}' (order {bn}) have different orders")]
    OrderMismatch {
        a: String,
        an: usize,
        b: String,
        bn: usize,
    },

    /// Two matrices share no off-diagonal comparison, so no dissimilarity is defined.
    #[error("matrices '{a}' and '{b}' share no off-diagonal comparison")]
    NoCommonComparisons { a: String, b: String },

    /// k exceeds the number of objects that may serve as medoids.
    #[error("k = {k} exceeds the number of eligible medoids ({eligible})")]
    Infeasible { k: usize, eligible: usize },

    /// The branch-and-bound node budget was exhausted before proving optimality.
    #[error("exact search exceeded its node budget of {budget}; consider the heuristic solver")]
    SearchBudgetExceeded { budget: u64 },

    /// Silhouette values are undefined when everything is in one cluster.
    #[error("silhouette is undefined for a single cluster")]
    SingleCluster,

    /// Two rankings that must have equal length do not.
    #[error("rankings have different lengths ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },

    /// An operation over a collection of matrices received none.
    #[error("no matrices supplied")]
    EmptyInput,

    /// A dataset label occurs more than once.
    #[error("duplicate matrix label '{label}'")]
    DuplicateLabel { label: String },

    /// A dataset file could not be parsed.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// An invalid run configuration.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Failure writing output files.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
