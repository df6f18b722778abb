use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Mismatched sizes between coupled objects (embedding, increments, graph).
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A configuration value violates its invariants.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A speed function is structurally unusable for simulation.
    #[error("invalid speed function: {0}")]
    Speed(String),

    /// A graph violates its invariants (indices, weights, duplicates).
    #[error("graph error: {0}")]
    Graph(String),

    /// A text input (edge list, speed table) failed to parse.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// An operation refused to run (e.g. exhaustive search past its size cap).
    #[error("{0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
