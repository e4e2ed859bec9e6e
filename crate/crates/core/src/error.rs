use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A problem, mesh or graph could not be built from the given inputs.
    #[error("construction error: {0}")]
    Construction(String),

    /// An argument had the wrong size or an out-of-range value.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A linear solve broke down.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The exhaustive sampler was asked to enumerate a graph that is too large.
    #[error(
        "graph has {n_qubits} qubits, exact enumeration is limited to {limit}; use the simulated-annealing sampler"
    )]
    Capacity { n_qubits: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
