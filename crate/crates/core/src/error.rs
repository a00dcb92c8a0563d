//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquareMatrix { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("layer {level} of the tower is disconnected ({components} components)")]
    DisconnectedLayer { level: u32, components: usize },

    #[error("invalid covering: {0}")]
    InvalidCovering(String),

    #[error("covering is inconsistent: {0}")]
    CoveringInconsistent(String),

    #[error("divisor has {got} coefficients, graph has {want} vertices")]
    DivisorMismatch { got: usize, want: usize },

    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("invalid group data: {0}")]
    InvalidGroup(String),

    #[error("subgroups live in different ambient layers")]
    AmbientMismatch,

    #[error("graph has {edges} unoriented edges, brute-force limit is {max}")]
    SizeGuard { edges: usize, max: usize },

    #[error("invalid voltage data: {0}")]
    InvalidVoltage(String),

    #[error("group action is not a Galois covering: {0}")]
    GaloisAxiom(String),

    #[error("invariants not stabilized by level {n_max}; increase n_max")]
    NotStabilized { n_max: u32 },

    #[error("need at least {want} tower levels, got {got}")]
    TooFewLevels { got: usize, want: usize },
}
