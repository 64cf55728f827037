use thiserror::Error;

/// Errors raised while constructing or operating on quantum states.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |M - M^dagger| entry = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not positive semidefinite: smallest eigenvalue = {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace is not one: trace = {trace}, |trace - 1| = {deviation:e}")]
    TraceNotOne { trace: f64, deviation: f64 },

    #[error("state vector is not normalized: squared norm = {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {dim} exceeds the configured cap of {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("invalid split {dim_a}x{dim_b}: both factors must be at least 1")]
    InvalidSplit { dim_a: usize, dim_b: usize },

    #[error("isometry has {found} columns but the state has rank {expected}")]
    RankMismatch { expected: usize, found: usize },

    #[error("matrix is not an isometry: max |V^dagger V - I| entry = {deviation:e}")]
    NotIsometry { deviation: f64 },

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("decomposition does not reconstruct a valid density matrix: {0}")]
    ReconstructionFailure(Box<Error>),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(&'static str),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
