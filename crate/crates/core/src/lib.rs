//! Concurrence, fidelity and the observable concurrence bounds for
//! bipartite quantum states.
//!
//! The crate provides validated state types ([`state`]), reproducible
//! random ensembles ([`random`]), the scalar measures ([`measures`]), a
//! search over pure-state ensembles for the mixed-state concurrence
//! ([`decomposition`]), checks for the bounds
//! `2[Tr ρ² − Tr ρ_A²] ≤ C² ≤ 2[1 − Tr ρ_A²]` and the fidelity inequalities
//! behind them ([`bounds`]), and the campaign runner and file formats used
//! by the command-line tool ([`campaign`], [`io`]).

pub mod bounds;
pub mod campaign;
pub mod decomposition;
pub mod error;
pub mod io;
pub mod linalg;
pub mod measures;
pub mod random;
pub mod state;
pub mod tolerance;

pub use bounds::{
    chain_check, lower_bound, proof_chain_check, sandwich_check, upper_bound, BoundsReport,
    ChainReport, Check, Reference,
};
pub use decomposition::{
    eigen_ensemble, from_isometry, minimize_average_concurrence, Decomposition, SearchConfig,
    SearchResult,
};
pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector};
pub use measures::{
    average_concurrence, concurrence_pure, concurrence_two_qubit, fidelity, super_fidelity,
};
pub use num_complex::Complex64;
pub use random::{haar_pure, random_density, random_isometry, Isometry, SeedSpec};
pub use state::{
    density_from_pure, overlap, partial_trace, purify, purity, tensor, validate_density,
    BipartiteSplit, PureState, QuantumState, Subsystem,
};
