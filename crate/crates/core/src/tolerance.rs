//! Numerical tolerances shared across the crate.

/// Allowed deviation of a squared norm from one.
pub const NORM: f64 = 1e-9;
/// Allowed deviation of a trace from one.
pub const TRACE: f64 = 1e-9;
/// Allowed max-entry deviation from Hermiticity.
pub const HERMITIAN: f64 = 1e-9;
/// Eigenvalues in `[-PSD, 0)` are clamped to zero; anything lower is rejected.
pub const PSD: f64 = 1e-9;
/// Generic numerical comparison.
pub const NUM: f64 = 1e-8;
/// Slack allowed on every inequality check.
pub const INEQUALITY: f64 = 1e-8;
/// Eigenvalues at or below this are treated as structural zeros when
/// counting rank or building ensembles.
pub const RANK: f64 = 1e-12;
/// Eigenvalues at or below this are indistinguishable from roundoff on
/// unit-trace matrices and are dropped before taking square roots.
pub const ROUNDOFF: f64 = 1e-14;

/// Default cap on the Hilbert-space dimension accepted by validators.
pub const DEFAULT_MAX_DIM: usize = 64;
