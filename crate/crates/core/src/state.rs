//! Validated pure and mixed states on finite-dimensional Hilbert spaces,
//! plus the basic operations on them: tensor products, partial traces,
//! purifications, overlaps and purity.
//!
//! Composite spaces use the row-major convention: for a split `dA x dB`
//! the basis index of `|a> ⊗ |b>` is `a * dB + b`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ZERO};
use crate::tolerance;

/// Factorization of a Hilbert space of dimension `dim_a * dim_b` into
/// subsystems A and B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct BipartiteSplit {
    dim_a: usize,
    dim_b: usize,
}

impl BipartiteSplit {
    pub fn new(dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 {
            return Err(Error::InvalidSplit { dim_a, dim_b });
        }
        Ok(Self { dim_a, dim_b })
    }

    /// Two qubits.
    pub const QUBITS: Self = Self { dim_a: 2, dim_b: 2 };

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn total(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn dim_of(&self, which: Subsystem) -> usize {
        match which {
            Subsystem::A => self.dim_a,
            Subsystem::B => self.dim_b,
        }
    }

    fn check(&self, dim: usize) -> Result<()> {
        if dim != self.total() {
            return Err(Error::DimensionMismatch {
                expected: self.total(),
                found: dim,
            });
        }
        Ok(())
    }
}

impl std::fmt::Display for BipartiteSplit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.dim_a, self.dim_b)
    }
}

/// Which factor of a [`BipartiteSplit`] to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// A unit-norm state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
}

impl PureState {
    /// Wraps `amplitudes`, which must already have unit norm.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let norm_sq = amplitudes.norm_squared();
        if (norm_sq - 1.0).abs() > tolerance::NORM || !norm_sq.is_finite() {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes `amplitudes`; fails only for the zero vector.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized {
                norm_sq: norm * norm,
            });
        }
        Ok(Self {
            amplitudes: amplitudes / Complex64::new(norm, 0.0),
        })
    }

    pub fn from_slice(amplitudes: &[Complex64]) -> Result<Self> {
        Self::new(CVector::from_column_slice(amplitudes))
    }

    /// Computational basis state `|index>` in dimension `dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(
            index < dim,
            "basis index {index} out of range for dimension {dim}"
        );
        let mut v = CVector::zeros(dim);
        v[index] = linalg::ONE;
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    /// `|self> ⊗ |other>`.
    pub fn tensor(&self, other: &PureState) -> PureState {
        Self {
            amplitudes: self.amplitudes.kronecker(&other.amplitudes),
        }
    }

    /// Reduced density matrix of `|ψ><ψ|` on the kept subsystem, computed
    /// from the amplitude matrix without forming the full projector.
    pub fn reduced(&self, split: BipartiteSplit, keep: Subsystem) -> Result<QuantumState> {
        split.check(self.dim())?;
        let m = reduced_matrix(self.amplitudes.as_slice(), split, keep);
        QuantumState::new(m)
    }
}

/// `ΨΨ†` (keep A) or `ΨᵀΨ*` (keep B) where `Ψ[a][b] = ψ[a * dB + b]`.
pub(crate) fn reduced_matrix(psi: &[Complex64], split: BipartiteSplit, keep: Subsystem) -> CMatrix {
    let (da, db) = (split.dim_a, split.dim_b);
    match keep {
        Subsystem::A => CMatrix::from_fn(da, da, |a, a2| {
            (0..db)
                .map(|b| psi[a * db + b] * psi[a2 * db + b].conj())
                .sum()
        }),
        Subsystem::B => CMatrix::from_fn(db, db, |b, b2| {
            (0..da)
                .map(|a| psi[a * db + b] * psi[a * db + b2].conj())
                .sum()
        }),
    }
}

/// A validated density matrix: Hermitian, positive semidefinite and of
/// unit trace. Optionally carries the bipartite split it was defined on.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    matrix: CMatrix,
    split: Option<BipartiteSplit>,
}

impl QuantumState {
    /// Validates `matrix` with the default dimension cap.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        Self::with_max_dim(matrix, tolerance::DEFAULT_MAX_DIM)
    }

    /// Validates `matrix` as a density matrix of dimension at most `max_dim`.
    ///
    /// The stored matrix is the Hermitian part `(M + M†)/2`. Eigenvalues
    /// in `[-τ_psd, 0)` are clamped to zero and the matrix rebuilt from
    /// the clamped spectrum; eigenvalues within roundoff of zero are left
    /// alone so that valid matrices are stored bit-for-bit.
    pub fn with_max_dim(matrix: CMatrix, max_dim: usize) -> Result<Self> {
        let (rows, cols) = matrix.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows > max_dim {
            return Err(Error::DimensionTooLarge {
                dim: rows,
                cap: max_dim,
            });
        }
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NumericalBreakdown("non-finite matrix entry"));
        }
        let adjoint = matrix.adjoint();
        let deviation = linalg::max_abs_diff(&matrix, &adjoint);
        if deviation > tolerance::HERMITIAN {
            return Err(Error::NotHermitian { deviation });
        }
        let mut hermitian = (&matrix + &adjoint).scale(0.5);

        let eig = linalg::eigh(&hermitian)?;
        let min_eigenvalue = *eig.values.last().expect("non-empty spectrum");
        if min_eigenvalue < -tolerance::PSD {
            return Err(Error::NotPositive { min_eigenvalue });
        }
        if min_eigenvalue < -tolerance::ROUNDOFF {
            let clamped = CVector::from_iterator(
                rows,
                eig.values.iter().map(|&v| Complex64::new(v.max(0.0), 0.0)),
            );
            let rebuilt = &eig.vectors * CMatrix::from_diagonal(&clamped) * eig.vectors.adjoint();
            hermitian = (&rebuilt + rebuilt.adjoint()).scale(0.5);
        }

        let trace = hermitian.trace().re;
        let trace_dev = (trace - 1.0).abs();
        if trace_dev > tolerance::TRACE {
            return Err(Error::TraceNotOne {
                trace,
                deviation: trace_dev,
            });
        }
        Ok(Self {
            matrix: hermitian,
            split: None,
        })
    }

    /// Maximally mixed state `I/d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        let m = CMatrix::identity(dim, dim).scale(1.0 / dim as f64);
        Self {
            matrix: m,
            split: None,
        }
    }

    /// Attaches a bipartite split; fails if the dimensions disagree.
    pub fn with_split(mut self, split: BipartiteSplit) -> Result<Self> {
        split.check(self.dim())?;
        self.split = Some(split);
        Ok(self)
    }

    pub fn split(&self) -> Option<BipartiteSplit> {
        self.split
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(linalg::eigh(&self.matrix)?.values)
    }

    /// Number of eigenvalues above [`tolerance::RANK`].
    pub fn rank(&self) -> Result<usize> {
        Ok(self
            .eigenvalues()?
            .iter()
            .filter(|&&v| v > tolerance::RANK)
            .count())
    }
}

/// Validates `matrix` as a density matrix.
pub fn validate_density(matrix: CMatrix) -> Result<QuantumState> {
    QuantumState::new(matrix)
}

/// `|ψ><ψ|`.
pub fn density_from_pure(psi: &PureState) -> QuantumState {
    let v = &psi.amplitudes;
    let m = v * v.adjoint();
    let m = (&m + m.adjoint()).scale(0.5);
    QuantumState {
        matrix: m,
        split: None,
    }
}

/// Kronecker product `a ⊗ b`; the result carries the split `dA x dB`.
pub fn tensor(a: &QuantumState, b: &QuantumState) -> QuantumState {
    let split = BipartiteSplit {
        dim_a: a.dim(),
        dim_b: b.dim(),
    };
    QuantumState {
        matrix: linalg::kron(&a.matrix, &b.matrix),
        split: Some(split),
    }
}

/// Reduced state on the `keep` subsystem.
pub fn partial_trace(
    state: &QuantumState,
    split: BipartiteSplit,
    keep: Subsystem,
) -> Result<QuantumState> {
    split.check(state.dim())?;
    Ok(QuantumState {
        matrix: partial_trace_matrix(&state.matrix, split, keep),
        split: None,
    })
}

/// Partial trace on a bare matrix; linear, no validation.
pub(crate) fn partial_trace_matrix(m: &CMatrix, split: BipartiteSplit, keep: Subsystem) -> CMatrix {
    let (da, db) = (split.dim_a, split.dim_b);
    match keep {
        Subsystem::A => CMatrix::from_fn(da, da, |a, a2| {
            (0..db).map(|b| m[(a * db + b, a2 * db + b)]).sum()
        }),
        Subsystem::B => CMatrix::from_fn(db, db, |b, b2| {
            (0..da).map(|a| m[(a * db + b, a * db + b2)]).sum()
        }),
    }
}

/// Canonical purification `Σ_k √λ_k |e_k> ⊗ |k>` on `d·d` dimensions, with
/// the ancilla basis ordered by descending eigenvalue. Tracing out the
/// ancilla (subsystem B of the returned split) recovers `rho`.
pub fn purify(rho: &QuantumState) -> Result<(PureState, BipartiteSplit)> {
    let d = rho.dim();
    let eig = linalg::eigh(&rho.matrix)?;
    let mut amps = CVector::zeros(d * d);
    for (k, &lambda) in eig.values.iter().enumerate() {
        if lambda <= tolerance::ROUNDOFF {
            continue;
        }
        let w = lambda.sqrt();
        for a in 0..d {
            amps[a * d + k] = eig.vectors[(a, k)] * w;
        }
    }
    // Dropping roundoff-level eigenvalues moves the norm by O(1e-14); renormalize.
    let psi = PureState::normalized(amps)?;
    Ok((psi, BipartiteSplit { dim_a: d, dim_b: d }))
}

/// `|<ψ1|ψ2>|²`.
pub fn overlap(psi1: &PureState, psi2: &PureState) -> Result<f64> {
    if psi1.dim() != psi2.dim() {
        return Err(Error::DimensionMismatch {
            expected: psi1.dim(),
            found: psi2.dim(),
        });
    }
    let inner: Complex64 = psi1
        .amplitudes
        .iter()
        .zip(psi2.amplitudes.iter())
        .fold(ZERO, |acc, (x, y)| acc + x.conj() * y);
    Ok(inner.norm_sqr().min(1.0))
}

/// `Tr ρ²`.
pub fn purity(state: &QuantumState) -> f64 {
    linalg::trace_square_hermitian(&state.matrix)
}
