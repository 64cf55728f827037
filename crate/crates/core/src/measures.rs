//! Scalar figures of merit: pure-state concurrence, Uhlmann fidelity,
//! super-fidelity, the average concurrence of an ensemble and the exact
//! two-qubit concurrence.

use nalgebra::SVD;
use num_complex::Complex64;

use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector};
use crate::state::{self, purity, BipartiteSplit, PureState, QuantumState};
use crate::tolerance;

/// Concurrence `√(2(1 − Tr ρ_A²))` of a pure bipartite state.
///
/// Evaluated as `2 (Σ |2x2 minors of Ψ|²)^{1/2}` where `Ψ[a][b] = ψ[a·dB + b]`.
/// The two expressions agree for unit vectors, but the minor sum does not
/// cancel catastrophically near product states.
pub fn concurrence_pure(psi: &PureState, split: BipartiteSplit) -> Result<f64> {
    if psi.dim() != split.total() {
        return Err(Error::DimensionMismatch {
            expected: split.total(),
            found: psi.dim(),
        });
    }
    Ok(weighted_concurrence(psi.amplitudes().as_slice(), split))
}

/// `‖φ‖² · C(φ/‖φ‖)` for an unnormalized vector `φ`. Homogeneous of degree
/// two in `φ`, which makes it the natural term of an average concurrence.
pub(crate) fn weighted_concurrence(phi: &[Complex64], split: BipartiteSplit) -> f64 {
    let (da, db) = (split.dim_a(), split.dim_b());
    let mut acc = 0.0;
    for a in 0..da {
        for a2 in a + 1..da {
            let row = &phi[a * db..(a + 1) * db];
            let row2 = &phi[a2 * db..(a2 + 1) * db];
            for b in 0..db {
                for b2 in b + 1..db {
                    acc += (row[b] * row2[b2] - row[b2] * row2[b]).norm_sqr();
                }
            }
        }
    }
    2.0 * acc.sqrt()
}

/// Uhlmann fidelity `[Tr √(√ρ1 ρ2 √ρ1)]²`, computed as the squared trace
/// norm of `√ρ1 √ρ2`.
pub fn fidelity(rho1: &QuantumState, rho2: &QuantumState) -> Result<f64> {
    same_dim(rho1, rho2)?;
    let s1 = linalg::sqrt_psd(rho1.matrix())?;
    let s2 = linalg::sqrt_psd(rho2.matrix())?;
    let nuclear: f64 = linalg::singular_values(&(s1 * s2))?.iter().sum();
    if !nuclear.is_finite() {
        return Err(Error::NumericalBreakdown("non-finite fidelity"));
    }
    Ok((nuclear * nuclear).clamp(0.0, 1.0))
}

/// Super-fidelity `Tr ρ1ρ2 + √((1 − Tr ρ1²)(1 − Tr ρ2²))`.
pub fn super_fidelity(rho1: &QuantumState, rho2: &QuantumState) -> Result<f64> {
    same_dim(rho1, rho2)?;
    let cross = linalg::trace_product_hermitian(rho1.matrix(), rho2.matrix());
    let mixedness = ((1.0 - purity(rho1)).max(0.0) * (1.0 - purity(rho2)).max(0.0)).sqrt();
    Ok((cross + mixedness).clamp(0.0, 1.0))
}

/// `Σ_j t_j C(ψ_j)`.
pub fn average_concurrence(dec: &Decomposition, split: BipartiteSplit) -> Result<f64> {
    dec.weights()
        .iter()
        .zip(dec.states())
        .map(|(t, psi)| concurrence_pure(psi, split).map(|c| t * c))
        .sum()
}

/// The four values `μ1 ≥ μ2 ≥ μ3 ≥ μ4`: square roots of the eigenvalues of
/// `ρ (σy⊗σy) ρ* (σy⊗σy)`.
///
/// Computed as the singular values of the symmetric matrix
/// `τ_ij = <v_i| σy⊗σy |v_j*>` over the subnormalized eigenvectors
/// `v_i = √λ_i e_i`. Eigenvalues at roundoff level are discarded, so a
/// rank-`r` input contributes exactly `r` values (the rest are zero).
pub fn spin_flip_spectrum(rho: &QuantumState) -> Result<[f64; 4]> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let eig = linalg::eigh(rho.matrix())?;
    let kept: Vec<CVector> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > tolerance::ROUNDOFF)
        .map(|(k, &l)| eig.vectors.column(k).scale(l.sqrt()))
        .collect();
    let r = kept.len();
    let flipped: Vec<[Complex64; 4]> = kept.iter().map(|v| spin_flip(v.as_slice())).collect();
    let tau = CMatrix::from_fn(r, r, |i, j| {
        kept[i]
            .iter()
            .zip(flipped[j].iter())
            .map(|(x, y)| x.conj() * y)
            .sum()
    });
    let sv = linalg::singular_values(&tau)?;
    let mut mu = [0.0; 4];
    for (dst, s) in mu.iter_mut().zip(sv) {
        *dst = s;
    }
    Ok(mu)
}

/// `σy⊗σy |v*>`.
fn spin_flip(v: &[Complex64]) -> [Complex64; 4] {
    [-v[3].conj(), v[2].conj(), v[1].conj(), -v[0].conj()]
}

/// Exact two-qubit concurrence `max(0, μ1 − μ2 − μ3 − μ4)`.
pub fn concurrence_two_qubit(rho: &QuantumState) -> Result<f64> {
    let mu = spin_flip_spectrum(rho)?;
    Ok((mu[0] - mu[1] - mu[2] - mu[3]).clamp(0.0, 1.0))
}

/// Purifications of `rho1` and `rho2` on `d·d` dimensions whose squared
/// overlap equals `fidelity(rho1, rho2)`.
///
/// Starts from the canonical purifications (amplitude matrices `Ψ1`, `Ψ2`),
/// takes the SVD `Ψ1†Ψ2 = U Σ V†` and rotates the second ancilla so its
/// amplitude matrix becomes `Ψ2 V U†`. The overlap is then `Tr Σ`.
pub fn aligned_purifications(
    rho1: &QuantumState,
    rho2: &QuantumState,
) -> Result<(PureState, PureState)> {
    same_dim(rho1, rho2)?;
    let d = rho1.dim();
    let (p1, _) = state::purify(rho1)?;
    let (p2, _) = state::purify(rho2)?;
    let m1 = amplitude_matrix(&p1, d);
    let m2 = amplitude_matrix(&p2, d);
    let cross = m1.adjoint() * &m2;
    let svd = SVD::try_new(cross, true, true, 1e-15, 10_000)
        .ok_or(Error::NumericalBreakdown("SVD did not converge"))?;
    let u = svd.u.ok_or(Error::NumericalBreakdown("missing U factor"))?;
    let v_t = svd
        .v_t
        .ok_or(Error::NumericalBreakdown("missing V factor"))?;
    let rotated = m2 * v_t.adjoint() * u.adjoint();
    let amps = CVector::from_iterator(d * d, (0..d * d).map(|i| rotated[(i / d, i % d)]));
    Ok((p1, PureState::normalized(amps)?))
}

fn amplitude_matrix(psi: &PureState, d: usize) -> CMatrix {
    let a = psi.amplitudes();
    CMatrix::from_fn(d, d, |i, k| a[i * d + k])
}

fn same_dim(rho1: &QuantumState, rho2: &QuantumState) -> Result<()> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho1.dim(),
            found: rho2.dim(),
        });
    }
    Ok(())
}
