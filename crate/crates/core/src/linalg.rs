//! Dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const EIGEN_EPS: f64 = 1e-15;
const MAX_ITER: usize = 10_000;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Eigen-decomposition of a Hermitian matrix, sorted by descending
/// eigenvalue (ties keep the solver's order). Each eigenvector is rotated
/// so its largest-modulus component is real and positive.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn eigh(m: &CMatrix) -> Result<Eigh> {
    let n = m.nrows();
    let eig = SymmetricEigen::try_new(m.clone(), EIGEN_EPS, MAX_ITER).ok_or(
        Error::NumericalBreakdown("Hermitian eigensolver did not converge"),
    )?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    if order.iter().any(|&i| !eig.eigenvalues[i].is_finite()) {
        return Err(Error::NumericalBreakdown("non-finite eigenvalue"));
    }
    let mut vectors = CMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let col = eig.eigenvectors.column(src);
        let pivot = col
            .iter()
            .copied()
            .enumerate()
            .max_by(|a, b| {
                a.1.norm()
                    .partial_cmp(&b.1.norm())
                    .unwrap()
                    .then(b.0.cmp(&a.0))
            })
            .map(|(_, z)| z)
            .unwrap_or(ONE);
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            ONE
        };
        for i in 0..n {
            vectors[(i, dst)] = col[i] * phase;
        }
    }
    Ok(Eigh { values, vectors })
}

/// Principal square root of a positive semidefinite Hermitian matrix.
/// Eigenvalues at roundoff level are set to zero.
pub fn sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    let e = eigh(m)?;
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for (k, &lambda) in e.values.iter().enumerate() {
        if lambda <= crate::tolerance::ROUNDOFF {
            continue;
        }
        let s = lambda.sqrt();
        let v = e.vectors.column(k);
        for j in 0..n {
            let vj = v[j].conj() * s;
            for i in 0..n {
                out[(i, j)] += v[i] * vj;
            }
        }
    }
    Ok(out)
}

pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    let svd = SVD::try_new(m.clone(), false, false, EIGEN_EPS, MAX_ITER)
        .ok_or(Error::NumericalBreakdown("SVD did not converge"))?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(s)
}

/// `Tr(A B)` for Hermitian `A`, `B`, without forming the product.
pub fn trace_product_hermitian(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.transpose().iter())
        .map(|(x, y)| (x * y).re)
        .sum()
}

/// `Tr(A^2)` for Hermitian `A` (squared Frobenius norm).
pub fn trace_square_hermitian(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Kronecker product with the left factor on the slow index.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eigh_sorts_descending_and_fixes_phase() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c(0.25, 0.0), c(0.0, -0.1), c(0.0, 0.1), c(0.75, 0.0)],
        );
        let e = eigh(&m).unwrap();
        assert!(e.values[0] >= e.values[1]);
        for k in 0..2 {
            let col = e.vectors.column(k);
            let pivot = col
                .iter()
                .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
                .unwrap();
            assert!(pivot.im.abs() < 1e-15 && pivot.re > 0.0);
        }
        let rebuilt = &e.vectors
            * CMatrix::from_diagonal(&CVector::from_iterator(
                2,
                e.values.iter().map(|&v| c(v, 0.0)),
            ))
            * e.vectors.adjoint();
        assert!(max_abs_diff(&rebuilt, &m) < 1e-14);
    }

    #[test]
    fn sqrt_psd_squares_back() {
        let m =
            CMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.4, 0.0)]);
        let s = sqrt_psd(&m).unwrap();
        assert!(max_abs_diff(&(&s * &s), &m) < 1e-13);
    }

    #[test]
    fn trace_helpers_agree_with_products() {
        let a =
            CMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(0.4, 0.0)]);
        let b = CMatrix::from_row_slice(
            2,
            2,
            &[c(0.3, 0.0), c(-0.2, 0.05), c(-0.2, -0.05), c(0.7, 0.0)],
        );
        assert!((trace_product_hermitian(&a, &b) - (&a * &b).trace().re).abs() < 1e-15);
        assert!((trace_square_hermitian(&a) - (&a * &a).trace().re).abs() < 1e-15);
    }
}
