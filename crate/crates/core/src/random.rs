//! Reproducible random pure states, Ginibre-induced density matrices and
//! Haar isometries.
//!
//! Every draw is keyed by a [`SeedSpec`]. The generator is ChaCha20 with
//! the master seed as key and `stream_index` selecting one of 2^64
//! independent keystreams, so parallel consumers never share state and the
//! output does not depend on scheduling.

use nalgebra::linalg::QR;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::state::{PureState, QuantumState};

/// Tolerance on `V†V = I` for [`Isometry`].
pub const ISOMETRY_TOL: f64 = 1e-10;

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }

    /// Same master seed, different stream.
    pub fn with_stream(&self, stream_index: u64) -> Self {
        Self {
            master_seed: self.master_seed,
            stream_index,
        }
    }

    /// A new master seed derived from this stream and `label`, for
    /// consumers that need a whole family of streams of their own.
    pub fn derive(&self, label: u64) -> Self {
        let mixed =
            splitmix64(splitmix64(self.master_seed ^ splitmix64(self.stream_index)) ^ label);
        Self {
            master_seed: mixed,
            stream_index: 0,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Standard complex Gaussian: real and imaginary parts i.i.d. N(0, 1).
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    // fill row by row so the draw order does not depend on storage layout
    let mut m = CMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// Haar-random pure state in dimension `d`.
pub fn haar_pure(d: usize, seed: SeedSpec) -> PureState {
    haar_pure_with(d, &mut seed.rng())
}

pub fn haar_pure_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PureState {
    assert!(d >= 1, "dimension must be positive");
    loop {
        let v = CVector::from_iterator(d, (0..d).map(|_| complex_gaussian(rng)));
        if let Ok(psi) = PureState::normalized(v) {
            return psi;
        }
    }
}

/// Ginibre-induced random density matrix `G G† / Tr(G G†)` with `G` a
/// `d x rank` complex Gaussian matrix.
pub fn random_density(d: usize, rank: usize, seed: SeedSpec) -> Result<QuantumState> {
    random_density_with(d, rank, &mut seed.rng())
}

pub fn random_density_with<R: Rng + ?Sized>(
    d: usize,
    rank: usize,
    rng: &mut R,
) -> Result<QuantumState> {
    if rank == 0 || rank > d {
        return Err(Error::RankMismatch {
            expected: d,
            found: rank,
        });
    }
    let g = gaussian_matrix(d, rank, rng);
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    QuantumState::new(w.unscale(tr))
}

/// An `m x r` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Isometry {
    entries: CMatrix,
}

impl Isometry {
    pub fn new(entries: CMatrix) -> Result<Self> {
        let (m, r) = entries.shape();
        if m < r || r == 0 {
            return Err(Error::DimensionMismatch {
                expected: r,
                found: m,
            });
        }
        let gram = entries.adjoint() * &entries;
        let deviation = (&gram - CMatrix::identity(r, r))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if deviation > ISOMETRY_TOL {
            return Err(Error::NotIsometry { deviation });
        }
        Ok(Self { entries })
    }

    pub fn identity(r: usize) -> Self {
        Self {
            entries: CMatrix::identity(r, r),
        }
    }

    pub(crate) fn from_unchecked(entries: CMatrix) -> Self {
        Self { entries }
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }
}

/// Haar-random `m x r` isometry: the first `r` columns of the unitary QR
/// factor of an `m x m` Ginibre matrix, with `R`'s diagonal made real and
/// positive.
pub fn random_isometry(m: usize, r: usize, seed: SeedSpec) -> Result<Isometry> {
    random_isometry_with(m, r, &mut seed.rng())
}

pub fn random_isometry_with<R: Rng + ?Sized>(m: usize, r: usize, rng: &mut R) -> Result<Isometry> {
    if r == 0 || m < r {
        return Err(Error::DimensionMismatch {
            expected: r,
            found: m,
        });
    }
    let z = gaussian_matrix(m, m, rng);
    let qr = QR::new(z);
    let q = qr.q();
    let rr = qr.r();
    let mut v = CMatrix::zeros(m, r);
    for j in 0..r {
        let d = rr[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..m {
            v[(i, j)] = q[(i, j)] * phase;
        }
    }
    Isometry::new(v)
}
