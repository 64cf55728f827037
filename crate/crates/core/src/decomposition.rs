//! Pure-state ensembles of a density matrix and a derivative-free search
//! for the ensemble with the smallest average concurrence.
//!
//! Every size-`m` ensemble of a rank-`r` state `ρ = Σ_k λ_k |e_k><e_k|` is
//! obtained from an `m x r` isometry `V` through the unnormalized vectors
//! `|φ_j> = Σ_k V_jk √λ_k |e_k>`, with weights `t_j = <φ_j|φ_j>`. The search
//! walks over isometries with Givens rotations on pairs of rows, so the
//! isometry constraint holds exactly at every step.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::measures::{average_concurrence, weighted_concurrence};
use crate::random::{random_isometry, Isometry, SeedSpec};
use crate::state::{BipartiteSplit, PureState, QuantumState};
use crate::tolerance;

/// Tolerance on `Σ t_j = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-10;
/// Ensemble members with weight below this are dropped.
pub const MIN_WEIGHT: f64 = 1e-14;

/// A weighted list of pure states `{t_j, |ψ_j>}` with `Σ t_j = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    weights: Vec<f64>,
    states: Vec<PureState>,
    target_dim: usize,
}

impl Decomposition {
    pub fn new(weights: Vec<f64>, states: Vec<PureState>) -> Result<Self> {
        if weights.is_empty() || weights.len() != states.len() {
            return Err(Error::InvalidDecomposition(format!(
                "{} weights for {} states",
                weights.len(),
                states.len()
            )));
        }
        if let Some(t) = weights.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::InvalidDecomposition(format!(
                "weight {t} is not positive"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidDecomposition(format!("weights sum to {sum}")));
        }
        let target_dim = states[0].dim();
        if let Some(bad) = states.iter().find(|s| s.dim() != target_dim) {
            return Err(Error::DimensionMismatch {
                expected: target_dim,
                found: bad.dim(),
            });
        }
        Ok(Self {
            weights,
            states,
            target_dim,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `Σ_j t_j |ψ_j><ψ_j|`, unvalidated.
    pub fn reconstruct_matrix(&self) -> CMatrix {
        let d = self.target_dim;
        let mut m = CMatrix::zeros(d, d);
        for (t, psi) in self.weights.iter().zip(&self.states) {
            let v = psi.amplitudes();
            for j in 0..d {
                let vj = v[j].conj() * *t;
                for i in 0..d {
                    m[(i, j)] += v[i] * vj;
                }
            }
        }
        m
    }

    /// The density matrix this ensemble represents.
    pub fn reconstruct(&self) -> Result<QuantumState> {
        QuantumState::new(self.reconstruct_matrix())
            .map_err(|e| Error::ReconstructionFailure(Box::new(e)))
    }

    /// Builds an ensemble from unnormalized vectors `φ_j`, dropping members
    /// with `‖φ_j‖² < MIN_WEIGHT` and renormalizing the weights.
    fn from_unnormalized<'a, I>(vectors: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [Complex64]>,
    {
        let mut weights = Vec::new();
        let mut states = Vec::new();
        for phi in vectors {
            let t: f64 = phi.iter().map(|z| z.norm_sqr()).sum();
            if t < MIN_WEIGHT {
                continue;
            }
            weights.push(t);
            states.push(PureState::normalized(linalg::CVector::from_column_slice(
                phi,
            ))?);
        }
        let sum: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|t| *t /= sum);
        Self::new(weights, states)
    }
}

/// Subnormalized eigenvectors `√λ_k e_k` of the eigenvalues above
/// [`tolerance::RANK`], in descending order.
fn spectral_vectors(rho: &QuantumState) -> Result<Vec<Vec<Complex64>>> {
    let eig = linalg::eigh(rho.matrix())?;
    Ok(eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > tolerance::RANK)
        .map(|(k, &l)| eig.vectors.column(k).iter().map(|z| z * l.sqrt()).collect())
        .collect())
}

/// The spectral ensemble: nonzero eigenvalues (descending) with their
/// eigenvectors. Degenerate eigenspaces take the solver's basis.
pub fn eigen_ensemble(rho: &QuantumState) -> Result<Decomposition> {
    let vecs = spectral_vectors(rho)?;
    Decomposition::from_unnormalized(vecs.iter().map(|v| v.as_slice()))
}

/// The ensemble `|φ_j> = Σ_k V_jk √λ_k |e_k>` generated by an `m x r`
/// isometry, where `r` is the rank of `rho`.
pub fn from_isometry(rho: &QuantumState, v: &Isometry) -> Result<Decomposition> {
    let basis = spectral_vectors(rho)?;
    if v.cols() != basis.len() {
        return Err(Error::RankMismatch {
            expected: basis.len(),
            found: v.cols(),
        });
    }
    let phis = mix_rows(v.entries(), &basis);
    Decomposition::from_unnormalized(phis.iter().map(|p| p.as_slice()))
}

fn mix_rows(v: &CMatrix, basis: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let d = basis.first().map_or(0, |b| b.len());
    (0..v.nrows())
        .map(|j| {
            let mut phi = vec![linalg::ZERO; d];
            for (k, e) in basis.iter().enumerate() {
                let w = v[(j, k)];
                for (p, x) in phi.iter_mut().zip(e) {
                    *p += w * x;
                }
            }
            phi
        })
        .collect()
}

/// Settings for [`minimize_average_concurrence`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SearchConfig {
    /// Ensemble size `m`; `None` uses `r²` for a rank-`r` target.
    pub ensemble_size: Option<usize>,
    pub restarts: usize,
    pub max_sweeps: usize,
    /// Stop once a full sweep improves the objective by less than this.
    pub step_tolerance: f64,
    pub seed: SeedSpec,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            ensemble_size: None,
            restarts: 20,
            max_sweeps: 200,
            step_tolerance: 1e-9,
            seed: SeedSpec::new(0, 0),
        }
    }
}

/// Outcome of a single descent from one starting isometry.
#[derive(Debug, Clone)]
pub struct Descent {
    pub isometry: Isometry,
    pub decomposition: Decomposition,
    /// Objective at the start, then after each completed sweep.
    pub history: Vec<f64>,
}

impl Descent {
    pub fn value(&self) -> f64 {
        *self
            .history
            .last()
            .expect("history holds the starting value")
    }
}

/// Best ensemble found over all restarts.
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub decomposition: Decomposition,
    /// Average concurrence of `decomposition`.
    pub concurrence: f64,
    /// Index of the restart that produced the result.
    pub restart: usize,
    /// Descent history of the winning restart.
    pub history: Vec<f64>,
}

const COARSE_GRID: usize = 12;
const GOLDEN_ITERS: usize = 20;
/// Every this many sweeps (starting with the first) the line searches scan
/// the full angle range; the sweeps in between refine locally.
const GLOBAL_EVERY: usize = 10;
const PHASES: [f64; 4] = [
    0.0,
    std::f64::consts::FRAC_PI_4,
    std::f64::consts::FRAC_PI_2,
    3.0 * std::f64::consts::FRAC_PI_4,
];

/// Givens-rotation descent from `start` on the average concurrence.
///
/// One sweep visits every row pair `(j, k)` and, for each phase
/// `α ∈ {0, π/4, π/2, 3π/4}`, looks for the rotation angle
/// `θ ∈ [-π/2, π/2]` that minimizes the two affected terms by golden-section
/// search (see [`line_search`]). A rotation is applied only if it strictly
/// lowers the objective, so the sweep history is non-increasing.
pub fn descend(
    rho: &QuantumState,
    split: BipartiteSplit,
    start: Isometry,
    max_sweeps: usize,
    step_tolerance: f64,
) -> Result<Descent> {
    if rho.dim() != split.total() {
        return Err(Error::DimensionMismatch {
            expected: split.total(),
            found: rho.dim(),
        });
    }
    let basis = spectral_vectors(rho)?;
    if start.cols() != basis.len() {
        return Err(Error::RankMismatch {
            expected: basis.len(),
            found: start.cols(),
        });
    }
    let mut v = start.into_entries();
    let mut phis = mix_rows(&v, &basis);
    let mut terms: Vec<f64> = phis
        .iter()
        .map(|p| weighted_concurrence(p, split))
        .collect();
    let m = phis.len();
    let mut history = vec![terms.iter().sum::<f64>()];

    let mut buf_j = vec![linalg::ZERO; split.total()];
    let mut buf_k = vec![linalg::ZERO; split.total()];

    for sweep in 0..max_sweeps {
        let global = sweep % GLOBAL_EVERY == 0;
        for j in 0..m {
            for k in j + 1..m {
                for &alpha in &PHASES {
                    let base = terms[j] + terms[k];
                    let phase = Complex64::from_polar(1.0, alpha);
                    let mut eval = |theta: f64| {
                        rotate(&phis[j], &phis[k], theta, phase, &mut buf_j, &mut buf_k);
                        weighted_concurrence(&buf_j, split) + weighted_concurrence(&buf_k, split)
                    };
                    let (theta, best) = line_search(&mut eval, global);
                    if best < base {
                        rotate(&phis[j], &phis[k], theta, phase, &mut buf_j, &mut buf_k);
                        phis[j].copy_from_slice(&buf_j);
                        phis[k].copy_from_slice(&buf_k);
                        terms[j] = weighted_concurrence(&phis[j], split);
                        terms[k] = weighted_concurrence(&phis[k], split);
                        rotate_isometry_rows(&mut v, j, k, theta, phase);
                    }
                }
            }
        }
        let value: f64 = terms.iter().sum();
        let previous = *history.last().unwrap();
        history.push(value.min(previous));
        if previous - value < step_tolerance {
            break;
        }
    }

    let decomposition = Decomposition::from_unnormalized(phis.iter().map(|p| p.as_slice()))?;
    Ok(Descent {
        isometry: Isometry::from_unchecked(v),
        decomposition,
        history,
    })
}

/// `φ_j' = cos θ φ_j − sin θ e^{-iα} φ_k`, `φ_k' = sin θ e^{iα} φ_j + cos θ φ_k`.
fn rotate(
    pj: &[Complex64],
    pk: &[Complex64],
    theta: f64,
    phase: Complex64,
    out_j: &mut [Complex64],
    out_k: &mut [Complex64],
) {
    let (s, c) = theta.sin_cos();
    let sp = phase * s;
    let spc = phase.conj() * s;
    for i in 0..pj.len() {
        out_j[i] = pj[i] * c - pk[i] * spc;
        out_k[i] = pj[i] * sp + pk[i] * c;
    }
}

fn rotate_isometry_rows(v: &mut CMatrix, j: usize, k: usize, theta: f64, phase: Complex64) {
    let (s, c) = theta.sin_cos();
    let sp = phase * s;
    let spc = phase.conj() * s;
    for col in 0..v.ncols() {
        let (a, b) = (v[(j, col)], v[(k, col)]);
        v[(j, col)] = a * c - b * spc;
        v[(k, col)] = a * sp + b * c;
    }
}

/// Minimizes `f` over the rotation angle. A global search scans a coarse
/// grid over `[-π/2, π/2]` and refines the bracket around the best point;
/// a local search refines `[-h, h]` around zero directly, `h` being one
/// grid step. Returns `(θ, f(θ))`; `f(0)` is always evaluated so the result
/// never exceeds it.
fn line_search(f: &mut impl FnMut(f64) -> f64, global: bool) -> (f64, f64) {
    use std::f64::consts::FRAC_PI_2;
    let h = 2.0 * FRAC_PI_2 / COARSE_GRID as f64;
    let mut best = (0.0, f(0.0));
    if global {
        for i in 0..=COARSE_GRID {
            if i == COARSE_GRID / 2 {
                continue;
            }
            let t = -FRAC_PI_2 + h * i as f64;
            let val = f(t);
            if val < best.1 {
                best = (t, val);
            }
        }
    }
    let (mut lo, mut hi) = (best.0 - h, best.0 + h);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..GOLDEN_ITERS {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    for (t, val) in [(x1, f1), (x2, f2)] {
        if val < best.1 {
            best = (t, val);
        }
    }
    best
}

/// Searches over ensembles of `rho` for the smallest average concurrence,
/// an upper estimate of the mixed-state concurrence.
///
/// Restart `i` starts from a Haar-random isometry drawn from
/// `cfg.seed.with_stream(i)`. Restarts run in parallel; the result is the
/// lowest value, ties broken by restart index.
pub fn minimize_average_concurrence(
    rho: &QuantumState,
    split: BipartiteSplit,
    cfg: &SearchConfig,
) -> Result<SearchResult> {
    if rho.dim() != split.total() {
        return Err(Error::DimensionMismatch {
            expected: split.total(),
            found: rho.dim(),
        });
    }
    let rank = rho.rank()?;
    let m = cfg.ensemble_size.unwrap_or(rank * rank);
    if m < rank {
        return Err(Error::InvalidConfig(format!(
            "ensemble size {m} is below the rank {rank}"
        )));
    }
    if cfg.restarts == 0 {
        return Err(Error::InvalidConfig("restarts must be at least 1".into()));
    }

    let runs: Vec<Result<Descent>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|i| {
            let start = random_isometry(m, rank, cfg.seed.with_stream(i as u64))?;
            descend(rho, split, start, cfg.max_sweeps, cfg.step_tolerance)
        })
        .collect();

    let mut best: Option<SearchResult> = None;
    for (restart, run) in runs.into_iter().enumerate() {
        let run = run?;
        let concurrence = average_concurrence(&run.decomposition, split)?;
        if best.as_ref().is_none_or(|b| concurrence < b.concurrence) {
            best = Some(SearchResult {
                decomposition: run.decomposition,
                concurrence,
                restart,
                history: run.history,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}
