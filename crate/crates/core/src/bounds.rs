//! Observable bounds on the squared concurrence and checks of every link
//! in the fidelity argument that produces them.
//!
//! For any ensemble `{t_i, |ψ_i>}` of `ρ`, with `a = (Σ t_i C(ψ_i))²`,
//! `b = 2 Tr(ρ_A²)` and `c = 2 Tr ρ²`:
//!
//! ```text
//! 2 ≥ a + b ≥ c
//! ```
//!
//! Applied to an optimal ensemble this gives
//! `2[Tr ρ² − Tr ρ_A²] ≤ C² ≤ 2[1 − Tr ρ_A²]`. Nothing in the argument uses
//! optimality, so [`proof_chain_check`] accepts any ensemble.

use serde::{Deserialize, Serialize};

use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::linalg;
use crate::measures::{average_concurrence, concurrence_pure, fidelity, super_fidelity};
use crate::state::{
    overlap, partial_trace, purity, BipartiteSplit, PureState, QuantumState, Subsystem,
};
use crate::tolerance;

/// Tolerance on the ensemble double-sum identities.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Tolerance on lower = upper = C² for pure states.
pub const PURE_TIGHTNESS_TOL: f64 = 1e-9;

/// `2[Tr ρ² − Tr ρ_A²]`. Negative values are returned as-is.
pub fn lower_bound(rho: &QuantumState, split: BipartiteSplit) -> Result<f64> {
    lower_bound_on(rho, split, Subsystem::A)
}

/// `2[1 − Tr ρ_A²]`.
pub fn upper_bound(rho: &QuantumState, split: BipartiteSplit) -> Result<f64> {
    upper_bound_on(rho, split, Subsystem::A)
}

/// [`lower_bound`] using the marginal on `keep`.
pub fn lower_bound_on(rho: &QuantumState, split: BipartiteSplit, keep: Subsystem) -> Result<f64> {
    let marginal = partial_trace(rho, split, keep)?;
    Ok(2.0 * (purity(rho) - purity(&marginal)))
}

/// [`upper_bound`] using the marginal on `keep`.
pub fn upper_bound_on(rho: &QuantumState, split: BipartiteSplit, keep: Subsystem) -> Result<f64> {
    let marginal = partial_trace(rho, split, keep)?;
    Ok(2.0 * (1.0 - purity(&marginal)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// A `≥` relation; slack is left side minus right side.
    Inequality,
    /// An equality; slack is minus the absolute residual.
    Identity,
}

/// One verified relation. It passes when `slack ≥ −tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub kind: CheckKind,
    pub slack: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn inequality(name: &str, slack: f64) -> Self {
        Self {
            name: name.to_owned(),
            kind: CheckKind::Inequality,
            slack,
            tolerance: tolerance::INEQUALITY,
        }
    }

    pub fn identity(name: &str, residual: f64, tol: f64) -> Self {
        Self {
            name: name.to_owned(),
            kind: CheckKind::Identity,
            slack: -residual.abs(),
            tolerance: tol,
        }
    }

    pub fn passed(&self) -> bool {
        self.slack >= -self.tolerance
    }
}

/// The three ensemble sums `a`, `b`, `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProofTerms {
    /// `(Σ t_i C(ψ_i))²`
    pub a: f64,
    /// `2 Tr(ρ_A²)`
    pub b: f64,
    /// `2 Tr ρ²`
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub marginal: Subsystem,
    pub lower_sq: f64,
    pub upper_sq: f64,
    pub c_reference: Option<f64>,
    pub proof_terms: Option<ProofTerms>,
    pub checks: Vec<Check>,
}

impl BoundsReport {
    fn new(rho: &QuantumState, split: BipartiteSplit, marginal: Subsystem) -> Result<Self> {
        let reduced = partial_trace(rho, split, marginal)?;
        let p_marginal = purity(&reduced);
        Ok(Self {
            marginal,
            lower_sq: 2.0 * (purity(rho) - p_marginal),
            upper_sq: 2.0 * (1.0 - p_marginal),
            c_reference: None,
            proof_terms: None,
            checks: Vec::new(),
        })
    }

    /// `max(0, lower_sq)`.
    pub fn lower_sq_clamped(&self) -> f64 {
        self.lower_sq.max(0.0)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Re-evaluates every inequality at `tol`; identities keep theirs.
    pub fn with_inequality_tolerance(mut self, tol: f64) -> Self {
        for c in &mut self.checks {
            if c.kind == CheckKind::Inequality {
                c.tolerance = tol;
            }
        }
        self
    }
}

/// Both bounds on `rho` with the ordering checks `upper ≥ lower` and
/// `0 ≤ upper ≤ 2`. When `rho` is pure, also checks that both bounds equal
/// the squared pure-state concurrence.
pub fn bounds_report(
    rho: &QuantumState,
    split: BipartiteSplit,
    marginal: Subsystem,
) -> Result<BoundsReport> {
    let mut report = BoundsReport::new(rho, split, marginal)?;
    report.checks.push(Check::inequality(
        "bounds_order",
        report.upper_sq - report.lower_sq,
    ));
    report.checks.push(Check::inequality(
        "upper_range",
        report.upper_sq.min(2.0 - report.upper_sq),
    ));
    if rho.rank()? == 1 {
        let dec = crate::decomposition::eigen_ensemble(rho)?;
        let c = concurrence_pure(&dec.states()[0], split)?;
        let c2 = c * c;
        report.c_reference = Some(c);
        let dev = (report.lower_sq - c2)
            .abs()
            .max((report.upper_sq - c2).abs());
        report
            .checks
            .push(Check::identity("pure_tightness", dev, PURE_TIGHTNESS_TOL));
    }
    Ok(report)
}

/// The fidelity links for two pure bipartite states and their marginals:
/// `1 ≥ G(ρ_i^A, ρ_j^A) ≥ F(ρ_i^A, ρ_j^A) ≥ F(ρ_i, ρ_j) = |<ψ_i|ψ_j>|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub g_marginal: f64,
    pub f_marginal: f64,
    pub f_joint: f64,
    /// `1 − g`, `g − f_marginal`, `f_marginal − f_joint`.
    pub link_slacks: [f64; 3],
}

impl ChainReport {
    pub fn min_slack(&self) -> f64 {
        self.link_slacks
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.min_slack() >= -tol
    }
}

pub fn chain_check(
    psi_i: &PureState,
    psi_j: &PureState,
    split: BipartiteSplit,
) -> Result<ChainReport> {
    chain_check_on(psi_i, psi_j, split, Subsystem::A)
}

pub fn chain_check_on(
    psi_i: &PureState,
    psi_j: &PureState,
    split: BipartiteSplit,
    keep: Subsystem,
) -> Result<ChainReport> {
    let ri = psi_i.reduced(split, keep)?;
    let rj = psi_j.reduced(split, keep)?;
    let g = super_fidelity(&ri, &rj)?;
    let f = fidelity(&ri, &rj)?;
    let joint = overlap(psi_i, psi_j)?;
    Ok(ChainReport {
        g_marginal: g,
        f_marginal: f,
        f_joint: joint,
        link_slacks: [1.0 - g, g - f, f - joint],
    })
}

/// Verifies the ensemble expansions of `a`, `b`, `c` as double sums over
/// the members and the chain `2 ≥ a + b ≥ c`.
///
/// Checks: `identity_a`, `identity_b`, `identity_c` (within
/// [`IDENTITY_TOL`]), `chain_upper` (`2 − a − b`) and `chain_lower`
/// (`a + b − c`).
pub fn proof_chain_check(dec: &Decomposition, split: BipartiteSplit) -> Result<BoundsReport> {
    proof_chain_check_on(dec, split, Subsystem::A)
}

pub fn proof_chain_check_on(
    dec: &Decomposition,
    split: BipartiteSplit,
    keep: Subsystem,
) -> Result<BoundsReport> {
    if dec.target_dim() != split.total() {
        return Err(Error::DimensionMismatch {
            expected: split.total(),
            found: dec.target_dim(),
        });
    }
    let rho = dec.reconstruct()?;
    let mut report = BoundsReport::new(&rho, split, keep)?;

    let avg = average_concurrence(dec, split)?;
    let a = avg * avg;
    let b = 2.0 * purity(&partial_trace(&rho, split, keep)?);
    let c = 2.0 * purity(&rho);

    let t = dec.weights();
    let states = dec.states();
    let marginals: Vec<QuantumState> = states
        .iter()
        .map(|s| s.reduced(split, keep))
        .collect::<Result<_>>()?;
    let mixedness: Vec<f64> = marginals
        .iter()
        .map(|m| (1.0 - purity(m)).max(0.0))
        .collect();

    let (mut a_sum, mut b_sum, mut c_sum) = (0.0, 0.0, 0.0);
    for i in 0..t.len() {
        for j in 0..t.len() {
            let w = t[i] * t[j];
            a_sum += w * (mixedness[i] * mixedness[j]).sqrt();
            b_sum +=
                w * linalg::trace_product_hermitian(marginals[i].matrix(), marginals[j].matrix());
            c_sum += w * overlap(&states[i], &states[j])?;
        }
    }
    let (a_sum, b_sum, c_sum) = (2.0 * a_sum, 2.0 * b_sum, 2.0 * c_sum);

    report.c_reference = Some(avg);
    report.proof_terms = Some(ProofTerms { a, b, c });
    report
        .checks
        .push(Check::identity("identity_a", a - a_sum, IDENTITY_TOL));
    report
        .checks
        .push(Check::identity("identity_b", b - b_sum, IDENTITY_TOL));
    report
        .checks
        .push(Check::identity("identity_c", c - c_sum, IDENTITY_TOL));
    report
        .checks
        .push(Check::inequality("chain_upper", 2.0 - (a + b)));
    report
        .checks
        .push(Check::inequality("chain_lower", (a + b) - c));
    Ok(report)
}

/// How a reference concurrence value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Reference {
    /// The exact concurrence (closed form).
    Exact(f64),
    /// An upper estimate, such as a searched average concurrence.
    UpperEstimate(f64),
}

impl Reference {
    pub fn value(&self) -> f64 {
        match *self {
            Reference::Exact(c) | Reference::UpperEstimate(c) => c,
        }
    }
}

/// Checks `lower ≤ C²` (`sandwich_lower`) and, for an exact reference,
/// `C² ≤ upper` (`sandwich_upper`).
pub fn sandwich_check(
    rho: &QuantumState,
    split: BipartiteSplit,
    reference: Reference,
) -> Result<BoundsReport> {
    sandwich_check_on(rho, split, reference, Subsystem::A)
}

pub fn sandwich_check_on(
    rho: &QuantumState,
    split: BipartiteSplit,
    reference: Reference,
    keep: Subsystem,
) -> Result<BoundsReport> {
    let mut report = BoundsReport::new(rho, split, keep)?;
    let c = reference.value();
    report.c_reference = Some(c);
    report
        .checks
        .push(Check::inequality("sandwich_lower", c * c - report.lower_sq));
    if let Reference::Exact(_) = reference {
        report
            .checks
            .push(Check::inequality("sandwich_upper", report.upper_sq - c * c));
    }
    Ok(report)
}
