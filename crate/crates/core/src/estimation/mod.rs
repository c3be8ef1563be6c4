//! Parameter-estimation figures of merit for ground-state families.
//!
//! * [`qfi`]: quantum Fisher information from the fidelity of neighbouring
//!   ground states, with a step-halving convergence loop.
//! * [`probability`]: position probabilities and their coarse-graining into
//!   `g × g` grains.
//! * [`fisher`]: classical Fisher information of a grained position measurement.
//! * [`two_level`]: closed-form QFI of a two-level anticrossing.
//! * [`cramer_rao`]: Monte-Carlo check of the Cramér–Rao bound with a
//!   maximum-likelihood estimator.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::field::FieldError;
use crate::hamiltonian::HamiltonianError;
use crate::spectrum::SpectrumError;

pub mod cramer_rao;
pub mod fisher;
pub mod probability;
pub mod qfi;
pub mod two_level;

pub use cramer_rao::{cramer_rao_mc, mle_grid, CramerRaoCheck, LikelihoodTable};
pub use fisher::{fisher_information, fisher_information_with_floor, FisherInformation, P_FLOOR};
pub use probability::{
    grain_probabilities, make_partition, site_probabilities, GrainPartition, SiteProbability,
};
pub use qfi::{qfi_converged, qfi_from_fidelity, ConvergenceOptions, QfiEstimate, StateFamily};
pub use two_level::{two_level_qfi, TwoLevelModel};

/// States must be unit vectors to this accuracy.
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error("state norm {norm} is not 1")]
    NotNormalized { norm: f64 },
    #[error("step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("grain size {g} outside 1..={max}")]
    InvalidGrain { g: usize, max: usize },
    #[error("two-level model has Δ = 0 at λ = {lambda}")]
    SingularTwoLevel { lambda: f64 },
    #[error("degenerate ground state at λ = {lambda}: gap {gap:e} below {threshold:e}")]
    DegenerateGroundState { lambda: f64, gap: f64, threshold: f64 },
    #[error("Fisher information must be positive, got {0}")]
    NonPositiveFisher(f64),
    #[error("need at least one sample and one trial")]
    NoSamples,
    #[error("estimator grid does not bracket the true value {0}")]
    GridDoesNotBracket(f64),
    #[error("estimate pinned at grid edge {estimate} in trial {trial}")]
    GridEdge { estimate: f64, trial: usize },
    #[error("invalid outcome distribution: {0}")]
    InvalidDistribution(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// Estimation figures at one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationReport {
    pub lambda: f64,
    pub qfi: f64,
    pub fi_by_grain: BTreeMap<usize, f64>,
    pub ratio_by_grain: BTreeMap<usize, f64>,
    pub delta_lambda_used: f64,
    pub converged: bool,
}

impl EstimationReport {
    /// `R = F / H` for every grain; `NaN` when `H = 0`.
    pub fn new(
        lambda: f64,
        qfi: f64,
        fi_by_grain: BTreeMap<usize, f64>,
        delta_lambda_used: f64,
        converged: bool,
    ) -> Self {
        let ratio_by_grain = fi_by_grain
            .iter()
            .map(|(&g, &f)| (g, if qfi > 0.0 { f / qfi } else { f64::NAN }))
            .collect();
        Self { lambda, qfi, fi_by_grain, ratio_by_grain, delta_lambda_used, converged }
    }
}
