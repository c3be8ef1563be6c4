//! `B0` sweeps: spectrum, QFI, grained Fisher information and their ratio at
//! every grid point, plus families of sweeps over the field gradient.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, SweepConfig};
use crate::estimation::{
    fisher_information, grain_probabilities, make_partition, qfi_converged, site_probabilities,
    ConvergenceOptions, EstimationError, EstimationReport, GrainPartition, StateFamily,
};
use crate::field::{sample_vector_potential, validate_profile, FieldProfile};
use crate::hamiltonian::{build_hamiltonian, HamiltonianMatrix};
use crate::lattice::LatticeSpec;
use crate::spectrum::{
    ground_state_near, solve_lowest_with, EigenSolution, GroundState, ShiftInvertOptions,
    SolverOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Ok,
    QfiUnconverged,
    DegenerateGroundState,
    SolverFailure,
    InvalidProfile,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::QfiUnconverged => "qfi_unconverged",
            Self::DegenerateGroundState => "degenerate_ground_state",
            Self::SolverFailure => "solver_failure",
            Self::InvalidProfile => "invalid_profile",
        }
    }
}

/// Numerical settings shared by every point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SweepTolerances {
    pub solver: SolverOptions,
    pub shift_invert: ShiftInvertOptions,
    pub convergence: ConvergenceOptions,
}

impl SweepTolerances {
    pub fn for_config(config: &SweepConfig) -> Self {
        let mut t = Self::default();
        t.convergence.delta0 = config.delta0;
        t.shift_invert.seed = config.seed;
        t
    }
}

/// Everything computed at one grid point. Fields are `None` when the point
/// failed before producing them.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub b0: f64,
    pub status: PointStatus,
    pub qfi: Option<f64>,
    /// Aligned with the configured grain sizes.
    pub fi: Vec<Option<f64>>,
    pub ratio: Vec<Option<f64>>,
    pub eigenvalues: Vec<f64>,
    pub gap: Option<f64>,
    pub delta_used: Option<f64>,
    pub converged: bool,
    /// Probability mass dropped below the floor, per grain size.
    pub skipped_mass: Vec<Option<f64>>,
    pub diagnostic: Option<String>,
}

impl SweepRecord {
    fn empty(b0: f64, status: PointStatus, n_grains: usize, diagnostic: Option<String>) -> Self {
        Self {
            b0,
            status,
            qfi: None,
            fi: vec![None; n_grains],
            ratio: vec![None; n_grains],
            eigenvalues: Vec::new(),
            gap: None,
            delta_used: None,
            converged: false,
            skipped_mass: vec![None; n_grains],
            diagnostic,
        }
    }

    /// The record as an [`EstimationReport`], when the QFI is available.
    pub fn report(&self, grain_sizes: &[usize]) -> Option<EstimationReport> {
        let qfi = self.qfi?;
        let fi: BTreeMap<usize, f64> = grain_sizes
            .iter()
            .zip(&self.fi)
            .filter_map(|(&g, f)| f.map(|f| (g, f)))
            .collect();
        Some(EstimationReport::new(self.b0, qfi, fi, self.delta_used?, self.converged))
    }
}

/// Ground states of the lattice at fixed gradient as a function of `b0`,
/// solved by shift-and-invert from a nearby reference solution.
pub struct LatticeFamily {
    spec: LatticeSpec,
    m_x: f64,
    hint: f64,
    start: Vec<Complex64>,
    degeneracy_threshold: f64,
    solver: ShiftInvertOptions,
}

impl LatticeFamily {
    pub fn new(spec: LatticeSpec, m_x: f64, reference: &EigenSolution, solver: ShiftInvertOptions) -> Self {
        Self {
            spec,
            m_x,
            hint: reference.ground_energy(),
            start: reference.ground_state.clone(),
            degeneracy_threshold: reference.degeneracy_threshold,
            solver,
        }
    }

    pub fn solve(&self, b0: f64) -> Result<GroundState, EstimationError> {
        let h = lattice_hamiltonian(&self.spec, b0, self.m_x)?;
        let gs = ground_state_near(&h, self.hint, Some(&self.start), &self.solver)?;
        if gs.gap() < self.degeneracy_threshold {
            return Err(EstimationError::DegenerateGroundState {
                lambda: b0,
                gap: gs.gap(),
                threshold: self.degeneracy_threshold,
            });
        }
        Ok(gs)
    }
}

impl StateFamily for LatticeFamily {
    fn ground_state(&self, lambda: f64) -> Result<Vec<Complex64>, EstimationError> {
        Ok(self.solve(lambda)?.state)
    }
}

/// Hamiltonian of the centred profile `(b0, m_x)`, without window checks.
pub fn lattice_hamiltonian(
    spec: &LatticeSpec,
    b0: f64,
    m_x: f64,
) -> Result<HamiltonianMatrix, EstimationError> {
    let profile = FieldProfile::centered(spec, b0, m_x)?;
    Ok(build_hamiltonian(spec, &sample_vector_potential(spec, &profile))?)
}

/// Computes one grid point.
pub fn compute_point(
    spec: &LatticeSpec,
    config: &SweepConfig,
    partitions: &[GrainPartition],
    tol: &SweepTolerances,
    b0: f64,
) -> SweepRecord {
    let n_g = partitions.len();
    let profile = match FieldProfile::centered(spec, b0, config.m_x)
        .and_then(|p| validate_profile(spec, &p).map(|_| p))
    {
        Ok(p) => p,
        Err(e) => return SweepRecord::empty(b0, PointStatus::InvalidProfile, n_g, Some(e.to_string())),
    };
    let centre = build_hamiltonian(spec, &sample_vector_potential(spec, &profile))
        .map_err(|e| e.to_string())
        .and_then(|h| solve_lowest_with(&h, config.k_eigenvalues, &tol.solver).map_err(|e| e.to_string()));
    let centre = match centre {
        Ok(c) => c,
        Err(e) => return SweepRecord::empty(b0, PointStatus::SolverFailure, n_g, Some(e)),
    };

    let mut record = SweepRecord::empty(b0, PointStatus::Ok, n_g, None);
    record.eigenvalues = centre.eigenvalues.clone();
    record.gap = centre.gap;
    if centre.is_degenerate() {
        record.status = PointStatus::DegenerateGroundState;
        record.diagnostic = Some(format!(
            "gap {:e} below threshold {:e} at the grid point",
            centre.gap.unwrap_or(0.0),
            centre.degeneracy_threshold
        ));
        return record;
    }

    let family = LatticeFamily::new(*spec, config.m_x, &centre, tol.shift_invert);
    let est = match qfi_converged(&family, b0, &tol.convergence) {
        Ok(e) => e,
        Err(e) => {
            record.status = match e {
                EstimationError::DegenerateGroundState { .. } => PointStatus::DegenerateGroundState,
                _ => PointStatus::SolverFailure,
            };
            record.diagnostic = Some(e.to_string());
            return record;
        }
    };
    record.qfi = Some(est.qfi);
    record.delta_used = Some(est.delta_used);
    record.converged = est.converged;

    let grained = site_probabilities(spec, &est.lo).and_then(|lo| {
        let hi = site_probabilities(spec, &est.hi)?;
        partitions
            .iter()
            .map(|part| {
                let f = fisher_information(
                    &grain_probabilities(&lo, part)?,
                    &grain_probabilities(&hi, part)?,
                    est.delta_used,
                )?;
                if f.suspicious {
                    log::warn!("b0 = {b0}, g = {}: skipped grains carry a slope", part.g());
                }
                Ok(f)
            })
            .collect::<Result<Vec<_>, EstimationError>>()
    });
    match grained {
        Ok(fis) => {
            for (i, f) in fis.iter().enumerate() {
                record.fi[i] = Some(f.value);
                record.ratio[i] = (est.qfi > 0.0).then(|| f.value / est.qfi);
                record.skipped_mass[i] = Some(f.skipped_mass);
            }
        }
        Err(e) => {
            record.status = PointStatus::SolverFailure;
            record.diagnostic = Some(e.to_string());
            return record;
        }
    }
    if !est.converged {
        record.status = PointStatus::QfiUnconverged;
        record.diagnostic = Some(format!("QFI still moving at the step floor {:e}", est.delta_used));
    }
    record
}

/// Result of one sweep, with the configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub effective_b0_min: f64,
    pub tolerances: SweepTolerances,
    pub records: Vec<SweepRecord>,
}

impl SweepResult {
    pub fn all_ok(&self) -> bool {
        self.records.iter().all(|r| r.status == PointStatus::Ok)
    }
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult, ConfigError> {
    run_sweep_with(config, &SweepTolerances::for_config(config))
}

pub fn run_sweep_with(config: &SweepConfig, tol: &SweepTolerances) -> Result<SweepResult, ConfigError> {
    let grid = config.grid()?;
    let spec = config.lattice()?;
    let effective_b0_min = grid[0];
    if effective_b0_min > config.b0_min {
        log::info!(
            "b0_min raised from {} to m_x L = {} for m_x = {}",
            config.b0_min,
            effective_b0_min,
            config.m_x
        );
    }
    let partitions = config
        .grain_sizes
        .iter()
        .map(|&g| make_partition(&spec, g))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;

    let records: Vec<SweepRecord> = grid
        .par_iter()
        .map(|&b0| {
            let r = compute_point(&spec, config, &partitions, tol, b0);
            if let Some(d) = &r.diagnostic {
                log::warn!("b0 = {b0}: {} ({d})", r.status.as_str());
            }
            r
        })
        .collect();
    Ok(SweepResult { config: config.clone(), effective_b0_min, tolerances: *tol, records })
}

/// A gradient that was not swept, and why.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedMember {
    pub m_x: f64,
    pub reason: String,
}

/// Best gradient at one `b0` of the common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub b0: f64,
    /// `(m_x, qfi)` per swept gradient, `None` where the point failed.
    pub qfi_by_gradient: Vec<(f64, Option<f64>)>,
    pub best_m_x: Option<f64>,
    pub best_qfi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientFamily {
    pub members: Vec<SweepResult>,
    pub skipped: Vec<SkippedMember>,
    pub summary: Vec<SummaryRow>,
}

/// One sweep per gradient on a common `b0` grid.
///
/// The grid starts at the largest `m_x L` among the admissible gradients, so
/// every member is valid at every point. Gradients with `m_x L >= b0_max` are
/// skipped.
pub fn run_gradient_family(config: &SweepConfig, gradients: &[f64]) -> Result<GradientFamily, ConfigError> {
    let spec = config.lattice()?;
    let mut skipped = Vec::new();
    let mut kept = Vec::new();
    for &m_x in gradients {
        let bound = crate::field::reversal_bound(&spec, m_x);
        if !(m_x >= 0.0) || !m_x.is_finite() {
            skipped.push(SkippedMember { m_x, reason: format!("invalid gradient {m_x}") });
        } else if bound >= config.b0_max {
            let reason = format!("m_x L = {bound} leaves no room below b0_max = {}", config.b0_max);
            log::warn!("skipping m_x = {m_x}: {reason}");
            skipped.push(SkippedMember { m_x, reason });
        } else {
            kept.push((m_x, bound));
        }
    }
    if kept.is_empty() {
        return Err(ConfigError::Invalid("no gradient leaves a non-empty b0 window".into()));
    }
    let common_min = kept.iter().map(|&(_, b)| b).fold(config.b0_min, f64::max);
    let members = kept
        .iter()
        .map(|&(m_x, _)| {
            let member = SweepConfig { m_x, b0_min: common_min, ..config.clone() };
            run_sweep(&member)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let summary = (0..config.b0_steps)
        .map(|i| {
            let qfi_by_gradient: Vec<(f64, Option<f64>)> = members
                .iter()
                .map(|m| {
                    let r = &m.records[i];
                    (m.config.m_x, if r.status == PointStatus::Ok { r.qfi } else { None })
                })
                .collect();
            let best = qfi_by_gradient
                .iter()
                .filter_map(|&(m, q)| q.map(|q| (m, q)))
                .fold(None, |acc: Option<(f64, f64)>, (m, q)| match acc {
                    Some((_, bq)) if bq >= q => acc,
                    _ => Some((m, q)),
                });
            SummaryRow {
                b0: members[0].records[i].b0,
                qfi_by_gradient,
                best_m_x: best.map(|b| b.0),
                best_qfi: best.map(|b| b.1),
            }
        })
        .collect();
    Ok(GradientFamily { members, skipped, summary })
}
