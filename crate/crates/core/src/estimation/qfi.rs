//! Pure-state quantum Fisher information from ground-state fidelity.

use num_complex::Complex64;

use super::{EstimationError, NORM_TOLERANCE};

/// A map from a parameter value to a normalised pure state.
pub trait StateFamily {
    fn ground_state(&self, lambda: f64) -> Result<Vec<Complex64>, EstimationError>;
}

/// `8 (1 - |⟨ψ_lo|ψ_hi⟩|) / δ²`.
///
/// The overlap is evaluated as the angle between the two rays, so the result
/// keeps full relative precision when the states are nearly parallel.
pub fn qfi_from_fidelity(
    psi_lo: &[Complex64],
    psi_hi: &[Complex64],
    delta: f64,
) -> Result<f64, EstimationError> {
    if psi_lo.len() != psi_hi.len() {
        return Err(EstimationError::LengthMismatch { expected: psi_lo.len(), got: psi_hi.len() });
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(EstimationError::InvalidStep(delta));
    }
    let a2: f64 = psi_lo.iter().map(|c| c.norm_sqr()).sum();
    let b2: f64 = psi_hi.iter().map(|c| c.norm_sqr()).sum();
    for norm in [a2.sqrt(), b2.sqrt()] {
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(EstimationError::NotNormalized { norm });
        }
    }
    let overlap: Complex64 = psi_lo.iter().zip(psi_hi).map(|(a, b)| a.conj() * b).sum();
    let coef = overlap / a2;
    let perp = psi_lo
        .iter()
        .zip(psi_hi)
        .map(|(a, b)| (b - a * coef).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let phi = (perp * a2.sqrt()).atan2(overlap.norm());
    let s = (0.5 * phi).sin();
    Ok(16.0 * s * s / (delta * delta))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceOptions {
    pub delta0: f64,
    /// Stop once successive estimates agree to this relative tolerance.
    pub rel_tol: f64,
    /// Give up (unconverged) rather than halve below this step.
    pub delta_floor: f64,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        Self { delta0: 1e-4, rel_tol: 1e-2, delta_floor: 1e-7 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QfiEstimate {
    pub qfi: f64,
    pub delta_used: f64,
    pub converged: bool,
    pub halvings: usize,
    /// States at `λ - δ/2` and `λ + δ/2` for the reported step.
    pub lo: Vec<Complex64>,
    pub hi: Vec<Complex64>,
}

/// QFI with the step halved from `delta0` until two successive values agree.
pub fn qfi_converged<F: StateFamily + ?Sized>(
    family: &F,
    lambda: f64,
    opts: &ConvergenceOptions,
) -> Result<QfiEstimate, EstimationError> {
    if !(opts.delta0 > 0.0) || !opts.delta0.is_finite() {
        return Err(EstimationError::InvalidStep(opts.delta0));
    }
    let eval = |delta: f64| -> Result<(f64, Vec<Complex64>, Vec<Complex64>), EstimationError> {
        let lo = family.ground_state(lambda - 0.5 * delta)?;
        let hi = family.ground_state(lambda + 0.5 * delta)?;
        Ok((qfi_from_fidelity(&lo, &hi, delta)?, lo, hi))
    };

    let mut delta = opts.delta0;
    let (mut prev, mut lo, mut hi) = eval(delta)?;
    let mut halvings = 0;
    loop {
        let next = 0.5 * delta;
        if next < opts.delta_floor {
            return Ok(QfiEstimate { qfi: prev, delta_used: delta, converged: false, halvings, lo, hi });
        }
        let (h, l, u) = eval(next)?;
        halvings += 1;
        delta = next;
        let agree = (h - prev).abs() <= opts.rel_tol * h.abs().max(prev.abs());
        (prev, lo, hi) = (h, l, u);
        if agree {
            return Ok(QfiEstimate { qfi: prev, delta_used: delta, converged: true, halvings, lo, hi });
        }
    }
}
