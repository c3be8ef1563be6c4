//! Classical Fisher information of a discrete outcome distribution.

use super::EstimationError;

/// Outcomes whose midpoint probability falls below this are skipped.
pub const P_FLOOR: f64 = 1e-14;

/// A skipped outcome with a slope above this is reported as suspicious.
pub const SKIPPED_SLOPE_WARNING: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherInformation {
    pub value: f64,
    /// Total midpoint probability of the skipped outcomes.
    pub skipped_mass: f64,
    /// Some skipped outcome had `|dP| > SKIPPED_SLOPE_WARNING`.
    pub suspicious: bool,
}

/// `F = Σ (dP)² / P_mid` from distributions at `λ - δ/2` and `λ + δ/2`.
pub fn fisher_information(
    p_lo: &[f64],
    p_hi: &[f64],
    delta: f64,
) -> Result<FisherInformation, EstimationError> {
    fisher_information_with_floor(p_lo, p_hi, delta, P_FLOOR)
}

pub fn fisher_information_with_floor(
    p_lo: &[f64],
    p_hi: &[f64],
    delta: f64,
    p_floor: f64,
) -> Result<FisherInformation, EstimationError> {
    if p_lo.len() != p_hi.len() {
        return Err(EstimationError::LengthMismatch { expected: p_lo.len(), got: p_hi.len() });
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(EstimationError::InvalidStep(delta));
    }
    let mut value = 0.0;
    let mut skipped_mass = 0.0;
    let mut suspicious = false;
    for (&lo, &hi) in p_lo.iter().zip(p_hi) {
        let mid = 0.5 * (lo + hi);
        let dp = (hi - lo) / delta;
        if mid < p_floor {
            skipped_mass += mid.max(0.0);
            suspicious |= dp.abs() > SKIPPED_SLOPE_WARNING;
            continue;
        }
        value += dp * dp / mid;
    }
    if suspicious {
        log::warn!("outcomes below the probability floor carry a slope above {SKIPPED_SLOPE_WARNING:e}");
    }
    Ok(FisherInformation { value, skipped_mass, suspicious })
}
