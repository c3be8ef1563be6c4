//! Two-level anticrossing `H₂ = ω₀ σ₀ - Δ(λ) σ₃ + γ(λ) σ₁`.

use num_complex::Complex64;

use super::qfi::StateFamily;
use super::EstimationError;

type ParamFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Step of the central difference used when no analytic derivative is given.
pub const RATIO_DIFF_STEP: f64 = 1e-6;

pub struct TwoLevelModel {
    omega0: f64,
    delta_fn: ParamFn,
    gamma_fn: ParamFn,
    ratio_derivative: Option<ParamFn>,
}

impl std::fmt::Debug for TwoLevelModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TwoLevelModel")
            .field("omega0", &self.omega0)
            .field("analytic_derivative", &self.ratio_derivative.is_some())
            .finish()
    }
}

impl TwoLevelModel {
    pub fn new(
        omega0: f64,
        delta_fn: impl Fn(f64) -> f64 + Send + Sync + 'static,
        gamma_fn: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { omega0, delta_fn: Box::new(delta_fn), gamma_fn: Box::new(gamma_fn), ratio_derivative: None }
    }

    /// Supplies `d(γ/Δ)/dλ` in closed form.
    pub fn with_ratio_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.ratio_derivative = Some(Box::new(d));
        self
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn delta(&self, lambda: f64) -> f64 {
        (self.delta_fn)(lambda)
    }

    pub fn gamma(&self, lambda: f64) -> f64 {
        (self.gamma_fn)(lambda)
    }

    /// Row-major `[[ω₀ - Δ, γ], [γ, ω₀ + Δ]]`.
    pub fn matrix(&self, lambda: f64) -> [[f64; 2]; 2] {
        let (d, g) = (self.delta(lambda), self.gamma(lambda));
        [[self.omega0 - d, g], [g, self.omega0 + d]]
    }

    /// `(h₋, h₊) = ω₀ ∓ sqrt(Δ² + γ²)`.
    pub fn energies(&self, lambda: f64) -> (f64, f64) {
        let r = self.delta(lambda).hypot(self.gamma(lambda));
        (self.omega0 - r, self.omega0 + r)
    }

    /// Normalised eigenvector of `h₋`.
    pub fn ground_vector(&self, lambda: f64) -> [f64; 2] {
        let (d, g) = (self.delta(lambda), self.gamma(lambda));
        let r = d.hypot(g);
        // both candidates solve the eigen equation; the longer one is better conditioned
        let a = [r + d, -g];
        let b = [g, d - r];
        let (v, n) = {
            let na = a[0].hypot(a[1]);
            let nb = b[0].hypot(b[1]);
            if na >= nb { (a, na) } else { (b, nb) }
        };
        if n == 0.0 {
            return [1.0, 0.0];
        }
        [v[0] / n, v[1] / n]
    }

    fn ratio_slope(&self, lambda: f64) -> f64 {
        match &self.ratio_derivative {
            Some(d) => d(lambda),
            None => {
                let h = RATIO_DIFF_STEP;
                let ratio = |l: f64| self.gamma(l) / self.delta(l);
                (ratio(lambda + h) - ratio(lambda - h)) / (2.0 * h)
            }
        }
    }
}

impl StateFamily for TwoLevelModel {
    fn ground_state(&self, lambda: f64) -> Result<Vec<Complex64>, EstimationError> {
        Ok(self.ground_vector(lambda).iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }
}

/// `16 (Δ / (h₊ - h₋))⁴ [∂λ(γ/Δ)]²`.
pub fn two_level_qfi(model: &TwoLevelModel, lambda: f64) -> Result<f64, EstimationError> {
    let d = model.delta(lambda);
    if d == 0.0 || !d.is_finite() {
        return Err(EstimationError::SingularTwoLevel { lambda });
    }
    // h₊ - h₋ = 2 sqrt(Δ² + γ²), taken directly so large ω₀ costs nothing
    let x = d / (2.0 * d.hypot(model.gamma(lambda)));
    let slope = model.ratio_slope(lambda);
    Ok(16.0 * x.powi(4) * slope * slope)
}
