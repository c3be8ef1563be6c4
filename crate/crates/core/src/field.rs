//! Transverse magnetic field profiles and the symmetric-gauge vector potential.
//!
//! The field is `B(x) = b0 - m_x |x - x0|` along z, maximal on the centre
//! column and y-independent. It is generated by
//! `A = f(x)/2 · (-(y - y0), x - x0, 0)` with `f(x) = b0 - (2/3) m_x |x - x0|`.

use thiserror::Error;

use crate::lattice::{LatticeSpec, Site};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("field magnitude must be positive and finite, got {0}")]
    NonPositiveField(f64),
    #[error("field gradient must be non-negative and finite, got {0}")]
    NegativeGradient(f64),
    #[error("field reverses sign inside the lattice: b0 = {b0} < m_x L = {bound}")]
    FieldReversal { b0: f64, bound: f64 },
    #[error("magnetic length below the lattice constant: b0 = {b0} > 1")]
    MagneticLengthTooShort { b0: f64 },
    #[error("vector potential has {got} samples, lattice has {expected} sites")]
    SizeMismatch { expected: usize, got: usize },
}

/// Magnetic length `l_B = sqrt(ħ / (q B))`, i.e. `B^(-1/2)` in natural units.
pub fn magnetic_length(b: f64) -> Result<f64, FieldError> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(FieldError::NonPositiveField(b));
    }
    Ok(b.sqrt().recip())
}

/// The `(b0, m_x)` field family, anchored at the lattice centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldProfile {
    b0: f64,
    m_x: f64,
    x0: f64,
    y0: f64,
}

impl FieldProfile {
    /// Profile centred on `spec.center()`. Only the sign constraints are checked
    /// here; use [`validate_profile`] for the admissible window.
    pub fn centered(spec: &LatticeSpec, b0: f64, m_x: f64) -> Result<Self, FieldError> {
        let c = spec.center();
        let (x0, y0) = c.position();
        Self::new(b0, m_x, x0, y0)
    }

    pub fn new(b0: f64, m_x: f64, x0: f64, y0: f64) -> Result<Self, FieldError> {
        if !(b0 > 0.0) || !b0.is_finite() {
            return Err(FieldError::NonPositiveField(b0));
        }
        if !(m_x >= 0.0) || !m_x.is_finite() {
            return Err(FieldError::NegativeGradient(m_x));
        }
        Ok(Self { b0, m_x, x0, y0 })
    }

    pub fn homogeneous(spec: &LatticeSpec, b0: f64) -> Result<Self, FieldError> {
        Self::centered(spec, b0, 0.0)
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn m_x(&self) -> f64 {
        self.m_x
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x0, self.y0)
    }

    /// Slope of the gauge function `f`; the field gradient is `3/2` of it.
    pub fn gauge_slope(&self) -> f64 {
        2.0 * self.m_x / 3.0
    }

    /// `B(x) = b0 - m_x |x - x0|`.
    pub fn field_magnitude(&self, x: f64) -> f64 {
        self.b0 - self.m_x * (x - self.x0).abs()
    }

    /// `f(x) = b0 - (2/3) m_x |x - x0|`.
    pub fn gauge_function(&self, x: f64) -> f64 {
        self.b0 - self.gauge_slope() * (x - self.x0).abs()
    }

    /// `(A_x, A_y)` at an arbitrary point of the plane.
    pub fn vector_potential_at(&self, x: f64, y: f64) -> (f64, f64) {
        let half_f = 0.5 * self.gauge_function(x);
        (-half_f * (y - self.y0), half_f * (x - self.x0))
    }
}

/// Check `m_x L <= b0 <= 1` for the given lattice.
pub fn validate_profile(spec: &LatticeSpec, profile: &FieldProfile) -> Result<(), FieldError> {
    let bound = reversal_bound(spec, profile.m_x);
    if profile.b0 < bound {
        return Err(FieldError::FieldReversal { b0: profile.b0, bound });
    }
    if profile.b0 > 1.0 {
        return Err(FieldError::MagneticLengthTooShort { b0: profile.b0 });
    }
    Ok(())
}

/// Smallest `b0` for which the field keeps its sign on the lattice, `m_x L`.
pub fn reversal_bound(spec: &LatticeSpec, m_x: f64) -> f64 {
    m_x * spec.max_offset_x()
}

/// `A_x` and `A_y` sampled on every site, indexed by linear site index.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorPotentialField {
    spec: LatticeSpec,
    a_x: Vec<f64>,
    a_y: Vec<f64>,
}

impl VectorPotentialField {
    /// Arbitrary site samples, e.g. for gauge experiments.
    pub fn from_components(
        spec: LatticeSpec,
        a_x: Vec<f64>,
        a_y: Vec<f64>,
    ) -> Result<Self, FieldError> {
        let expected = spec.num_sites();
        for got in [a_x.len(), a_y.len()] {
            if got != expected {
                return Err(FieldError::SizeMismatch { expected, got });
            }
        }
        Ok(Self { spec, a_x, a_y })
    }

    pub fn zero(spec: LatticeSpec) -> Self {
        let n = spec.num_sites();
        Self { spec, a_x: vec![0.0; n], a_y: vec![0.0; n] }
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn a_x(&self) -> &[f64] {
        &self.a_x
    }

    pub fn a_y(&self) -> &[f64] {
        &self.a_y
    }

    pub fn at(&self, site: Site) -> (f64, f64) {
        let a = self.spec.linear(site);
        (self.a_x[a], self.a_y[a])
    }

    /// Adds a constant to both components on every site.
    pub fn shifted(&self, dx: f64, dy: f64) -> Self {
        Self {
            spec: self.spec,
            a_x: self.a_x.iter().map(|v| v + dx).collect(),
            a_y: self.a_y.iter().map(|v| v + dy).collect(),
        }
    }

    /// `∂x A_y - ∂y A_x` with the five-point first-derivative stencil, on sites
    /// at least two steps from every edge. Other sites are `None`.
    pub fn discrete_curl(&self) -> Vec<Option<f64>> {
        let spec = self.spec;
        let (n_x, n_y) = (spec.n_x(), spec.n_y());
        let d = LatticeSpec::LATTICE_CONSTANT;
        let five_point = |m2: f64, m1: f64, p1: f64, p2: f64| (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * d);
        spec.sites()
            .map(|s| {
                if s.j < 3 || s.k < 3 || s.j + 2 > n_x || s.k + 2 > n_y {
                    return None;
                }
                let ay = |j: usize| self.a_y[spec.linear(Site::new(j, s.k))];
                let ax = |k: usize| self.a_x[spec.linear(Site::new(s.j, k))];
                let dx_ay = five_point(ay(s.j - 2), ay(s.j - 1), ay(s.j + 1), ay(s.j + 2));
                let dy_ax = five_point(ax(s.k - 2), ax(s.k - 1), ax(s.k + 1), ax(s.k + 2));
                Some(dx_ay - dy_ax)
            })
            .collect()
    }
}

/// Symmetric-gauge potential of `profile` on every site of `spec`.
pub fn sample_vector_potential(spec: &LatticeSpec, profile: &FieldProfile) -> VectorPotentialField {
    let (a_x, a_y) = spec
        .sites()
        .map(|s| {
            let (x, y) = s.position();
            profile.vector_potential_at(x, y)
        })
        .unzip();
    VectorPotentialField { spec: *spec, a_x, a_y }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reference() -> LatticeSpec {
        LatticeSpec::reference()
    }

    #[test]
    fn field_magnitude_examples() {
        let spec = reference();
        let homogeneous = FieldProfile::centered(&spec, 0.5, 0.0).unwrap();
        for x in [1.0, 7.0, 16.0, 31.0] {
            assert_eq!(homogeneous.field_magnitude(x), 0.5);
        }
        let graded = FieldProfile::centered(&spec, 0.5, 0.015).unwrap();
        assert_eq!(graded.field_magnitude(16.0), 0.5);
        // 0.5 - 0.015 * 15
        assert!((graded.field_magnitude(31.0) - 0.275).abs() < 1e-15);
        assert!((graded.field_magnitude(1.0) - 0.275).abs() < 1e-15);
    }

    #[test]
    fn magnetic_length_examples() {
        assert_eq!(magnetic_length(1.0).unwrap(), 1.0);
        assert_eq!(magnetic_length(0.25).unwrap(), 2.0);
        assert!((magnetic_length(0.01).unwrap() - 10.0).abs() < 1e-12);
        assert!(magnetic_length(0.0).is_err());
        assert!(magnetic_length(-1.0).is_err());
        assert!(magnetic_length(f64::NAN).is_err());
    }

    #[test]
    fn validation_window() {
        let spec = reference();
        let edge = FieldProfile::centered(&spec, 0.225, 0.015).unwrap();
        assert_eq!(validate_profile(&spec, &edge), Ok(()));

        let reversed = FieldProfile::centered(&spec, 0.2, 0.015).unwrap();
        assert!(matches!(
            validate_profile(&spec, &reversed),
            Err(FieldError::FieldReversal { .. })
        ));

        let strong = FieldProfile::centered(&spec, 1.5, 0.0).unwrap();
        assert_eq!(
            validate_profile(&spec, &strong),
            Err(FieldError::MagneticLengthTooShort { b0: 1.5 })
        );
    }

    #[test]
    fn window_uses_actual_extent() {
        let spec = LatticeSpec::new(11, 11).unwrap();
        // L = 5 here, so 0.1 * 5 = 0.5 is admissible.
        let p = FieldProfile::centered(&spec, 0.5, 0.1).unwrap();
        assert!(validate_profile(&spec, &p).is_ok());
        let p = FieldProfile::centered(&spec, 0.49, 0.1).unwrap();
        assert!(validate_profile(&spec, &p).is_err());
    }

    #[test]
    fn constructor_rejects_bad_signs() {
        let spec = reference();
        assert!(FieldProfile::centered(&spec, 0.0, 0.0).is_err());
        assert!(FieldProfile::centered(&spec, 0.5, -0.01).is_err());
        assert!(FieldProfile::centered(&spec, f64::INFINITY, 0.0).is_err());
    }

    #[test]
    fn potential_examples() {
        let spec = reference();
        let c = spec.center();

        let p = FieldProfile::homogeneous(&spec, 0.4).unwrap();
        let field = sample_vector_potential(&spec, &p);
        assert_eq!(field.at(Site::new(c.j, c.k + 1)), (-0.2, 0.0));
        assert_eq!(field.at(c), (0.0, 0.0));

        let p = FieldProfile::centered(&spec, 0.5, 0.015).unwrap();
        let field = sample_vector_potential(&spec, &p);
        assert_eq!(field.at(c), (0.0, 0.0));
        let (ax, ay) = field.at(Site::new(c.j + 2, c.k));
        assert_eq!(ax, 0.0);
        assert!((ay - 0.48).abs() < 1e-15, "{ay}");
        assert!((p.gauge_slope() - 0.01).abs() < 1e-18);
    }

    #[test]
    fn homogeneous_potential_matches_closed_form() {
        let spec = LatticeSpec::new(9, 7).unwrap();
        let b = 0.37;
        let p = FieldProfile::homogeneous(&spec, b).unwrap();
        let field = sample_vector_potential(&spec, &p);
        let c = spec.center();
        for s in spec.sites() {
            let (ax, ay) = field.at(s);
            assert_eq!(ax, -(b / 2.0) * (s.k as f64 - c.k as f64));
            assert_eq!(ay, (b / 2.0) * (s.j as f64 - c.j as f64));
        }
    }

    #[test]
    fn curl_reproduces_homogeneous_field() {
        let spec = reference();
        for b in [0.05, 0.5, 1.0] {
            let field = sample_vector_potential(&spec, &FieldProfile::homogeneous(&spec, b).unwrap());
            let worst = field
                .discrete_curl()
                .into_iter()
                .flatten()
                .map(|c| (c - b).abs())
                .fold(0.0, f64::max);
            // regression: exact up to rounding for a linear potential
            assert!(worst < 1e-13, "b = {b}: {worst:e}");
        }
    }

    #[test]
    fn curl_of_graded_field_away_from_the_kink() {
        let spec = reference();
        let p = FieldProfile::centered(&spec, 0.5, 0.015).unwrap();
        let field = sample_vector_potential(&spec, &p);
        let x0 = spec.center().j;
        let mut worst_far = 0.0f64;
        let mut worst_kink = 0.0f64;
        for (s, curl) in spec.sites().zip(field.discrete_curl()) {
            let Some(curl) = curl else { continue };
            let err = (curl - p.field_magnitude(s.j as f64)).abs();
            if s.j.abs_diff(x0) > 2 {
                worst_far = worst_far.max(err);
            } else {
                worst_kink = worst_kink.max(err);
            }
        }
        assert!(worst_far < 1e-12, "{worst_far:e}");
        // regression: the kink at x0 costs 2 m_x / 9
        assert!((worst_kink - 2.0 * 0.015 / 9.0).abs() < 1e-12, "{worst_kink}");
    }

    proptest! {
        #[test]
        fn field_magnitude_is_even(b0 in 0.01f64..1.0, m_x in 0.0f64..0.05, t in 0.0f64..20.0) {
            let p = FieldProfile::centered(&reference(), b0, m_x).unwrap();
            let (x0, _) = p.center();
            prop_assert!((p.field_magnitude(x0 + t) - p.field_magnitude(x0 - t)).abs() < 1e-15);
        }

        #[test]
        fn reversal_boundary_is_sharp(m_x in 0.001f64..0.066, eps in 1e-9f64..1e-3) {
            let spec = reference();
            let bound = reversal_bound(&spec, m_x);
            let at = FieldProfile::centered(&spec, bound, m_x).unwrap();
            prop_assert!(validate_profile(&spec, &at).is_ok());
            if bound - eps > 0.0 {
                let below = FieldProfile::centered(&spec, bound - eps, m_x).unwrap();
                let rejected = matches!(validate_profile(&spec, &below), Err(FieldError::FieldReversal { .. }));
                prop_assert!(rejected);
            }
        }
    }
}
