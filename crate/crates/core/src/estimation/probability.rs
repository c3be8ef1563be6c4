//! Position-measurement statistics of a lattice state.

use num_complex::Complex64;

use super::{EstimationError, NORM_TOLERANCE};
use crate::lattice::{LatticeSpec, Site};

/// `p(j, k) = |⟨j, k|ψ⟩|²`, stored in linear site order.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteProbability {
    spec: LatticeSpec,
    p: Vec<f64>,
}

impl SiteProbability {
    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn get(&self, site: Site) -> f64 {
        self.p[self.spec.linear(site)]
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    /// `(⟨X⟩, ⟨Y⟩)` in units of the lattice constant.
    pub fn mean_position(&self) -> (f64, f64) {
        self.spec.sites().zip(&self.p).fold((0.0, 0.0), |(x, y), (s, &p)| {
            let (sx, sy) = s.position();
            (x + p * sx, y + p * sy)
        })
    }
}

pub fn site_probabilities(
    spec: &LatticeSpec,
    psi: &[Complex64],
) -> Result<SiteProbability, EstimationError> {
    if psi.len() != spec.num_sites() {
        return Err(EstimationError::LengthMismatch { expected: spec.num_sites(), got: psi.len() });
    }
    let p: Vec<f64> = psi.iter().map(|c| c.norm_sqr()).collect();
    let norm = p.iter().sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(EstimationError::NotNormalized { norm });
    }
    Ok(SiteProbability { spec: *spec, p })
}

/// Disjoint cover of the lattice by `g × g` blocks.
///
/// Blocks are anchored at site `(1, 1)` and numbered left to right, then
/// bottom to top. Blocks on the far edges are cut to what remains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrainPartition {
    spec: LatticeSpec,
    g: usize,
    grain_of: Vec<usize>,
    grains: Vec<Vec<usize>>,
}

impl GrainPartition {
    pub fn g(&self) -> usize {
        self.g
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.grains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grains.is_empty()
    }

    /// Linear site indices of each grain.
    pub fn grains(&self) -> &[Vec<usize>] {
        &self.grains
    }

    pub fn grain_of(&self, site: Site) -> usize {
        self.grain_of[self.spec.linear(site)]
    }
}

pub fn make_partition(spec: &LatticeSpec, g: usize) -> Result<GrainPartition, EstimationError> {
    let max = spec.n_x().min(spec.n_y());
    if g == 0 || g > max {
        return Err(EstimationError::InvalidGrain { g, max });
    }
    let per_row = spec.n_x().div_ceil(g);
    let rows = spec.n_y().div_ceil(g);
    let mut grains = vec![Vec::new(); per_row * rows];
    let grain_of: Vec<usize> = spec
        .sites()
        .enumerate()
        .map(|(a, s)| {
            let id = ((s.k - 1) / g) * per_row + (s.j - 1) / g;
            grains[id].push(a);
            id
        })
        .collect();
    Ok(GrainPartition { spec: *spec, g, grain_of, grains })
}

/// `P(G) = Σ_{s ∈ G} p(s)` in grain order.
pub fn grain_probabilities(
    p: &SiteProbability,
    partition: &GrainPartition,
) -> Result<Vec<f64>, EstimationError> {
    if p.spec != partition.spec {
        return Err(EstimationError::LengthMismatch {
            expected: partition.spec.num_sites(),
            got: p.spec.num_sites(),
        });
    }
    Ok(partition.grains.iter().map(|members| members.iter().map(|&a| p.p[a]).sum()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn basis(spec: &LatticeSpec, sites: &[(Site, f64)]) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); spec.num_sites()];
        for &(s, amp) in sites {
            v[spec.linear(s)] = Complex64::new(0.0, amp);
        }
        v
    }

    #[test]
    fn localized_and_split_states() {
        let spec = LatticeSpec::new(7, 6).unwrap();
        let p = site_probabilities(&spec, &basis(&spec, &[(Site::new(3, 5), 1.0)])).unwrap();
        assert_eq!(p.get(Site::new(3, 5)), 1.0);
        assert_eq!(p.total(), 1.0);
        assert_eq!(p.mean_position(), (3.0, 5.0));

        let h = 0.5f64.sqrt();
        let p = site_probabilities(&spec, &basis(&spec, &[(Site::new(1, 1), h), (Site::new(7, 6), h)]))
            .unwrap();
        assert!((p.get(Site::new(1, 1)) - 0.5).abs() < 1e-15);
        assert!((p.get(Site::new(7, 6)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_unnormalized_or_wrong_length() {
        let spec = LatticeSpec::new(5, 5).unwrap();
        assert!(matches!(
            site_probabilities(&spec, &basis(&spec, &[(Site::new(1, 1), 0.9)])),
            Err(EstimationError::NotNormalized { .. })
        ));
        assert!(matches!(
            site_probabilities(&spec, &[Complex64::new(1.0, 0.0)]),
            Err(EstimationError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn reference_partitions() {
        let spec = LatticeSpec::reference();
        assert_eq!(make_partition(&spec, 1).unwrap().len(), 961);
        assert_eq!(make_partition(&spec, 31).unwrap().len(), 1);

        let ten = make_partition(&spec, 10).unwrap();
        assert_eq!(ten.len(), 16);
        let mut sizes: Vec<usize> = ten.grains().iter().map(Vec::len).collect();
        sizes.sort();
        // 9 full blocks, 6 edge strips of width 1, one corner site
        assert_eq!(sizes[0], 1);
        assert_eq!(&sizes[1..7], &[10; 6]);
        assert_eq!(&sizes[7..], &[100; 9]);
        assert_eq!(ten.grain_of(Site::new(1, 1)), 0);
        assert_eq!(ten.grain_of(Site::new(11, 1)), 1);
        assert_eq!(ten.grain_of(Site::new(31, 1)), 3);
        assert_eq!(ten.grain_of(Site::new(1, 11)), 4);
        assert_eq!(ten.grain_of(Site::new(31, 31)), 15);

        assert!(make_partition(&spec, 0).is_err());
        assert!(make_partition(&spec, 32).is_err());
    }

    #[test]
    fn unit_grains_reproduce_site_probabilities() {
        let spec = LatticeSpec::new(6, 5).unwrap();
        let n = spec.num_sites();
        let v: Vec<Complex64> = (0..n).map(|a| Complex64::new(a as f64, 1.0)).collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let v: Vec<Complex64> = v.iter().map(|c| c / norm).collect();
        let p = site_probabilities(&spec, &v).unwrap();
        assert_eq!(grain_probabilities(&p, &make_partition(&spec, 1).unwrap()).unwrap(), p.values());
    }

    #[test]
    fn uniform_state_in_one_grain() {
        let spec = LatticeSpec::reference();
        let amp = Complex64::new((1.0 / 961.0f64).sqrt(), 0.0);
        let p = site_probabilities(&spec, &vec![amp; 961]).unwrap();
        let pg = grain_probabilities(&p, &make_partition(&spec, 31).unwrap()).unwrap();
        assert_eq!(pg.len(), 1);
        assert!((pg[0] - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn partitions_are_disjoint_covers(n_x in 5usize..25, n_y in 5usize..25, g_seed in 0usize..100) {
            let spec = LatticeSpec::new(n_x, n_y).unwrap();
            let g = 1 + g_seed % n_x.min(n_y);
            let part = make_partition(&spec, g).unwrap();
            let mut seen = vec![0u8; spec.num_sites()];
            for members in part.grains() {
                prop_assert!(!members.is_empty());
                let js: Vec<usize> = members.iter().map(|&a| spec.site(a).j).collect();
                let ks: Vec<usize> = members.iter().map(|&a| spec.site(a).k).collect();
                prop_assert!(js.iter().max().unwrap() - js.iter().min().unwrap() < g);
                prop_assert!(ks.iter().max().unwrap() - ks.iter().min().unwrap() < g);
                for &a in members {
                    seen[a] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&c| c == 1));
        }

        #[test]
        fn grain_probabilities_are_normalized(seed in 0u64..1000, g in 1usize..12) {
            use rand::{Rng, SeedableRng};
            let spec = LatticeSpec::new(13, 11).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<Complex64> = (0..spec.num_sites())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let v: Vec<Complex64> = v.iter().map(|c| c / norm).collect();
            let p = site_probabilities(&spec, &v).unwrap();
            let pg = grain_probabilities(&p, &make_partition(&spec, g).unwrap()).unwrap();
            prop_assert!((pg.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(pg.iter().all(|&x| x >= 0.0));
        }
    }
}
