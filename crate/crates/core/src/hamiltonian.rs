//! Finite-difference Hamiltonian of a charged spinless particle in the
//! symmetric-gauge vector potential.
//!
//! The kinetic term uses the five-point stencil, so each site couples to its
//! nearest and next-nearest neighbours along both axes. Hops whose source
//! site falls outside the lattice are dropped; surviving coefficients are not
//! adjusted. In units of `J`, with `s = A(source) + A(target)`:
//!
//! | term                | coefficient                |
//! |---------------------|----------------------------|
//! | on-site             | `5 + A_x² + A_y²`          |
//! | `⟨j,k\|H\|j±1,k⟩`   | `-(2/3) (2 ∓ i s_x)`       |
//! | `⟨j,k\|H\|j±2,k⟩`   | `(1/12) (1 ∓ i s_x)`       |
//!
//! and likewise along y with `A_y`.

use std::io::{self, Write};

use num_complex::Complex64;
use thiserror::Error;

use crate::field::VectorPotentialField;
use crate::lattice::{LatticeSpec, Site};

#[derive(Debug, Error)]
pub enum HamiltonianError {
    #[error("vector length {got} does not match matrix dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("triplet ({row}, {col}) outside a {dim}x{dim} matrix")]
    OutOfBounds { row: usize, col: usize, dim: usize },
    #[error("potential sampled on a {got:?} lattice, expected {expected:?}")]
    LatticeMismatch { expected: LatticeSpec, got: LatticeSpec },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Sparse Hermitian operator on the position basis, stored row by row with
/// column indices sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

const NEAREST: f64 = 2.0 / 3.0;
const NEXT_NEAREST: f64 = 1.0 / 12.0;
const ON_SITE: f64 = 5.0;

/// Assemble the stencil Hamiltonian for `potential` on `spec`.
///
/// The upper triangle is formed from the stencil and mirrored, so the result
/// is Hermitian bit for bit.
pub fn build_hamiltonian(
    spec: &LatticeSpec,
    potential: &VectorPotentialField,
) -> Result<HamiltonianMatrix, HamiltonianError> {
    if potential.spec() != spec {
        return Err(HamiltonianError::LatticeMismatch { expected: *spec, got: *potential.spec() });
    }
    let j_hop = LatticeSpec::HOPPING;
    let nn = NEAREST * j_hop;
    let nnn = NEXT_NEAREST * j_hop;
    let (a_x, a_y) = (potential.a_x(), potential.a_y());
    let dim = spec.num_sites();

    let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::with_capacity(9); dim];
    for a in 0..dim {
        let Site { j, k } = spec.site(a);
        let diag = j_hop * (ON_SITE + (a_x[a] * a_x[a] + a_y[a] * a_y[a]));
        rows[a].push((a, Complex64::new(diag, 0.0)));

        // hops towards larger j / k; the lower triangle is their conjugate
        let mut upper = |b: usize, amp: Complex64| {
            rows[a].push((b, amp));
            rows[b].push((a, amp.conj()));
        };
        if j + 1 <= spec.n_x() {
            let b = spec.linear(Site::new(j + 1, k));
            upper(b, Complex64::new(-2.0 * nn, nn * (a_x[b] + a_x[a])));
        }
        if j + 2 <= spec.n_x() {
            let b = spec.linear(Site::new(j + 2, k));
            upper(b, Complex64::new(nnn, -nnn * (a_x[b] + a_x[a])));
        }
        if k + 1 <= spec.n_y() {
            let b = spec.linear(Site::new(j, k + 1));
            upper(b, Complex64::new(-2.0 * nn, nn * (a_y[b] + a_y[a])));
        }
        if k + 2 <= spec.n_y() {
            let b = spec.linear(Site::new(j, k + 2));
            upper(b, Complex64::new(nnn, -nnn * (a_y[b] + a_y[a])));
        }
    }
    Ok(HamiltonianMatrix::from_rows(dim, rows))
}

impl HamiltonianMatrix {
    fn from_rows(dim: usize, mut rows: Vec<Vec<(usize, Complex64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for row in rows.iter_mut() {
            row.sort_by_key(|&(c, _)| c);
            for &(c, v) in row.iter() {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self { dim, row_ptr, cols, vals }
    }

    /// Arbitrary matrix from `(row, col, value)` triplets. Duplicates are summed.
    /// No symmetry is imposed.
    pub fn from_triplets(
        dim: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Result<Self, HamiltonianError> {
        let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); dim];
        for (row, col, v) in triplets {
            if row >= dim || col >= dim {
                return Err(HamiltonianError::OutOfBounds { row, col, dim });
            }
            match rows[row].iter_mut().find(|(c, _)| *c == col) {
                Some(slot) => slot.1 += v,
                None => rows[row].push((col, v)),
            }
        }
        Ok(Self::from_rows(dim, rows))
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Stored entries of row `a` as `(column, value)`.
    pub fn row(&self, a: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let range = self.row_ptr[a]..self.row_ptr[a + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    /// `⟨a|H|b⟩`, zero when not stored.
    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        let range = self.row_ptr[a]..self.row_ptr[a + 1];
        match self.cols[range.clone()].binary_search(&b) {
            Ok(i) => self.vals[range.start + i],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// All stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim).flat_map(move |a| self.row(a).map(move |(b, v)| (a, b, v)))
    }

    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }

    /// Largest `|a - b|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.triplets().map(|(a, b, _)| a.abs_diff(b)).max().unwrap_or(0)
    }

    /// Max row sum of absolute values, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|a| self.row(a).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `H v`.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>, HamiltonianError> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply_into(v, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, v: &[Complex64], out: &mut [Complex64]) -> Result<(), HamiltonianError> {
        for len in [v.len(), out.len()] {
            if len != self.dim {
                return Err(HamiltonianError::DimensionMismatch { expected: self.dim, got: len });
            }
        }
        for (a, slot) in out.iter_mut().enumerate() {
            *slot = self.row(a).map(|(b, h)| h * v[b]).sum();
        }
        Ok(())
    }

    /// Dense column-major copy.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let n = self.dim;
        let mut dense = vec![Complex64::new(0.0, 0.0); n * n];
        for (a, b, v) in self.triplets() {
            dense[a + b * n] = v;
        }
        dense
    }

    /// Upper band in LAPACK `'U'` layout: entry `(a, b)` with `a <= b` sits at
    /// `kd + a - b + b * (kd + 1)`. Returns `(kd, band)`.
    pub fn to_upper_band(&self) -> (usize, Vec<Complex64>) {
        let kd = self.bandwidth();
        let ld = kd + 1;
        let mut band = vec![Complex64::new(0.0, 0.0); ld * self.dim];
        for (a, b, v) in self.triplets().filter(|&(a, b, _)| a <= b) {
            band[kd + a - b + b * ld] = v;
        }
        (kd, band)
    }

    /// Writes `row col re im` lines for every stored entry, 0-based, row-major.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> Result<(), HamiltonianError> {
        for (a, b, v) in self.triplets() {
            writeln!(w, "{a} {b} {:.16e} {:.16e}", v.re, v.im)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `max |H_ab - conj(H_ba)|` over all pairs.
pub fn hermiticity_defect(h: &HamiltonianMatrix) -> f64 {
    h.triplets()
        .map(|(a, b, v)| (v - h.get(b, a).conj()).norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sample_vector_potential, FieldProfile};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn zero_field(spec: LatticeSpec) -> HamiltonianMatrix {
        build_hamiltonian(&spec, &VectorPotentialField::zero(spec)).unwrap()
    }

    fn homogeneous(spec: LatticeSpec, b0: f64) -> (VectorPotentialField, HamiltonianMatrix) {
        let pot = sample_vector_potential(&spec, &FieldProfile::homogeneous(&spec, b0).unwrap());
        let h = build_hamiltonian(&spec, &pot).unwrap();
        (pot, h)
    }

    #[test]
    fn zero_field_interior_stencil() {
        let spec = LatticeSpec::reference();
        let h = zero_field(spec);
        let s = Site::new(10, 12);
        let a = spec.linear(s);
        assert_eq!(h.get(a, a), c(5.0, 0.0));
        for (dj, dk) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)] {
            let b = spec.linear(Site::new((10 + dj) as usize, (12 + dk) as usize));
            assert_eq!(h.get(a, b), c(-4.0 / 3.0, 0.0));
        }
        for (dj, dk) in [(2isize, 0isize), (-2, 0), (0, 2), (0, -2)] {
            let b = spec.linear(Site::new((10 + dj) as usize, (12 + dk) as usize));
            assert_eq!(h.get(a, b), c(1.0 / 12.0, 0.0));
        }
        assert_eq!(h.row(a).count(), 9);
        assert!(h.is_real());
    }

    #[test]
    fn corner_row_is_truncated() {
        let spec = LatticeSpec::reference();
        let h = zero_field(spec);
        let cols: Vec<Site> = h.row(0).map(|(b, _)| spec.site(b)).collect();
        let mut expected = vec![
            Site::new(1, 1),
            Site::new(2, 1),
            Site::new(3, 1),
            Site::new(1, 2),
            Site::new(1, 3),
        ];
        expected.sort_by_key(|s| spec.linear(*s));
        assert_eq!(cols, expected);
        // on-site term is not renormalised at the boundary
        assert_eq!(h.get(0, 0), c(5.0, 0.0));
    }

    #[test]
    fn next_to_boundary_keeps_nearest_hops() {
        let spec = LatticeSpec::reference();
        let h = zero_field(spec);
        let a = spec.linear(Site::new(2, 16));
        let js: Vec<usize> = h
            .row(a)
            .map(|(b, _)| spec.site(b))
            .filter(|s| s.k == 16)
            .map(|s| s.j)
            .collect();
        assert_eq!(js, vec![1, 2, 3, 4]);
    }

    #[test]
    fn hop_through_center_is_real() {
        let spec = LatticeSpec::reference();
        let (_, h) = homogeneous(spec, 0.5);
        let c0 = spec.center();
        let a = spec.linear(c0);
        let b = spec.linear(Site::new(c0.j + 1, c0.k));
        assert_eq!(h.get(a, b), c(-4.0 / 3.0, 0.0));
    }

    #[test]
    fn hop_amplitudes_match_the_stencil() {
        // Independent evaluation of each printed term at an off-centre site.
        let spec = LatticeSpec::reference();
        let b0 = 0.3;
        let (pot, h) = homogeneous(spec, b0);
        let s = Site::new(9, 20);
        let a = spec.linear(s);
        let (ax, ay) = pot.at(s);
        let term = |dj: isize, dk: isize| {
            let t = Site::new((s.j as isize + dj) as usize, (s.k as isize + dk) as usize);
            let (tx, ty) = pot.at(t);
            let (sum, step) = if dk == 0 { (tx + ax, dj) } else { (ty + ay, dk) };
            // -J * coefficient from the printed expansion
            let v = match step {
                -2 => -(-1.0 / 12.0) * c(1.0, sum),
                -1 => -(2.0 / 3.0) * c(2.0, sum),
                1 => -(2.0 / 3.0) * c(2.0, -sum),
                2 => -(-1.0 / 12.0) * c(1.0, -sum),
                _ => unreachable!(),
            };
            (spec.linear(t), v)
        };
        for (dj, dk) in [(-2, 0), (-1, 0), (1, 0), (2, 0), (0, -2), (0, -1), (0, 1), (0, 2)] {
            let (b, expected) = term(dj, dk);
            assert!((h.get(a, b) - expected).norm() < 1e-15, "({dj},{dk})");
        }
        assert_eq!(h.get(a, a).re, 5.0 + (ax * ax + ay * ay));
    }

    #[test]
    fn defect_examples() {
        let spec = LatticeSpec::new(7, 7).unwrap();
        let (_, h) = homogeneous(spec, 0.7);
        assert_eq!(hermiticity_defect(&h), 0.0);

        let mut triplets: Vec<_> = h.triplets().collect();
        let i = triplets.iter().position(|&(a, b, _)| a != b).unwrap();
        triplets[i].2 += c(1e-3, 0.0);
        let corrupted = HamiltonianMatrix::from_triplets(h.dimension(), triplets).unwrap();
        assert!(hermiticity_defect(&corrupted) > 0.0);

        let zero = HamiltonianMatrix::from_triplets(5, std::iter::empty()).unwrap();
        assert_eq!(hermiticity_defect(&zero), 0.0);
    }

    #[test]
    fn apply_matches_dense_product() {
        let spec = LatticeSpec::new(11, 11).unwrap();
        let h = zero_field(spec);
        let n = h.dimension();
        assert_eq!(h.apply(&vec![c(0.0, 0.0); n]).unwrap(), vec![c(0.0, 0.0); n]);

        // uniform on sites at least two steps from every edge
        let v: Vec<Complex64> = spec
            .sites()
            .map(|s| {
                let inner = (3..=9).contains(&s.j) && (3..=9).contains(&s.k);
                c(if inner { 1.0 } else { 0.0 }, 0.0)
            })
            .collect();
        let hv = h.apply(&v).unwrap();
        let dense = h.to_dense();
        for a in 0..n {
            let expected: Complex64 = (0..n).map(|b| dense[a + b * n] * v[b]).sum();
            assert!((hv[a] - expected).norm() < 1e-14);
        }
        // the stencil annihilates a locally constant vector
        assert!(hv[spec.linear(Site::new(6, 6))].norm() < 1e-14);

        assert!(matches!(
            h.apply(&[c(1.0, 0.0)]),
            Err(HamiltonianError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn band_layout_round_trips() {
        let spec = LatticeSpec::new(6, 5).unwrap();
        let (_, h) = homogeneous(spec, 0.4);
        let (kd, band) = h.to_upper_band();
        assert_eq!(kd, 2 * spec.n_x());
        for (a, b, v) in h.triplets().filter(|&(a, b, _)| a <= b) {
            assert_eq!(band[kd + a - b + b * (kd + 1)], v);
        }
    }

    #[test]
    fn triplet_dump_format() {
        let spec = LatticeSpec::new(5, 5).unwrap();
        let h = zero_field(spec);
        let mut buf = Vec::new();
        h.write_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), h.nnz());
        assert_eq!(lines[0], "0 0 5.0000000000000000e0 0.0000000000000000e0");
        let mut prev = (0usize, 0usize);
        for (i, line) in lines.iter().enumerate() {
            let f: Vec<&str> = line.split(' ').collect();
            assert_eq!(f.len(), 4);
            let key = (f[0].parse().unwrap(), f[1].parse().unwrap());
            if i > 0 {
                assert!(key > prev);
            }
            prev = key;
            let re: f64 = f[2].parse().unwrap();
            assert_eq!(re, h.get(key.0, key.1).re);
        }
    }

    #[test]
    fn lattice_mismatch_is_rejected() {
        let a = LatticeSpec::new(5, 5).unwrap();
        let b = LatticeSpec::new(7, 5).unwrap();
        assert!(matches!(
            build_hamiltonian(&a, &VectorPotentialField::zero(b)),
            Err(HamiltonianError::LatticeMismatch { .. })
        ));
    }

    #[test]
    fn gauge_shift_keeps_hermiticity() {
        let spec = LatticeSpec::new(11, 11).unwrap();
        let (pot, h) = homogeneous(spec, 0.5);
        let shifted = build_hamiltonian(&spec, &pot.shifted(0.3, -0.2)).unwrap();
        assert_ne!(h, shifted);
        assert_eq!(hermiticity_defect(&shifted), 0.0);
        // the stencil is not gauge covariant; regression: the shift moves E0 by ~6.4e-4
        let e0 = |m: &HamiltonianMatrix| crate::spectrum::solve_lowest(m, 1).unwrap().eigenvalues[0];
        let moved = e0(&shifted) - e0(&h);
        assert!((moved - 6.446_003_755_3e-4).abs() < 1e-12, "{moved:e}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn structure_invariants(
            n_x in 5usize..14,
            n_y in 5usize..14,
            b0 in 0.01f64..1.0,
            frac in 0.0f64..1.0,
        ) {
            let spec = LatticeSpec::new(n_x, n_y).unwrap();
            let m_x = frac * b0 / spec.max_offset_x();
            let profile = FieldProfile::centered(&spec, b0, m_x).unwrap();
            let pot = sample_vector_potential(&spec, &profile);
            let h = build_hamiltonian(&spec, &pot).unwrap();
            prop_assert_eq!(hermiticity_defect(&h), 0.0);
            for a in 0..h.dimension() {
                prop_assert!(h.row(a).count() <= 9);
                let (ax, ay) = (pot.a_x()[a], pot.a_y()[a]);
                prop_assert_eq!(h.get(a, a), c(LatticeSpec::HOPPING * (5.0 + (ax * ax + ay * ay)), 0.0));
            }
        }
    }
}

