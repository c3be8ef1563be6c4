//! Low-lying eigenpairs of a [`HamiltonianMatrix`].
//!
//! [`solve_lowest`] is the reference path: dense Hermitian diagonalisation
//! through LAPACK `zheevr`, restricted to the `k` lowest pairs.
//! [`ground_state_near`] is the fast path used for the displaced points of a
//! finite-difference stencil. It runs shift-and-invert subspace iteration on
//! the banded matrix, with the shift certified to lie below the spectrum by a
//! successful banded Cholesky factorisation.
//!
//! Both paths report `‖H v - E v‖` and fail rather than return an
//! unconverged pair.

use lapack::{zheev, zheevr, zpbtrf, zpbtrs};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::hamiltonian::{HamiltonianError, HamiltonianMatrix};

/// Largest dimension accepted by the dense path.
pub const MAX_DENSE_DIMENSION: usize = 8192;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("requested {k} eigenpairs of a {dim}-dimensional matrix")]
    InvalidCount { k: usize, dim: usize },
    #[error("dimension {0} is too large for dense diagonalisation")]
    TooLarge(usize),
    #[error("LAPACK {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },
    #[error("eigenpair residual {residual:e} exceeds tolerance {tolerance:e}")]
    NotConverged { residual: f64, tolerance: f64 },
    #[error("no shift below the spectrum found starting from {hint}")]
    NoShift { hint: f64 },
    #[error("gap profile needs at least two points with a gap, got {0}")]
    TooFewPoints(usize),
    #[error(transparent)]
    Hamiltonian(#[from] HamiltonianError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Accept a pair when `‖H v - E v‖ <= residual_tol * max(1, |E|)`.
    pub residual_tol: f64,
    /// Ground state counts as degenerate when `E1 - E0` is below this
    /// fraction of `E_{k-1} - E0`.
    pub degeneracy_rel: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { residual_tol: 1e-10, degeneracy_rel: 1e-10 }
    }
}

/// Lowest eigenvalues in ascending order plus the normalised ground state.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSolution {
    pub eigenvalues: Vec<f64>,
    pub ground_state: Vec<Complex64>,
    /// Max of `‖H v - E v‖` over the computed pairs.
    pub residual: f64,
    /// `E1 - E0`, absent when only one pair was requested.
    pub gap: Option<f64>,
    pub degeneracy_threshold: f64,
}

impl EigenSolution {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn is_degenerate(&self) -> bool {
        self.gap.is_some_and(|g| g < self.degeneracy_threshold)
    }
}

/// The `k` lowest eigenpairs by dense diagonalisation.
pub fn solve_lowest(h: &HamiltonianMatrix, k: usize) -> Result<EigenSolution, SpectrumError> {
    solve_lowest_with(h, k, &SolverOptions::default())
}

pub fn solve_lowest_with(
    h: &HamiltonianMatrix,
    k: usize,
    opts: &SolverOptions,
) -> Result<EigenSolution, SpectrumError> {
    let n = h.dimension();
    if k == 0 || k > n {
        return Err(SpectrumError::InvalidCount { k, dim: n });
    }
    if n > MAX_DENSE_DIMENSION {
        return Err(SpectrumError::TooLarge(n));
    }
    let (values, vectors) = dense_lowest(h, k)?;

    let mut residual = 0.0f64;
    for (i, &e) in values.iter().enumerate() {
        let r = residual_norm(h, &vectors[i * n..(i + 1) * n], e)?;
        check_residual(r, e, opts.residual_tol)?;
        residual = residual.max(r);
    }

    let mut ground_state = vectors[..n].to_vec();
    normalize(&mut ground_state);
    canonicalize_phase(&mut ground_state);

    let gap = (k >= 2).then(|| values[1] - values[0]);
    let degeneracy_threshold = opts.degeneracy_rel * (values[k - 1] - values[0]);
    Ok(EigenSolution { eigenvalues: values, ground_state, residual, gap, degeneracy_threshold })
}

fn dense_lowest(h: &HamiltonianMatrix, k: usize) -> Result<(Vec<f64>, Vec<Complex64>), SpectrumError> {
    let n = h.dimension();
    let ni = n as i32;
    let mut a = h.to_dense();
    let mut m = 0i32;
    let mut w = vec![0.0; n];
    let mut z = vec![Complex64::new(0.0, 0.0); n * k];
    let mut isuppz = vec![0i32; 2 * k.max(1)];
    let abstol = unsafe { lapack::dlamch(b'S') };
    let mut info = 0;

    let mut work = vec![Complex64::new(0.0, 0.0); 1];
    let mut rwork = vec![0.0; 1];
    let mut iwork = vec![0i32; 1];
    for query in [true, false] {
        let (lwork, lrwork, liwork) = if query {
            (-1, -1, -1)
        } else {
            let lwork = work[0].re as usize;
            let lrwork = rwork[0] as usize;
            let liwork = iwork[0] as usize;
            work = vec![Complex64::new(0.0, 0.0); lwork.max(1)];
            rwork = vec![0.0; lrwork.max(1)];
            iwork = vec![0; liwork.max(1)];
            (lwork as i32, lrwork as i32, liwork as i32)
        };
        unsafe {
            zheevr(
                b'V', b'I', b'U', ni, &mut a, ni, 0.0, 0.0, 1, k as i32, abstol, &mut m, &mut w,
                &mut z, ni, &mut isuppz, &mut work, lwork, &mut rwork, lrwork, &mut iwork, liwork,
                &mut info,
            );
        }
        if info != 0 {
            return Err(SpectrumError::Lapack { routine: "zheevr", info });
        }
    }
    if m as usize != k {
        return Err(SpectrumError::Lapack { routine: "zheevr", info: -(m + 1000) });
    }
    w.truncate(k);
    Ok((w, z))
}

fn residual_norm(h: &HamiltonianMatrix, v: &[Complex64], e: f64) -> Result<f64, SpectrumError> {
    let hv = h.apply(v)?;
    Ok(hv.iter().zip(v).map(|(x, y)| (x - y * e).norm_sqr()).sum::<f64>().sqrt())
}

fn check_residual(r: f64, e: f64, tol: f64) -> Result<(), SpectrumError> {
    let tolerance = tol * e.abs().max(1.0);
    if r <= tolerance {
        Ok(())
    } else {
        Err(SpectrumError::NotConverged { residual: r, tolerance })
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex64]) -> f64 {
    let nrm = norm(v);
    if nrm > 0.0 {
        v.iter_mut().for_each(|c| *c /= nrm);
    }
    nrm
}

/// Rotates the global phase so the largest-magnitude component is real and
/// positive. Among components within a relative `1e-12` of the largest
/// magnitude, the first one is used, which keeps the operation idempotent.
pub fn canonicalize_phase(v: &mut [Complex64]) {
    let max = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let Some(pivot) = v.iter().position(|c| c.norm() >= max * (1.0 - 1e-12)) else {
        return;
    };
    let p = v[pivot];
    let phase = p.conj() / p.norm();
    v.iter_mut().for_each(|c| *c *= phase);
    v[pivot] = Complex64::new(v[pivot].re, 0.0);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftInvertOptions {
    pub residual_tol: f64,
    /// Block size of the subspace iteration.
    pub block: usize,
    pub max_iterations: usize,
    /// First shift is `hint - initial_margin * max(1, |hint|)`.
    pub initial_margin: f64,
    /// Seed for the start block.
    pub seed: u64,
}

impl Default for ShiftInvertOptions {
    fn default() -> Self {
        Self { residual_tol: 1e-10, block: 8, max_iterations: 300, initial_margin: 1e-3, seed: 0 }
    }
}

/// Ground state and first excited level from shift-and-invert iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundState {
    pub energy: f64,
    pub first_excited: f64,
    pub state: Vec<Complex64>,
    /// Max of `‖H v - E v‖` over the two lowest Ritz pairs.
    pub residual: f64,
    pub shift: f64,
    pub iterations: usize,
}

impl GroundState {
    pub fn gap(&self) -> f64 {
        self.first_excited - self.energy
    }
}

/// Lowest two eigenpairs near the energy `hint`.
///
/// `start`, if given, seeds the first block vector (a nearby ground state
/// speeds things up considerably).
pub fn ground_state_near(
    h: &HamiltonianMatrix,
    hint: f64,
    start: Option<&[Complex64]>,
    opts: &ShiftInvertOptions,
) -> Result<GroundState, SpectrumError> {
    let n = h.dimension();
    if n < 2 {
        return Err(SpectrumError::InvalidCount { k: 2, dim: n });
    }
    if let Some(s) = start {
        if s.len() != n {
            return Err(HamiltonianError::DimensionMismatch { expected: n, got: s.len() }.into());
        }
    }
    let (kd, band) = h.to_upper_band();
    let (shift, factor) = factor_below_spectrum(n, kd, &band, hint, opts.initial_margin)?;

    let p = opts.block.clamp(2, n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut block = vec![Complex64::new(0.0, 0.0); n * p];
    for (i, c) in block.iter_mut().enumerate() {
        *c = match start {
            Some(s) if i < n => s[i],
            _ => Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        };
    }
    orthonormalize(&mut block, n, p, &mut rng);

    let mut hv = vec![Complex64::new(0.0, 0.0); n * p];
    let mut best: Option<(f64, Vec<Complex64>, [f64; 2])> = None;
    let mut stalled = 0;
    let mut iterations = 0;
    let tight = 1e-13;
    for it in 0..opts.max_iterations {
        iterations = it + 1;
        let mut info = 0;
        unsafe {
            zpbtrs(b'U', n as i32, kd as i32, p as i32, &factor, (kd + 1) as i32, &mut block, n as i32, &mut info);
        }
        if info != 0 {
            return Err(SpectrumError::Lapack { routine: "zpbtrs", info });
        }
        orthonormalize(&mut block, n, p, &mut rng);
        let theta = rayleigh_ritz(h, &mut block, &mut hv, n, p)?;

        let res = [0, 1].map(|i| {
            let v = &block[i * n..(i + 1) * n];
            let w = &hv[i * n..(i + 1) * n];
            w.iter().zip(v).map(|(x, y)| (x - y * theta[i]).norm_sqr()).sum::<f64>().sqrt()
        });
        let score = res[0] / theta[0].abs().max(1.0) + res[1] / theta[1].abs().max(1.0);
        let improved = best.as_ref().is_none_or(|(s, _, _)| score < 0.5 * s);
        if best.as_ref().is_none_or(|(s, _, _)| score < *s) {
            let mut kept = block[..2 * n].to_vec();
            kept.extend_from_slice(&[Complex64::new(theta[0], 0.0), Complex64::new(theta[1], 0.0)]);
            best = Some((score, kept, res));
        }
        stalled = if improved { 0 } else { stalled + 1 };
        if res[0] <= tight * theta[0].abs().max(1.0) && res[1] <= tight * theta[1].abs().max(1.0) {
            break;
        }
        if stalled >= 4 {
            break;
        }
    }

    let (_, kept, res) = best.expect("at least one iteration");
    let energy = kept[2 * n].re;
    let first_excited = kept[2 * n + 1].re;
    check_residual(res[0], energy, opts.residual_tol)?;
    check_residual(res[1], first_excited, opts.residual_tol)?;
    let mut state = kept[..n].to_vec();
    normalize(&mut state);
    canonicalize_phase(&mut state);
    Ok(GroundState {
        energy,
        first_excited,
        state,
        residual: res[0].max(res[1]),
        shift,
        iterations,
    })
}

/// Finds `shift < λ_min` and the Cholesky factor of `H - shift`.
fn factor_below_spectrum(
    n: usize,
    kd: usize,
    band: &[Complex64],
    hint: f64,
    initial_margin: f64,
) -> Result<(f64, Vec<Complex64>), SpectrumError> {
    let ld = kd + 1;
    let mut margin = initial_margin * hint.abs().max(1.0);
    for _ in 0..60 {
        let shift = hint - margin;
        let mut factor = band.to_vec();
        for b in 0..n {
            factor[kd + b * ld] -= shift;
        }
        let mut info = 0;
        unsafe { zpbtrf(b'U', n as i32, kd as i32, &mut factor, ld as i32, &mut info) };
        if info == 0 {
            return Ok((shift, factor));
        }
        if info < 0 {
            return Err(SpectrumError::Lapack { routine: "zpbtrf", info });
        }
        margin *= 4.0;
    }
    Err(SpectrumError::NoShift { hint })
}

/// Modified Gram–Schmidt, two passes, on the `p` columns of a column-major block.
fn orthonormalize(block: &mut [Complex64], n: usize, p: usize, rng: &mut ChaCha8Rng) {
    for j in 0..p {
        for _pass in 0..2 {
            for i in 0..j {
                let (head, tail) = block.split_at_mut(j * n);
                let qi = &head[i * n..(i + 1) * n];
                let vj = &mut tail[..n];
                let proj: Complex64 = qi.iter().zip(vj.iter()).map(|(q, v)| q.conj() * v).sum();
                vj.iter_mut().zip(qi).for_each(|(v, q)| *v -= q * proj);
            }
        }
        let col = &mut block[j * n..(j + 1) * n];
        if normalize(col) < 1e-300 {
            // collapsed column, refill and retry once
            col.iter_mut()
                .for_each(|c| *c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            for i in 0..j {
                let (head, tail) = block.split_at_mut(j * n);
                let qi = &head[i * n..(i + 1) * n];
                let vj = &mut tail[..n];
                let proj: Complex64 = qi.iter().zip(vj.iter()).map(|(q, v)| q.conj() * v).sum();
                vj.iter_mut().zip(qi).for_each(|(v, q)| *v -= q * proj);
            }
            normalize(&mut block[j * n..(j + 1) * n]);
        }
    }
}

/// Rotates `block` onto Ritz vectors of `h`, fills `hv = H block`, returns
/// Ritz values ascending.
fn rayleigh_ritz(
    h: &HamiltonianMatrix,
    block: &mut [Complex64],
    hv: &mut [Complex64],
    n: usize,
    p: usize,
) -> Result<Vec<f64>, SpectrumError> {
    for j in 0..p {
        h.apply_into(&block[j * n..(j + 1) * n], &mut hv[j * n..(j + 1) * n])?;
    }
    let mut g = vec![Complex64::new(0.0, 0.0); p * p];
    for j in 0..p {
        for i in 0..=j {
            let gij: Complex64 = block[i * n..(i + 1) * n]
                .iter()
                .zip(&hv[j * n..(j + 1) * n])
                .map(|(a, b)| a.conj() * b)
                .sum();
            g[i + j * p] = gij;
        }
    }
    for j in 0..p {
        g[j + j * p].im = 0.0;
    }
    let mut theta = vec![0.0; p];
    let mut work = vec![Complex64::new(0.0, 0.0); 4 * p];
    let mut rwork = vec![0.0; 3 * p];
    let mut info = 0;
    unsafe {
        zheev(b'V', b'U', p as i32, &mut g, p as i32, &mut theta, &mut work, (4 * p) as i32, &mut rwork, &mut info);
    }
    if info != 0 {
        return Err(SpectrumError::Lapack { routine: "zheev", info });
    }
    rotate(block, &g, n, p);
    rotate(hv, &g, n, p);
    Ok(theta)
}

fn rotate(block: &mut [Complex64], y: &[Complex64], n: usize, p: usize) {
    let old = block.to_vec();
    for j in 0..p {
        let out = &mut block[j * n..(j + 1) * n];
        out.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
        for i in 0..p {
            let coef = y[i + j * p];
            out.iter_mut().zip(&old[i * n..(i + 1) * n]).for_each(|(o, v)| *o += v * coef);
        }
    }
}

/// `E1 - E0` across a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct GapProfile {
    /// `(λ, gap)` sorted by λ.
    pub points: Vec<(f64, f64)>,
    pub argmin: f64,
    pub min_gap: f64,
}

impl GapProfile {
    /// Minimum over `points`; ties go to the smallest λ.
    pub fn from_gaps(mut points: Vec<(f64, f64)>) -> Result<Self, SpectrumError> {
        if points.len() < 2 {
            return Err(SpectrumError::TooFewPoints(points.len()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (argmin, min_gap) = points
            .iter()
            .copied()
            .fold((f64::NAN, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc });
        Ok(Self { points, argmin, min_gap })
    }

    /// Index of the minimum in `points`.
    pub fn argmin_index(&self) -> usize {
        self.points.iter().position(|p| p.0 == self.argmin).unwrap_or(0)
    }
}

pub fn gap_profile(solutions: &[(f64, EigenSolution)]) -> Result<GapProfile, SpectrumError> {
    let points: Vec<(f64, f64)> =
        solutions.iter().filter_map(|(l, s)| s.gap.map(|g| (*l, g))).collect();
    GapProfile::from_gaps(points)
}
