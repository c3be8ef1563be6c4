//! Monte-Carlo check of `Var(λ̂) ≥ 1 / (M F)` with a grid maximum-likelihood estimator.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::EstimationError;

pub const GRID_POINTS: usize = 401;
/// Grid half-width in units of `1 / sqrt(M F)`.
pub const GRID_HALF_WIDTH: f64 = 10.0;

/// `GRID_POINTS` uniformly spaced values over `truth ± GRID_HALF_WIDTH / sqrt(M F)`.
pub fn mle_grid(truth: f64, m_samples: usize, fisher: f64) -> Result<Vec<f64>, EstimationError> {
    if !(fisher > 0.0) || !fisher.is_finite() {
        return Err(EstimationError::NonPositiveFisher(fisher));
    }
    if m_samples == 0 {
        return Err(EstimationError::NoSamples);
    }
    let half = GRID_HALF_WIDTH / (m_samples as f64 * fisher).sqrt();
    let step = 2.0 * half / (GRID_POINTS - 1) as f64;
    Ok((0..GRID_POINTS).map(|i| truth - half + i as f64 * step).collect())
}

/// `ln P(outcome | λ)` tabulated on an estimator grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodTable {
    grid: Vec<f64>,
    log_p: Vec<Vec<f64>>,
}

impl LikelihoodTable {
    /// `curves[i]` is the outcome distribution at `grid[i]`.
    pub fn from_curves(grid: Vec<f64>, curves: Vec<Vec<f64>>) -> Result<Self, EstimationError> {
        if grid.len() != curves.len() {
            return Err(EstimationError::LengthMismatch { expected: grid.len(), got: curves.len() });
        }
        if grid.len() < 3 || grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(EstimationError::InvalidDistribution("grid must increase strictly".into()));
        }
        let outcomes = curves[0].len();
        if let Some(bad) = curves.iter().find(|c| c.len() != outcomes) {
            return Err(EstimationError::LengthMismatch { expected: outcomes, got: bad.len() });
        }
        let log_p = curves
            .into_iter()
            .map(|c| c.into_iter().map(|p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY }).collect())
            .collect();
        Ok(Self { grid, log_p })
    }

    /// Evaluates `curve` at every grid point.
    pub fn tabulate<E>(
        grid: Vec<f64>,
        mut curve: impl FnMut(f64) -> Result<Vec<f64>, E>,
    ) -> Result<Self, E>
    where
        E: From<EstimationError>,
    {
        let curves = grid.iter().map(|&l| curve(l)).collect::<Result<Vec<_>, E>>()?;
        Ok(Self::from_curves(grid, curves)?)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn outcomes(&self) -> usize {
        self.log_p[0].len()
    }

    /// Grid index maximising the log-likelihood of `counts`; first on ties.
    pub fn mle_index(&self, counts: &[(usize, u64)]) -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, row) in self.log_p.iter().enumerate() {
            let ll: f64 = counts.iter().map(|&(o, n)| n as f64 * row[o]).sum();
            if ll > best.1 {
                best = (i, ll);
            }
        }
        best.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CramerRaoCheck {
    /// Mean squared error of the estimates about the true value.
    pub variance: f64,
    pub bound: f64,
    /// `variance / bound`.
    pub ratio: f64,
    pub mean_estimate: f64,
    pub trials: usize,
    pub samples: usize,
}

/// Draws `m_samples` outcomes from `p_true` per trial and estimates λ by grid MLE.
///
/// Trial `t` uses its own stream `t` of a ChaCha generator seeded with `seed`,
/// so results do not depend on how trials are scheduled.
pub fn cramer_rao_mc(
    p_true: &[f64],
    fisher: f64,
    truth: f64,
    m_samples: usize,
    table: &LikelihoodTable,
    trials: usize,
    seed: u64,
) -> Result<CramerRaoCheck, EstimationError> {
    if !(fisher > 0.0) || !fisher.is_finite() {
        return Err(EstimationError::NonPositiveFisher(fisher));
    }
    if m_samples == 0 || trials == 0 {
        return Err(EstimationError::NoSamples);
    }
    if p_true.len() != table.outcomes() {
        return Err(EstimationError::LengthMismatch { expected: table.outcomes(), got: p_true.len() });
    }
    let grid = table.grid();
    if !(grid[0] < truth && truth < grid[grid.len() - 1]) {
        return Err(EstimationError::GridDoesNotBracket(truth));
    }
    let sampler =
        WeightedIndex::new(p_true).map_err(|e| EstimationError::InvalidDistribution(e.to_string()))?;

    let mut sq = 0.0;
    let mut sum = 0.0;
    let mut counts = vec![0u64; p_true.len()];
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        counts.iter_mut().for_each(|c| *c = 0);
        for _ in 0..m_samples {
            counts[sampler.sample(&mut rng)] += 1;
        }
        let sparse: Vec<(usize, u64)> =
            counts.iter().enumerate().filter(|(_, &n)| n > 0).map(|(o, &n)| (o, n)).collect();
        let i = table.mle_index(&sparse);
        let estimate = grid[i];
        if i == 0 || i == grid.len() - 1 {
            return Err(EstimationError::GridEdge { estimate, trial });
        }
        sq += (estimate - truth).powi(2);
        sum += estimate;
    }
    let variance = sq / trials as f64;
    let bound = 1.0 / (m_samples as f64 * fisher);
    Ok(CramerRaoCheck {
        variance,
        bound,
        ratio: variance / bound,
        mean_estimate: sum / trials as f64,
        trials,
        samples: m_samples,
    })
}
