//! Sweep configuration, the flat `key = value` config file, and flag merging.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::field::reversal_bound;
use crate::lattice::{LatticeError, LatticeSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("config file line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("config file: {0}")]
    Value(String),
    #[error("invalid sweep configuration: {0}")]
    Invalid(String),
    #[error("empty b0 window: effective lower bound {lower} is not below b0_max = {upper}")]
    EmptyWindow { lower: f64, upper: f64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

/// One `B0` sweep at fixed gradient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub n_x: usize,
    pub n_y: usize,
    pub m_x: f64,
    pub b0_min: f64,
    pub b0_max: f64,
    pub b0_steps: usize,
    pub grain_sizes: Vec<usize>,
    pub k_eigenvalues: usize,
    pub delta0: f64,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
}

pub const DEFAULT_SEED: u64 = 20_240_607;

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_x: 31,
            n_y: 31,
            m_x: 0.0,
            b0_min: 0.05,
            b0_max: 1.0,
            b0_steps: 96,
            grain_sizes: vec![1, 3, 5, 10],
            k_eigenvalues: 10,
            delta0: 1e-4,
            seed: DEFAULT_SEED,
            output_path: None,
            format: OutputFormat::Csv,
        }
    }
}

impl SweepConfig {
    pub fn lattice(&self) -> Result<LatticeSpec, ConfigError> {
        Ok(LatticeSpec::new(self.n_x, self.n_y)?)
    }

    /// `max(b0_min, m_x L)`.
    pub fn effective_b0_min(&self) -> Result<f64, ConfigError> {
        Ok(self.b0_min.max(reversal_bound(&self.lattice()?, self.m_x)))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let spec = self.lattice()?;
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        if !(self.b0_min < self.b0_max) || !self.b0_min.is_finite() || !self.b0_max.is_finite() {
            return bad(format!("need b0_min < b0_max, got {} and {}", self.b0_min, self.b0_max));
        }
        if !(self.b0_min > 0.0) {
            return bad(format!("b0_min must be positive, got {}", self.b0_min));
        }
        if self.b0_steps < 2 {
            return bad(format!("b0_steps must be at least 2, got {}", self.b0_steps));
        }
        if !(self.m_x >= 0.0) || !self.m_x.is_finite() {
            return bad(format!("m_x must be non-negative, got {}", self.m_x));
        }
        if self.grain_sizes.is_empty() {
            return bad("grain list is empty".into());
        }
        let max_g = spec.n_x().min(spec.n_y());
        if let Some(g) = self.grain_sizes.iter().find(|&&g| g == 0 || g > max_g) {
            return bad(format!("grain size {g} outside 1..={max_g}"));
        }
        let mut sorted = self.grain_sizes.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.grain_sizes.len() {
            return bad("grain sizes must be distinct".into());
        }
        if self.k_eigenvalues == 0 || self.k_eigenvalues > spec.num_sites() {
            return bad(format!("k must be in 1..={}, got {}", spec.num_sites(), self.k_eigenvalues));
        }
        if !(self.delta0 > 0.0) || !self.delta0.is_finite() {
            return bad(format!("delta0 must be positive, got {}", self.delta0));
        }
        let lower = self.effective_b0_min()?;
        if !(lower < self.b0_max) {
            return Err(ConfigError::EmptyWindow { lower, upper: self.b0_max });
        }
        Ok(())
    }

    /// Uniform grid of `b0_steps` points from the effective lower bound to `b0_max`.
    pub fn grid(&self) -> Result<Vec<f64>, ConfigError> {
        self.validate()?;
        let lo = self.effective_b0_min()?;
        let n = self.b0_steps;
        let step = (self.b0_max - lo) / (n - 1) as f64;
        Ok((0..n).map(|i| if i + 1 == n { self.b0_max } else { lo + i as f64 * step }).collect())
    }
}

/// Every sweep setting as an optional override. Shared by the command line
/// and the config file.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct ConfigOverrides {
    /// Lattice sites along x
    #[arg(long)]
    pub nx: Option<usize>,
    /// Lattice sites along y
    #[arg(long)]
    pub ny: Option<usize>,
    /// Field gradient; a comma-separated list runs one sweep per value
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub mx: Option<Vec<f64>>,
    /// Lower end of the B0 sweep (raised to m_x L when needed)
    #[arg(long)]
    pub b0_min: Option<f64>,
    /// Upper end of the B0 sweep
    #[arg(long)]
    pub b0_max: Option<f64>,
    /// Number of grid points
    #[arg(long)]
    pub b0_steps: Option<usize>,
    /// Comma-separated grain side lengths
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub grains: Option<Vec<usize>>,
    /// Number of low-lying eigenvalues to report
    #[arg(long)]
    pub k: Option<usize>,
    /// Initial finite-difference step in B0
    #[arg(long)]
    pub delta0: Option<f64>,
    /// Seed for the iterative solver's random start block
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format [default: csv]
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Write the Hamiltonian at the first grid point as `row col re im` lines
    #[arg(long)]
    pub dump_matrix: Option<PathBuf>,
}

#[derive(Parser)]
#[command(no_binary_name = true)]
struct FileArgs {
    #[command(flatten)]
    values: ConfigOverrides,
}

impl ConfigOverrides {
    /// Field-wise `self` where set, else `fallback`.
    pub fn or(self, fallback: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            nx: self.nx.or(fallback.nx),
            ny: self.ny.or(fallback.ny),
            mx: self.mx.or(fallback.mx),
            b0_min: self.b0_min.or(fallback.b0_min),
            b0_max: self.b0_max.or(fallback.b0_max),
            b0_steps: self.b0_steps.or(fallback.b0_steps),
            grains: self.grains.or(fallback.grains),
            k: self.k.or(fallback.k),
            delta0: self.delta0.or(fallback.delta0),
            seed: self.seed.or(fallback.seed),
            out: self.out.or(fallback.out),
            format: self.format.or(fallback.format),
            dump_matrix: self.dump_matrix.or(fallback.dump_matrix),
        }
    }

    /// Parses `key = value` lines. Blank lines and `#` comments are ignored;
    /// keys are flag names with `-` or `_`.
    pub fn parse_file_contents(text: &str) -> Result<ConfigOverrides, ConfigError> {
        let mut argv = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax { line: i + 1, text: raw.to_string() });
            };
            let key = key.trim().replace('_', "-");
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1, text: raw.to_string() });
            }
            argv.push(format!("--{key}"));
            let value: Vec<&str> = value.split(',').map(str::trim).collect();
            argv.push(value.join(","));
        }
        FileArgs::try_parse_from(argv)
            .map(|f| f.values)
            .map_err(|e| ConfigError::Value(e.to_string().trim().to_string()))
    }

    pub fn from_file(path: &Path) -> Result<ConfigOverrides, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::parse_file_contents(&text)
    }

    /// Gradient list and the sweep configuration for its first entry.
    pub fn resolve(&self) -> (Vec<f64>, SweepConfig) {
        let d = SweepConfig::default();
        let gradients = self.mx.clone().unwrap_or_else(|| vec![d.m_x]);
        let config = SweepConfig {
            n_x: self.nx.unwrap_or(d.n_x),
            n_y: self.ny.unwrap_or(d.n_y),
            m_x: gradients.first().copied().unwrap_or(d.m_x),
            b0_min: self.b0_min.unwrap_or(d.b0_min),
            b0_max: self.b0_max.unwrap_or(d.b0_max),
            b0_steps: self.b0_steps.unwrap_or(d.b0_steps),
            grain_sizes: self.grains.clone().unwrap_or(d.grain_sizes),
            k_eigenvalues: self.k.unwrap_or(d.k_eigenvalues),
            delta0: self.delta0.unwrap_or(d.delta0),
            seed: self.seed.unwrap_or(d.seed),
            output_path: self.out.clone(),
            format: self.format.unwrap_or(d.format),
        };
        (gradients, config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid() {
        let c = SweepConfig::default();
        let g = c.grid().unwrap();
        assert_eq!(g.len(), 96);
        assert_eq!(g[0], 0.05);
        assert_eq!(g[95], 1.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn lower_bound_is_clamped_to_the_reversal_bound() {
        let c = SweepConfig { m_x: 0.015, ..Default::default() };
        assert!((c.effective_b0_min().unwrap() - 0.225).abs() < 1e-15);
        assert!((c.grid().unwrap()[0] - 0.225).abs() < 1e-15);
        let c = SweepConfig { m_x: 0.07, ..Default::default() };
        assert!(matches!(c.validate(), Err(ConfigError::EmptyWindow { .. })));
    }

    #[test]
    fn rejects_invalid_settings() {
        let base = SweepConfig::default();
        for bad in [
            SweepConfig { b0_min: 1.0, b0_max: 0.5, ..base.clone() },
            SweepConfig { b0_steps: 1, ..base.clone() },
            SweepConfig { grain_sizes: vec![], ..base.clone() },
            SweepConfig { grain_sizes: vec![1, 40], ..base.clone() },
            SweepConfig { grain_sizes: vec![3, 3], ..base.clone() },
            SweepConfig { k_eigenvalues: 0, ..base.clone() },
            SweepConfig { delta0: 0.0, ..base.clone() },
            SweepConfig { m_x: -0.01, ..base.clone() },
            SweepConfig { n_x: 3, ..base.clone() },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn config_file_syntax() {
        let text = "# comment\nnx = 11\nb0_min=0.1 # trailing\n\nmx = 0, 0.01\nformat = json\ngrains=1,3\n";
        let o = ConfigOverrides::parse_file_contents(text).unwrap();
        assert_eq!(o.nx, Some(11));
        assert_eq!(o.b0_min, Some(0.1));
        assert_eq!(o.mx, Some(vec![0.0, 0.01]));
        assert_eq!(o.format, Some(OutputFormat::Json));
        assert_eq!(o.grains, Some(vec![1, 3]));

        assert!(matches!(
            ConfigOverrides::parse_file_contents("nx 11"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            ConfigOverrides::parse_file_contents("colour = red"),
            Err(ConfigError::Value(_))
        ));
        assert!(matches!(
            ConfigOverrides::parse_file_contents("nx = eleven"),
            Err(ConfigError::Value(_))
        ));
    }

    #[test]
    fn command_line_wins() {
        let file = ConfigOverrides { nx: Some(11), ny: Some(13), ..Default::default() };
        let cli = ConfigOverrides { nx: Some(7), ..Default::default() };
        let merged = cli.or(file);
        assert_eq!((merged.nx, merged.ny), (Some(7), Some(13)));
        let (gradients, config) = merged.resolve();
        assert_eq!(gradients, vec![0.0]);
        assert_eq!((config.n_x, config.n_y, config.b0_steps), (7, 13, 96));
    }
}
