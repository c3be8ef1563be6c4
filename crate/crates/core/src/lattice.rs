//! Finite square lattice geometry and site indexing.
//!
//! Sites are labelled `(j, k)` with `j = 1..=n_x` along x and `k = 1..=n_y`
//! along y. The linear index used by every matrix and vector in the crate is
//! row-major in `k`: `linear = (k - 1) * n_x + (j - 1)`.

use thiserror::Error;

/// Smallest side length that leaves room for next-nearest-neighbour hops on
/// both sides of an interior site.
pub const MIN_SIDE: usize = 5;

/// Upper bound on the number of sites accepted by [`LatticeSpec::new`].
pub const MAX_SITES: usize = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("lattice side {axis} = {value} is below the minimum of {MIN_SIDE}")]
    TooSmall { axis: char, value: usize },
    #[error("lattice {n_x}x{n_y} exceeds the supported size of {MAX_SITES} sites")]
    TooLarge { n_x: usize, n_y: usize },
}

/// Geometry of an `n_x × n_y` lattice in natural units (ħ = q = d = 1, m = 1/2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeSpec {
    n_x: usize,
    n_y: usize,
}

impl LatticeSpec {
    /// Lattice constant `d`.
    pub const LATTICE_CONSTANT: f64 = 1.0;
    /// Hopping energy `J = ħ²/(2 m d²)` with `m = 1/2`.
    pub const HOPPING: f64 = 1.0;

    pub fn new(n_x: usize, n_y: usize) -> Result<Self, LatticeError> {
        if n_x < MIN_SIDE {
            return Err(LatticeError::TooSmall { axis: 'x', value: n_x });
        }
        if n_y < MIN_SIDE {
            return Err(LatticeError::TooSmall { axis: 'y', value: n_y });
        }
        match n_x.checked_mul(n_y) {
            Some(n) if n <= MAX_SITES => Ok(Self { n_x, n_y }),
            _ => Err(LatticeError::TooLarge { n_x, n_y }),
        }
    }

    /// The 31 × 31 lattice used for all reference runs.
    pub fn reference() -> Self {
        Self { n_x: 31, n_y: 31 }
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn num_sites(&self) -> usize {
        self.n_x * self.n_y
    }

    /// Both sides odd, so the centre has the same number of sites on each side.
    pub fn is_canonical(&self) -> bool {
        self.n_x % 2 == 1 && self.n_y % 2 == 1
    }

    /// Centre site `((n_x + 1) / 2, (n_y + 1) / 2)`, rounded down for even sides.
    pub fn center(&self) -> Site {
        Site::new((self.n_x + 1) / 2, (self.n_y + 1) / 2)
    }

    /// `L = max_x |x - x0|` over the lattice.
    pub fn max_offset_x(&self) -> f64 {
        let x0 = self.center().j;
        ((x0 - 1).max(self.n_x - x0)) as f64 * Self::LATTICE_CONSTANT
    }

    pub fn contains(&self, j: isize, k: isize) -> bool {
        j >= 1 && k >= 1 && j as usize <= self.n_x && k as usize <= self.n_y
    }

    pub fn linear(&self, site: Site) -> usize {
        debug_assert!(site.j >= 1 && site.j <= self.n_x && site.k >= 1 && site.k <= self.n_y);
        (site.k - 1) * self.n_x + (site.j - 1)
    }

    pub fn site(&self, linear: usize) -> Site {
        debug_assert!(linear < self.num_sites());
        Site::new(linear % self.n_x + 1, linear / self.n_x + 1)
    }

    /// All sites in linear-index order.
    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.num_sites()).map(move |a| self.site(a))
    }
}

/// A lattice site `|j, k⟩`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub j: usize,
    pub k: usize,
}

impl Site {
    pub const fn new(j: usize, k: usize) -> Self {
        Self { j, k }
    }

    /// Position `(j d, k d)`; these are the eigenvalues of the X and Y observables.
    pub fn position(&self) -> (f64, f64) {
        (
            self.j as f64 * LatticeSpec::LATTICE_CONSTANT,
            self.k as f64 * LatticeSpec::LATTICE_CONSTANT,
        )
    }
}
