//! Magnetometry with a charged spinless particle on a finite square lattice.
//!
//! A field `B(x) = b0 - m_x |x - x0|` threads an `n_x × n_y` lattice. The
//! ground state of the tight-binding Hamiltonian (five-point kinetic stencil,
//! symmetric gauge) is used as a probe of `b0`. The crate computes its quantum
//! Fisher information, the Fisher information of position measurements with
//! finite resolution, and the ratio of the two across sweeps of `b0`.
//!
//! Pipeline: [`lattice`] and [`field`] define geometry and vector potential,
//! [`hamiltonian`] assembles the sparse matrix, [`spectrum`] diagonalises it,
//! [`estimation`] turns ground states into information figures, and
//! [`sweep`] with [`output`] drive whole parameter scans.

extern crate openblas_src;

pub mod config;
pub mod estimation;
pub mod field;
pub mod hamiltonian;
pub mod lattice;
pub mod output;
pub mod spectrum;
pub mod sweep;

pub use config::{ConfigOverrides, OutputFormat, SweepConfig};
pub use field::{sample_vector_potential, validate_profile, FieldProfile, VectorPotentialField};
pub use hamiltonian::{build_hamiltonian, hermiticity_defect, HamiltonianMatrix};
pub use lattice::{LatticeSpec, Site};
pub use spectrum::{gap_profile, solve_lowest, EigenSolution};
pub use sweep::{run_gradient_family, run_sweep, PointStatus, SweepRecord, SweepResult};
