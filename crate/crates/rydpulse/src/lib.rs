//! Random-pulse state generation and fixed-time state preparation on
//! Rydberg-Ising rings.
//!
//! The crate simulates a ring of `N` Rydberg atoms driven by piecewise-constant
//! global pulses, working in the trivial symmetry sector of the dihedral group
//! `D_N`. It provides:
//!
//! - construction of the sector basis from dihedral orbits of bitstrings,
//! - exact piecewise-constant time evolution via Hermitian eigendecomposition,
//! - ensemble statistics: entanglement entropy, entanglement-spectrum gap
//!   ratios against Wigner-Dyson surmises, Porter-Thomas anticoncentration,
//!   Jensen-Shannon divergences,
//! - the closed-form distribution of the drive-detuning ratio eta,
//! - GRAPE-style gradient optimization for fixed-time state preparation.

pub mod blockade;
pub mod error;
pub mod evolve;
pub mod geometry;
pub mod grape;
pub mod hamiltonian;
pub mod pulse;
pub mod rng;
pub mod runner;
pub mod sector;
pub mod state;
pub mod stats;

pub use error::Error;

/// Result alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;
