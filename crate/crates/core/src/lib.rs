//! Numerical laboratory for two-dimensional anyons in a strongly anisotropic
//! harmonic trap.
//!
//! Anyons are modeled in the magnetic gauge picture: bosons each carrying an
//! Aharonov–Bohm flux `2πα`. As the trap `x² + y²/ε²` tightens (`ε → 0`) the
//! low spectrum approaches `N/ε` plus the spectrum of the impenetrable 1D Bose
//! gas, whatever `α ≠ 0`. The modules provide the ingredients needed to
//! check that statement numerically:
//!
//! - [`geometry`]: vector potentials, singular phases, lattice link phases;
//! - [`oscillator`]: oscillator modes and Gauss–Hermite quadrature;
//! - [`tonks`]: the exact 1D limit model;
//! - [`calogero`]: the inverse-square model of the naive classical reduction;
//! - [`sparse`]: Hermitian sparse operators and a Lanczos eigensolver;
//! - [`pair`]: the two-anyon problem on a flux-safe grid;
//! - [`vmc`]: energies of gauged trial states by Monte Carlo;
//! - [`hardy`]: estimates of the many-anyon Hardy constant.

pub mod calogero;
pub mod error;
pub mod geometry;
pub mod hardy;
mod linalg;
pub mod oscillator;
pub mod pair;
pub mod sparse;
pub mod tonks;
pub mod vmc;

pub use error::{Error, Result};
