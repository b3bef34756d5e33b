//! Spectral and scattering computations for one-dimensional Schrodinger
//! operators `H = -d^2/dx^2 + V` with `V` an integrable density plus
//! finitely many Dirac atoms.
//!
//! The crate builds the full pipeline: Jost solutions and transmission /
//! reflection coefficients, bound states as zeros of `alpha` on the positive
//! imaginary axis, continuum eigenfunctions from the Lippmann-Schwinger
//! equation, the generalized Fourier transform they induce (with Plancherel
//! bookkeeping, spectral projections and spectral operators), time evolution
//! through the eigenfunction expansion, and wave-operator scattering
//! diagnostics. A dense finite-difference oracle provides independent
//! reference values for all of it.

pub mod error;
pub mod grid;
pub mod jost;
pub mod linalg;
pub mod lippmann;
pub mod oracle;
pub mod potential;
pub mod quad;
pub mod scattering;
pub mod spectrum;

pub use error::{Error, Result};
pub use grid::{SpatialGrid, WaveFunction};
pub use jost::{jost_coefficients, jost_solve, Frequency, JostCoefficients, JostSolution, Side};
pub use potential::{Potential, PotentialNorms};
