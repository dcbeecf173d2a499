//! Numerical laboratory for boundary layers in periodic homogenization.
//!
//! The crate is organised around the objects that appear when a periodic
//! elliptic problem is posed in a half-space `{y·n > a}`:
//!
//! - [`geometry`]: normal frames, lattice scans and Diophantine diagnostics
//!   of the boundary direction `n`.
//! - [`cell`]: periodic cell problems, the homogenized tensor and the
//!   auxiliary potentials built from the first-order correctors.
//! - [`blsolver`]: boundary-layer correctors (exact Fourier series, rational
//!   strips, regularized quasiperiodic lifts) and the ε-sweep Dirichlet solver.
//! - [`kernels`]: explicit half-plane Green and Poisson kernels.
//! - [`asymptotics`]: tails, ergodic means, decay fits and the slow-convergence
//!   witness for Liouville directions.
//! - [`harness`]: the experiment runner behind the `blhomlab` binary.

pub mod asymptotics;
pub mod blsolver;
pub mod cell;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod kernels;
pub mod krylov;
pub mod quadrature;
pub mod spectral;

pub use error::{Error, Result};
