//! Numerical tools for the logarithmic Schrödinger equation
//! `i ∂t u + ½Δu = V u + λ ln(|u|²) u` with at-most-quadratic potentials.

pub mod diagnostics;
pub mod config;
pub mod error;
pub mod experiments;
pub mod field;
pub mod gaussian;
pub mod grid;
pub mod ode;
pub mod potentials;
pub mod snapshot;
pub mod solver;
pub mod tau;
pub mod variational;

pub use error::{Error, Result};
pub use num_complex::Complex64;
