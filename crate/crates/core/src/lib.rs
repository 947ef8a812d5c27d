//! Numerical laboratory for nonlocal equations driven by α-stable Lévy
//! measures: stable-measure algebra, Littlewood-Paley norms, nonlocal operator
//! evaluation, Monte Carlo heat kernels, PDE solvers and verification
//! experiments.

pub mod error;
pub mod geometry;
pub mod levy;
pub mod quadrature;
pub mod grid;
pub mod spectral;
pub mod littlewood_paley;
pub mod operator;
pub mod kernel;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
