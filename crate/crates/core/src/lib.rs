//! Variable-exponent function spaces and potential-theoretic solution
//! formulas for the Stokes and Poisson problems on uniform grids.

pub mod cli;
pub mod error;
pub mod exponent;
pub mod grid;
pub mod kernels;
pub mod norms;
pub mod operators;
pub mod report;
pub mod solvers;

pub use error::{Error, Result};
