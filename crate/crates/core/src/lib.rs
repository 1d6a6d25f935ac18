//! Bivariate copula L-moments and rank-based copula parameter estimation.

pub mod asymptotics;
pub mod copula;
pub mod dependence;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod io;
pub mod legendre;
pub mod optimize;
pub mod quadrature;
pub mod rng;

pub use copula::{CopulaModel, Family};
pub use error::{Error, Result};
