use std::fmt;

use thiserror::Error;

use crate::copula::Constraint;

/// Errors produced by model evaluation, estimation and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("Legendre degree {0} exceeds the supported maximum of {max}", max = crate::legendre::MAX_DEGREE)]
    DegreeTooLarge(usize),

    #[error("argument {value} is outside the domain {domain}")]
    OutOfDomain { value: f64, domain: &'static str },

    #[error("parameters violate the validity region: {}", ViolationList(.0))]
    RegionViolation(Vec<Constraint>),

    #[error("family {family} expects {expected} parameter(s), got {got}")]
    ParameterCount {
        family: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("bisection failed to bracket a root: {0}")]
    Bracketing(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

struct ViolationList<'a>(&'a [Constraint]);

impl fmt::Display for ViolationList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
