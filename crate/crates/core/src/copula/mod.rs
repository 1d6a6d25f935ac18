//! Parametric bivariate copula families.
//!
//! The FGM variants are polynomial perturbations of independence,
//! `C(u,v) = uv + Σ_j α_j f_j(u) f_j(v)` with `f₁ = uū`, `f₂ = u²ū`, `f₃ = u²ū²`.
//! The Archimedean families are evaluated through their generator.

mod generator;
mod region;
mod sampling;

use std::fmt;
use std::str::FromStr;

pub use generator::ArchimedeanGenerator;
pub use region::{fgm_iter1_upper, Constraint, ParameterRegion, FGM_ITER2_SCAN, STRICT_EPS};
pub use sampling::{sample, BISECTION_MAX_ITER, BISECTION_TOL};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Independence copula `uv`.
    Product,
    /// `uv + α uūvv̄`.
    Fgm,
    /// One-iterated FGM `(α₁, α₂)`.
    FgmIter1,
    /// Two-iterated FGM `(α₁, α₂, α₃)`.
    FgmIter2,
    /// Gumbel `β`.
    Gumbel,
    /// Two-parameter Gumbel-type Archimedean family `(β₁, β₂)`.
    Gumbel2,
    Clayton,
    Frank,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Product,
        Family::Fgm,
        Family::FgmIter1,
        Family::FgmIter2,
        Family::Gumbel,
        Family::Gumbel2,
        Family::Clayton,
        Family::Frank,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Product => "product",
            Family::Fgm => "fgm",
            Family::FgmIter1 => "fgm-iter1",
            Family::FgmIter2 => "fgm-iter2",
            Family::Gumbel => "gumbel",
            Family::Gumbel2 => "gumbel2",
            Family::Clayton => "clayton",
            Family::Frank => "frank",
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Family::Product => 0,
            Family::Fgm | Family::Gumbel | Family::Clayton | Family::Frank => 1,
            Family::FgmIter1 | Family::Gumbel2 => 2,
            Family::FgmIter2 => 3,
        }
    }

    pub fn is_fgm(&self) -> bool {
        matches!(self, Family::Fgm | Family::FgmIter1 | Family::FgmIter2)
    }

    pub fn is_archimedean(&self) -> bool {
        matches!(
            self,
            Family::Gumbel | Family::Gumbel2 | Family::Clayton | Family::Frank
        )
    }

    pub fn region(&self) -> ParameterRegion {
        ParameterRegion::new(*self)
    }

    /// Parameters at which the family reduces to (or is closest to) independence.
    pub fn independence_params(&self) -> Vec<f64> {
        match self {
            Family::Product => vec![],
            Family::Fgm => vec![0.0],
            Family::FgmIter1 => vec![0.0, 0.0],
            Family::FgmIter2 => vec![0.0, 0.0, 0.0],
            Family::Gumbel => vec![1.0],
            Family::Gumbel2 => vec![1.0, STRICT_EPS],
            Family::Clayton => vec![STRICT_EPS],
            Family::Frank => vec![STRICT_EPS],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown copula family `{s}`")))
    }
}

/// A family together with admissible parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaModel {
    family: Family,
    params: Vec<f64>,
}

impl CopulaModel {
    pub fn new(family: Family, params: &[f64]) -> Result<Self> {
        if params.len() != family.param_count() {
            return Err(Error::ParameterCount {
                family: family.name(),
                expected: family.param_count(),
                got: params.len(),
            });
        }
        let violations = family.region().violations(params);
        if !violations.is_empty() {
            return Err(Error::RegionViolation(violations));
        }
        Ok(Self {
            family,
            params: params.to_vec(),
        })
    }

    pub fn product() -> Self {
        Self {
            family: Family::Product,
            params: vec![],
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Generator for the Archimedean families, `None` otherwise.
    pub fn generator(&self) -> Option<ArchimedeanGenerator> {
        let p = &self.params;
        match self.family {
            Family::Gumbel => Some(ArchimedeanGenerator::Gumbel { beta: p[0] }),
            Family::Gumbel2 => Some(ArchimedeanGenerator::Gumbel2 {
                beta1: p[0],
                beta2: p[1],
            }),
            Family::Clayton => Some(ArchimedeanGenerator::Clayton { theta: p[0] }),
            Family::Frank => Some(ArchimedeanGenerator::Frank { theta: p[0] }),
            _ => None,
        }
    }

    pub fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        check_closed(u)?;
        check_closed(v)?;
        Ok(self.cdf_unchecked(u, v))
    }

    /// `C(u, v)` for `u, v ∈ [0, 1]` without argument validation.
    #[inline]
    pub fn cdf_unchecked(&self, u: f64, v: f64) -> f64 {
        match self.family {
            Family::Product => u * v,
            Family::Fgm | Family::FgmIter1 | Family::FgmIter2 => fgm_cdf(&self.params, u, v),
            _ => self
                .generator()
                .expect("archimedean family has a generator")
                .copula(u, v),
        }
    }

    pub fn density(&self, u: f64, v: f64) -> Result<f64> {
        check_open(u)?;
        check_open(v)?;
        Ok(self.density_unchecked(u, v))
    }

    /// `∂²C/∂u∂v` at an interior point without argument validation.
    #[inline]
    pub fn density_unchecked(&self, u: f64, v: f64) -> f64 {
        match self.family {
            Family::Product => 1.0,
            Family::Fgm | Family::FgmIter1 | Family::FgmIter2 => fgm_density(&self.params, u, v),
            _ => {
                let g = self
                    .generator()
                    .expect("archimedean family has a generator");
                let c = g.copula(u, v);
                let dc = g.phi_prime(c);
                -g.phi_second(c) * g.phi_prime(u) * g.phi_prime(v) / (dc * dc * dc)
            }
        }
    }

    /// `∂C/∂u`, the conditional distribution function of `V` given `U = u`.
    pub fn conditional_cdf(&self, u: f64, v: f64) -> Result<f64> {
        check_open(u)?;
        check_closed(v)?;
        Ok(self.conditional_cdf_unchecked(u, v))
    }

    #[inline]
    pub fn conditional_cdf_unchecked(&self, u: f64, v: f64) -> f64 {
        match self.family {
            Family::Product => v,
            Family::Fgm | Family::FgmIter1 | Family::FgmIter2 => {
                v + self
                    .params
                    .iter()
                    .enumerate()
                    .map(|(j, a)| a * fgm_basis_prime(j, u) * fgm_basis(j, v))
                    .sum::<f64>()
            }
            _ => {
                if v <= 0.0 {
                    return 0.0;
                }
                if v >= 1.0 {
                    return 1.0;
                }
                let g = self
                    .generator()
                    .expect("archimedean family has a generator");
                let c = g.copula(u, v);
                if c <= 0.0 {
                    return 0.0;
                }
                (g.phi_prime(u) / g.phi_prime(c)).clamp(0.0, 1.0)
            }
        }
    }
}

fn check_closed(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            value: x,
            domain: "[0, 1]",
        })
    }
}

fn check_open(x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            value: x,
            domain: "(0, 1)",
        })
    }
}

#[inline]
fn fgm_basis(j: usize, u: f64) -> f64 {
    let ub = 1.0 - u;
    match j {
        0 => u * ub,
        1 => u * u * ub,
        _ => u * u * ub * ub,
    }
}

#[inline]
fn fgm_basis_prime(j: usize, u: f64) -> f64 {
    match j {
        0 => 1.0 - 2.0 * u,
        1 => u * (2.0 - 3.0 * u),
        _ => 2.0 * u * (1.0 - u) * (1.0 - 2.0 * u),
    }
}

#[inline]
pub(crate) fn fgm_cdf(params: &[f64], u: f64, v: f64) -> f64 {
    u * v
        + params
            .iter()
            .enumerate()
            .map(|(j, a)| a * fgm_basis(j, u) * fgm_basis(j, v))
            .sum::<f64>()
}

#[inline]
pub(crate) fn fgm_density(params: &[f64], u: f64, v: f64) -> f64 {
    1.0 + params
        .iter()
        .enumerate()
        .map(|(j, a)| a * fgm_basis_prime(j, u) * fgm_basis_prime(j, v))
        .sum::<f64>()
}
