//! Shifted Legendre polynomials on `[0, 1]`.
//!
//! `P_k(u) = Σ_ℓ p_{k,ℓ} u^ℓ` with `p_{k,ℓ} = (−1)^{k+ℓ} (k+ℓ)! / ((ℓ!)² (k−ℓ)!)`.
//! The coefficient magnitude equals `C(k+ℓ, ℓ)·C(k, ℓ)`, which is evaluated in
//! exact integer arithmetic before conversion to `f64`.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest supported degree. `C(40,20)·C(20,10)` still fits comfortably in `u128`.
pub const MAX_DEGREE: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedLegendre {
    degree: usize,
    coeffs: Vec<f64>,
}

impl ShiftedLegendre {
    pub fn new(degree: usize) -> Result<Self> {
        Ok(Self {
            degree,
            coeffs: shifted_legendre_coeffs(degree)?,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Monomial coefficients, constant term first.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Horner evaluation without the domain check.
    #[inline]
    pub fn value(&self, u: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    #[inline]
    pub fn derivative_value(&self, u: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (l, &c)| acc * u + l as f64 * c)
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Coefficients of `P_k` in the monomial basis, constant term first.
pub fn shifted_legendre_coeffs(k: usize) -> Result<Vec<f64>> {
    if k > MAX_DEGREE {
        return Err(Error::DegreeTooLarge(k));
    }
    Ok((0..=k)
        .map(|l| {
            let magnitude = binomial((k + l) as u128, l as u128) * binomial(k as u128, l as u128);
            let sign = if (k + l).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * magnitude as f64
        })
        .collect())
}

fn table() -> &'static [ShiftedLegendre] {
    static TABLE: OnceLock<Vec<ShiftedLegendre>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (0..=MAX_DEGREE)
            .map(|k| ShiftedLegendre::new(k).expect("degree within table range"))
            .collect()
    })
}

/// Shared, precomputed polynomial of degree `k`.
pub fn polynomial(k: usize) -> Result<&'static ShiftedLegendre> {
    table().get(k).ok_or(Error::DegreeTooLarge(k))
}

fn check_unit(u: f64) -> Result<()> {
    if (0.0..=1.0).contains(&u) {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            value: u,
            domain: "[0, 1]",
        })
    }
}

pub fn eval_p(k: usize, u: f64) -> Result<f64> {
    check_unit(u)?;
    Ok(polynomial(k)?.value(u))
}

pub fn eval_p_derivative(k: usize, u: f64) -> Result<f64> {
    check_unit(u)?;
    Ok(polynomial(k)?.derivative_value(u))
}
