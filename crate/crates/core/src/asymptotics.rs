//! Asymptotic covariance of the BLM estimator: the sandwich `A₀⁻¹ Σ₀ A₀⁻ᵀ`,
//! the FGM closed forms as printed, a Monte Carlo influence-function oracle
//! for `Σ₀`, and Wald intervals.

use nalgebra::DMatrix;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::copula::{CopulaModel, Family};
use crate::dependence::{theoretical_delta, Direction};
use crate::error::{Error, Result};
use crate::legendre;
use crate::quadrature::GaussLegendre;
use crate::rng::{rng_from_seed, stream_seed};

/// `A₀` must satisfy `|det A₀|` above this.
pub const SINGULAR_DET: f64 = 1e-14;
/// Number of subintervals of the grid on which the influence corrections are tabulated.
const INFLUENCE_GRID: usize = 1024;
/// Draws per parallel chunk of the Monte Carlo oracle.
const CHUNK: usize = 8192;

/// `A₀`, `Σ₀` and the sandwich `Σ² = A₀⁻¹ Σ₀ A₀⁻ᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SandwichCov {
    pub a0: DMatrix<f64>,
    pub sigma0: DMatrix<f64>,
    pub sigma2: DMatrix<f64>,
}

impl SandwichCov {
    pub fn new(a0: DMatrix<f64>, sigma0: DMatrix<f64>) -> Result<Self> {
        let sigma2 = sandwich_cov(&a0, &sigma0)?;
        Ok(Self { a0, sigma0, sigma2 })
    }

    /// Symmetry within `1e-12` and eigenvalues above `−1e-10` for both `Σ₀` and `Σ²`.
    pub fn is_valid(&self) -> bool {
        [&self.sigma0, &self.sigma2]
            .iter()
            .all(|m| is_symmetric(m, 1e-12) && min_eigenvalue(m) >= -1e-10)
    }
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    m.is_square() && (m - m.transpose()).amax() <= tol
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

/// `A₀ = ∫ L̇ dC_θ₀` for the one- and two-parameter FGM families.
pub fn a0_fgm(family: Family, params: &[f64]) -> Result<DMatrix<f64>> {
    if params.len() != family.param_count() {
        return Err(Error::ParameterCount {
            family: family.name(),
            expected: family.param_count(),
            got: params.len(),
        });
    }
    match family {
        Family::Fgm => Ok(DMatrix::from_element(1, 1, -1.0 / 18.0)),
        // ∂L₁/∂α₂ = −∂δ₁/∂α₂ = −1/72
        Family::FgmIter1 => Ok(DMatrix::from_row_slice(
            2,
            2,
            &[-1.0 / 18.0, -1.0 / 72.0, 0.0, -1.0 / 120.0],
        )),
        f => Err(Error::Unsupported(format!(
            "A₀ is tabulated for fgm and fgm-iter1, not {f}"
        ))),
    }
}

/// The two-parameter FGM `Σ₀` polynomial exactly as printed.
pub fn sigma0_fgm2(alpha: f64, beta: f64) -> DMatrix<f64> {
    let (a, b) = (alpha, beta);
    let s11 = a * a / 270.0 + a * b / 540.0 + b * b / 3780.0 + 1.0 / 5.0;
    let s12 = b * b / 8640.0 + a * b / 2160.0;
    let s22 = a * a / 105.0 + a * b / 252.0 + 17.0 * b * b / 21000.0 + 1.0 / 15.0;
    DMatrix::from_row_slice(2, 2, &[s11, s12, s12, s22])
}

/// The two-parameter FGM `Σ²` polynomial exactly as printed.
pub fn sigma2_fgm2_printed(alpha: f64, beta: f64) -> DMatrix<f64> {
    let (a, b) = (alpha, beta);
    let s11 = 342.0 * a * a / 35.0 + 327.0 * a * b / 70.0 + 263.0 * b * b / 280.0 + 624.0 / 5.0;
    let s12 = 240.0 * a * a / 7.0 + 107.0 * a * b / 7.0 + 443.0 * b * b / 140.0 + 240.0;
    let s22 = 960.0 * a * a / 7.0 + 400.0 * a * b / 7.0 + 408.0 * b * b / 35.0 + 960.0;
    DMatrix::from_row_slice(2, 2, &[s11, s12, s12, s22])
}

/// `A₀⁻¹ Σ₀ A₀⁻ᵀ` via two LU solves.
pub fn sandwich_cov(a0: &DMatrix<f64>, sigma0: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a0.is_square() || a0.shape() != sigma0.shape() {
        return Err(Error::InvalidInput(format!(
            "A₀ {:?} and Σ₀ {:?} must be square of equal size",
            a0.shape(),
            sigma0.shape()
        )));
    }
    let lu = a0.clone().lu();
    if lu.determinant().abs() <= SINGULAR_DET {
        return Err(Error::Numeric("A₀ is singular".into()));
    }
    let x = lu
        .solve(sigma0)
        .ok_or_else(|| Error::Numeric("A₀ is singular".into()))?;
    let st = lu
        .solve(&x.transpose())
        .ok_or_else(|| Error::Numeric("A₀ is singular".into()))?;
    Ok(st.transpose())
}

/// The one-parameter FGM asymptotic variance as printed, `α₀²/270 + 1/5`.
/// See [`fgm1_variance_comparison`] for a check against the influence oracle.
pub fn asymptotic_var_fgm1(alpha0: f64) -> f64 {
    alpha0 * alpha0 / 270.0 + 0.2
}

/// Tabulated corrections `g₁_k`, `g₂_k` of the influence function.
///
/// For the BLM score `L_k(u) = u₁P_k(u₂) − δ_k` the influence function is
/// `L_k(ξ) + g₁_k(ξ₁) + g₂_k(ξ₂)` with
/// `g₁_k(x) = ∫ P_k(u₂)(1{x ≤ u₁} − u₁) dC` and
/// `g₂_k(x) = ∫ u₁P_k′(u₂)(1{x ≤ u₂} − u₂) dC`.
/// Integrating by parts against the conditional distribution functions
/// reduces both to one-dimensional integrals of smooth functions:
/// `∫P_k(u₂)c(u₁,u₂)du₂ = 1 − ∫P_k′(u₂)∂₁C(u₁,u₂)du₂` and
/// `∫u₁c(u₁,u₂)du₁ = 1 − ∫∂₂C(u₁,u₂)du₁`. The second identity uses
/// exchangeability, `∂₂C(u₁,u₂) = ∂₁C(u₂,u₁)`, which holds for every family here.
struct InfluenceTable {
    r: usize,
    deltas: Vec<f64>,
    /// `tail1[k][i] = ∫_{xᵢ}^1 E[P_k(U₂) | U₁ = u] du`.
    tail1: Vec<Vec<f64>>,
    /// `tail2[k][i] = ∫_{xᵢ}^1 P_k′(u) E[U₁ | U₂ = u] du`.
    tail2: Vec<Vec<f64>>,
    /// `∫ u P_k′(u) E[U₁ | U₂ = u] du`.
    center2: Vec<f64>,
}

impl InfluenceTable {
    fn new(model: &CopulaModel, r: usize) -> Result<Self> {
        let inner = GaussLegendre::cached(64)?;
        let piece = GaussLegendre::cached(8)?;
        let polys = (1..=r)
            .map(legendre::polynomial)
            .collect::<Result<Vec<_>>>()?;
        let deltas = (1..=r)
            .map(|k| theoretical_delta(model, k, Direction::D12))
            .collect::<Result<Vec<_>>>()?;
        let cond_mean_pk = |k: usize, u1: f64| {
            1.0 - inner.integrate(|u2| {
                polys[k].derivative_value(u2) * model.conditional_cdf_unchecked(u1, u2)
            })
        };
        let cond_mean_u1 =
            |u2: f64| 1.0 - inner.integrate(|u1| model.conditional_cdf_unchecked(u2, u1));

        let m = INFLUENCE_GRID;
        let h = 1.0 / m as f64;
        let mut tail1 = vec![vec![0.0; m + 1]; r];
        let mut tail2 = vec![vec![0.0; m + 1]; r];
        let mut center2 = vec![0.0; r];
        for i in (0..m).rev() {
            let a = i as f64 * h;
            let mut p1 = vec![0.0; r];
            let mut p2 = vec![0.0; r];
            for (&t, &w) in piece.nodes().iter().zip(piece.weights()) {
                let u = a + h * t;
                let n = cond_mean_u1(u);
                for k in 0..r {
                    p1[k] += w * h * cond_mean_pk(k, u);
                    let d = polys[k].derivative_value(u) * n;
                    p2[k] += w * h * d;
                    center2[k] += w * h * u * d;
                }
            }
            for k in 0..r {
                tail1[k][i] = tail1[k][i + 1] + p1[k];
                tail2[k][i] = tail2[k][i + 1] + p2[k];
            }
        }
        Ok(Self {
            r,
            deltas,
            tail1,
            tail2,
            center2,
        })
    }

    fn interp(table: &[f64], x: f64) -> f64 {
        let m = table.len() - 1;
        let pos = (x * m as f64).clamp(0.0, m as f64);
        let i = (pos.floor() as usize).min(m - 1);
        let t = pos - i as f64;
        table[i] * (1.0 - t) + table[i + 1] * t
    }

    fn influence(&self, xi1: f64, xi2: f64, out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate().take(self.r) {
            let p = legendre::polynomial(k + 1).expect("degree within table");
            let g1 = Self::interp(&self.tail1[k], xi1) - self.deltas[k];
            let g2 = Self::interp(&self.tail2[k], xi2) - self.center2[k];
            *o = xi1 * p.value(xi2) - self.deltas[k] + g1 + g2;
        }
    }
}

/// Monte Carlo estimate of `Σ₀ = var{influence function}` from `mc_n` draws
/// of the model; parallel over fixed-size chunks with derived seeds, so the
/// result depends only on `(model, r, mc_n, seed)`.
pub fn influence_cov_numeric(
    model: &CopulaModel,
    r: usize,
    mc_n: usize,
    seed: u64,
) -> Result<DMatrix<f64>> {
    if r == 0 || mc_n < 2 {
        return Err(Error::InvalidInput(
            "need r ≥ 1 and at least two draws".into(),
        ));
    }
    let table = InfluenceTable::new(model, r)?;
    let chunks = mc_n.div_ceil(CHUNK);
    let partial: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(mc_n - c * CHUNK);
            let mut rng = rng_from_seed(stream_seed(seed, c as u64));
            let mut sum = vec![0.0; r];
            let mut cross = vec![0.0; r * r];
            let mut psi = vec![0.0; r];
            for _ in 0..len {
                let (u, v) = model.draw(&mut rng)?;
                table.influence(u, v, &mut psi);
                for a in 0..r {
                    sum[a] += psi[a];
                    for b in 0..r {
                        cross[a * r + b] += psi[a] * psi[b];
                    }
                }
            }
            Ok((sum, cross))
        })
        .collect();
    let mut sum = vec![0.0; r];
    let mut cross = vec![0.0; r * r];
    for p in partial {
        let (s, c) = p?;
        sum.iter_mut().zip(&s).for_each(|(a, b)| *a += b);
        cross.iter_mut().zip(&c).for_each(|(a, b)| *a += b);
    }
    let n = mc_n as f64;
    let cov = DMatrix::from_fn(r, r, |a, b| {
        (cross[a * r + b] - sum[a] * sum[b] / n) / (n - 1.0)
    });
    Ok((&cov + cov.transpose()) * 0.5)
}

/// `estimateₖ ± z_{(1+level)/2} √(cov_kk / n)`.
pub fn wald_ci(
    estimate: &[f64],
    cov: &DMatrix<f64>,
    n: usize,
    level: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(0.0..1.0).contains(&level) {
        return Err(Error::InvalidInput(format!("level {level} not in [0, 1)")));
    }
    if n == 0 || cov.nrows() != estimate.len() || cov.ncols() != estimate.len() {
        return Err(Error::InvalidInput(
            "covariance shape does not match the estimate".into(),
        ));
    }
    let z = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .inverse_cdf(0.5 * (1.0 + level));
    estimate
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let var = cov[(k, k)];
            if var < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "negative variance {var} at {k}"
                )));
            }
            let half = z * (var / n as f64).sqrt();
            Ok((e - half, e + half))
        })
        .collect()
}

/// The printed two-parameter FGM `Σ²` set against the sandwich built from the
/// printed `Σ₀` and the derivative-consistent `A₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sigma2Comparison {
    pub implemented: DMatrix<f64>,
    pub printed: DMatrix<f64>,
    pub max_diagonal_gap: f64,
    pub max_off_diagonal_gap: f64,
}

pub fn compare_sigma2_with_printed(alpha: f64, beta: f64) -> Result<Sigma2Comparison> {
    let implemented = sandwich_cov(
        &a0_fgm(Family::FgmIter1, &[alpha, beta])?,
        &sigma0_fgm2(alpha, beta),
    )?;
    let printed = sigma2_fgm2_printed(alpha, beta);
    let diff = &implemented - &printed;
    let max_diagonal_gap = diff.diagonal().amax();
    let max_off_diagonal_gap = (diff[(0, 1)].abs()).max(diff[(1, 0)].abs());
    Ok(Sigma2Comparison {
        implemented,
        printed,
        max_diagonal_gap,
        max_off_diagonal_gap,
    })
}

/// The printed one-parameter FGM variance against `A₀⁻¹ Σ₀ A₀⁻ᵀ` with `Σ₀`
/// from the influence oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceComparison {
    pub printed: f64,
    pub oracle: f64,
    pub relative_gap: f64,
}

pub fn fgm1_variance_comparison(alpha: f64, mc_n: usize, seed: u64) -> Result<VarianceComparison> {
    let model = CopulaModel::new(Family::Fgm, &[alpha])?;
    let sigma0 = influence_cov_numeric(&model, 1, mc_n, seed)?;
    let oracle = sandwich_cov(&a0_fgm(Family::Fgm, &[alpha])?, &sigma0)?[(0, 0)];
    let printed = asymptotic_var_fgm1(alpha);
    Ok(VarianceComparison {
        printed,
        oracle,
        relative_gap: (printed - oracle).abs() / oracle.abs(),
    })
}

/// The printed two-parameter `Σ₀` against the influence oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct Sigma0Comparison {
    pub printed: DMatrix<f64>,
    pub oracle: DMatrix<f64>,
    /// Largest relative gap over the diagonal.
    pub max_relative_gap: f64,
}

impl Sigma0Comparison {
    pub fn within(&self, tol: f64) -> bool {
        self.max_relative_gap <= tol
    }
}

pub fn compare_sigma0_with_oracle(
    alpha: f64,
    beta: f64,
    mc_n: usize,
    seed: u64,
) -> Result<Sigma0Comparison> {
    let model = CopulaModel::new(Family::FgmIter1, &[alpha, beta])?;
    let oracle = influence_cov_numeric(&model, 2, mc_n, seed)?;
    let printed = sigma0_fgm2(alpha, beta);
    let max_relative_gap = (0..2)
        .map(|k| (printed[(k, k)] - oracle[(k, k)]).abs() / oracle[(k, k)].abs())
        .fold(0.0, f64::max);
    Ok(Sigma0Comparison {
        printed,
        oracle,
        max_relative_gap,
    })
}

/// Sandwich covariance with `Σ₀` from the influence oracle.
pub fn oracle_sandwich(model: &CopulaModel, mc_n: usize, seed: u64) -> Result<SandwichCov> {
    let a0 = a0_fgm(model.family(), model.params())?;
    let sigma0 = influence_cov_numeric(model, model.family().param_count(), mc_n, seed)?;
    SandwichCov::new(a0, sigma0)
}
