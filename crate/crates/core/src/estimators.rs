//! Rank-based copula parameter estimators: BLM, (τ, ρ)-inversion, minimum
//! Cramér–von Mises distance and pseudo maximum likelihood.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::copula::{ArchimedeanGenerator, CopulaModel, Family, ParameterRegion, STRICT_EPS};
use crate::dependence::{
    empirical_concordance, empirical_copula_at_sample, empirical_deltas, fgm_iter1_tau_rho,
    theoretical_delta, Concordance, DeltaVector, Direction, PseudoSample,
};
use crate::error::{Error, Result};
use crate::legendre;
use crate::optimize::{bisect, damped_newton, nelder_mead, Bounds, NelderMeadOptions};
use crate::quadrature::GaussLegendre;

/// Per-axis order of the fixed tensor rule behind the numeric moment maps.
pub const SOLVER_ORDER: usize = 128;
/// A moment system counts as solved when `‖δ(θ) − δ̂‖₂` is at most this.
pub const RESIDUAL_TOL: f64 = 1e-8;
pub const NEWTON_MAX_ITER: usize = 100;
/// Penalty weights tried in turn by the constrained Nelder–Mead.
const PENALTY_WEIGHTS: [f64; 4] = [1e2, 1e3, 1e4, 1e5];
const MAX_CONSTRAINT_VIOLATION: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Blm,
    TauRho,
    Md,
    Pml,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Blm, Method::TauRho, Method::Md, Method::Pml];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Blm => "blm",
            Method::TauRho => "taurho",
            Method::Md => "md",
            Method::Pml => "pml",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}` (blm, taurho, md, pml)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// An exact solution inside the validity region.
    Converged,
    /// An exact solution of the moment system that lies outside the region;
    /// reported raw, without projection.
    OutsideRegion,
    /// The system has no solution in the search box; the point of least
    /// residual (on the box boundary) is returned.
    Approximate,
    /// The solver failed; the estimate is the best point seen.
    NotConverged,
}

impl Status {
    /// Whether the estimate enters bias/RMSE summaries.
    pub fn is_usable(&self) -> bool {
        !matches!(self, Status::NotConverged)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub family: Family,
    pub method: Method,
    pub estimate: Vec<f64>,
    pub status: Status,
    /// Final objective (MD distance, PML mean negative log-likelihood).
    pub objective_value: Option<f64>,
    /// Moment residual for the equation-solving methods.
    pub residual: Option<f64>,
    pub iterations: usize,
    pub wall_time: f64,
}

impl EstimationResult {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// Runs `method` on `ps`.
pub fn estimate(
    ps: &PseudoSample,
    family: Family,
    method: Method,
    direction: Direction,
) -> Result<EstimationResult> {
    match method {
        Method::Blm => blm_estimate_directed(ps, family, direction),
        Method::TauRho => tau_rho_inversion(ps, family),
        Method::Md => md_estimate(ps, family),
        Method::Pml => pml_estimate(ps, family),
    }
}

// ---------------------------------------------------------------------------
// moment maps on a fixed rule

/// `(δ₁, …, δ_r)` and Spearman's ρ of an Archimedean copula from one pass of
/// the order-[`SOLVER_ORDER`] tensor rule. Uses `C(u,v) = C(v,u)`, so the
/// value is the same in both directions.
pub fn archimedean_moments(g: &ArchimedeanGenerator, r: usize) -> Result<(Vec<f64>, f64)> {
    let rule = GaussLegendre::cached(SOLVER_ORDER)?;
    let x = rule.nodes();
    let w = rule.weights();
    let m = x.len();
    let polys = (1..=r)
        .map(legendre::polynomial)
        .collect::<Result<Vec<_>>>()?;
    let dp: Vec<Vec<f64>> = polys
        .iter()
        .map(|p| x.iter().map(|&t| p.derivative_value(t)).collect())
        .collect();
    let phi: Vec<f64> = x.iter().map(|&t| g.phi(t)).collect();
    let mut deltas = vec![0.0; r];
    let mut mass = 0.0;
    for i in 0..m {
        for j in 0..=i {
            let d = g.phi_inverse(phi[i] + phi[j]) - x[i] * x[j];
            let ww = w[i] * w[j] * d;
            if i == j {
                mass += ww;
                for k in 0..r {
                    deltas[k] += ww * dp[k][i];
                }
            } else {
                mass += 2.0 * ww;
                for k in 0..r {
                    deltas[k] += ww * (dp[k][i] + dp[k][j]);
                }
            }
        }
    }
    Ok((deltas, 12.0 * mass))
}

fn generator_for(family: Family, params: &[f64]) -> Option<ArchimedeanGenerator> {
    match family {
        Family::Gumbel => Some(ArchimedeanGenerator::Gumbel { beta: params[0] }),
        Family::Gumbel2 => Some(ArchimedeanGenerator::Gumbel2 {
            beta1: params[0],
            beta2: params[1],
        }),
        Family::Clayton => Some(ArchimedeanGenerator::Clayton { theta: params[0] }),
        Family::Frank => Some(ArchimedeanGenerator::Frank {
            theta: if params[0] == 0.0 {
                STRICT_EPS
            } else {
                params[0]
            },
        }),
        _ => None,
    }
}

/// Search box for the numeric inversions.
pub fn search_bounds(family: Family) -> Option<Bounds> {
    let (lower, upper) = match family {
        Family::Gumbel => (vec![1.0], vec![50.0]),
        Family::Gumbel2 => (vec![1.0, 1e-6], vec![10.0, 10.0]),
        Family::Clayton => (vec![STRICT_EPS], vec![50.0]),
        Family::Frank => (vec![-50.0], vec![50.0]),
        _ => return None,
    };
    Some(Bounds { lower, upper })
}

// ---------------------------------------------------------------------------
// BLM

/// Outcome of solving `δ(θ) = δ̂`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSolution {
    pub params: Vec<f64>,
    pub residual: f64,
    pub status: Status,
    pub iterations: usize,
}

/// Exact inversion of the FGM closed forms.
pub fn invert_fgm_deltas(family: Family, d: &[f64]) -> Result<Vec<f64>> {
    let need = family.param_count();
    if !family.is_fgm() || d.len() < need {
        return Err(Error::Unsupported(format!(
            "closed-form inversion needs an FGM family and {need} moments"
        )));
    }
    Ok(match family {
        Family::Fgm => vec![18.0 * d[0]],
        Family::FgmIter1 => {
            let a2 = 120.0 * d[1];
            vec![18.0 * d[0] - 30.0 * d[1], a2]
        }
        _ => {
            let a3 = -1050.0 * d[2];
            let a2 = 120.0 * d[1];
            vec![18.0 * (d[0] - a2 / 72.0 - a3 / 450.0), a2, a3]
        }
    })
}

fn region_status(family: Family, params: &[f64]) -> Status {
    if family.region().contains(params) {
        Status::Converged
    } else {
        Status::OutsideRegion
    }
}

/// Solves the BLM moment system `δ_k(θ) = δ̂_k`, `k = 1..r`.
///
/// FGM families are inverted exactly. One-parameter Archimedean families use
/// bisection on the monotone map `θ ↦ δ₁(θ)`. The two-parameter Gumbel family
/// uses damped Newton with a finite-difference Jacobian in the box
/// `β₁ ∈ [1, 10]`, `β₂ ∈ [1e-6, 10]`, started from `init` and three fixed
/// points.
pub fn solve_blm_system(
    family: Family,
    delta_hat: &DeltaVector,
    init: Option<&[f64]>,
) -> Result<SystemSolution> {
    let r = family.param_count();
    if delta_hat.len() < r {
        return Err(Error::InvalidInput(format!(
            "{family} needs {r} moments, got {}",
            delta_hat.len()
        )));
    }
    let target = &delta_hat.values[..r];
    match family {
        Family::Product => Ok(SystemSolution {
            params: vec![],
            residual: 0.0,
            status: Status::Converged,
            iterations: 0,
        }),
        f if f.is_fgm() => {
            let params = invert_fgm_deltas(f, target)?;
            Ok(SystemSolution {
                status: region_status(f, &params),
                params,
                residual: 0.0,
                iterations: 0,
            })
        }
        Family::Gumbel2 => {
            let map = |p: &[f64]| -> Vec<f64> {
                let g = generator_for(Family::Gumbel2, p).expect("archimedean");
                match archimedean_moments(&g, 2) {
                    Ok((d, _)) => vec![d[0] - target[0], d[1] - target[1]],
                    Err(_) => vec![f64::NAN, f64::NAN],
                }
            };
            Ok(newton_multistart(Family::Gumbel2, map, init))
        }
        f => {
            let bounds = search_bounds(f).expect("archimedean family has bounds");
            let map = |t: f64| -> f64 {
                let g = generator_for(f, &[t]).expect("archimedean");
                archimedean_moments(&g, 1)
                    .map(|(d, _)| d[0])
                    .unwrap_or(f64::NAN)
            };
            Ok(monotone_inversion(f, map, target[0], &bounds))
        }
    }
}

const NEWTON_STARTS: [[f64; 2]; 3] = [[1.5, 0.5], [2.5, 1.0], [1.2, 2.0]];

fn newton_multistart<F>(family: Family, mut map: F, init: Option<&[f64]>) -> SystemSolution
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let bounds = search_bounds(family).expect("numeric family has bounds");
    let mut starts: Vec<Vec<f64>> = init.map(|p| vec![p.to_vec()]).unwrap_or_default();
    starts.extend(NEWTON_STARTS.iter().map(|s| s.to_vec()));
    let mut best: Option<SystemSolution> = None;
    let mut iterations = 0;
    for start in starts {
        let out = damped_newton(&mut map, &start, &bounds, NEWTON_MAX_ITER);
        iterations += out.iterations;
        let better = best.as_ref().is_none_or(|b| out.residual < b.residual);
        if better && out.residual.is_finite() {
            best = Some(SystemSolution {
                params: out.x,
                residual: out.residual,
                status: Status::NotConverged,
                iterations: 0,
            });
        }
        if best.as_ref().is_some_and(|b| b.residual <= RESIDUAL_TOL) {
            break;
        }
    }
    let mut sol = best.unwrap_or(SystemSolution {
        params: bounds.clamp(&NEWTON_STARTS[0]),
        residual: f64::INFINITY,
        status: Status::NotConverged,
        iterations: 0,
    });
    sol.iterations = iterations;
    sol.status = if sol.residual <= RESIDUAL_TOL {
        Status::Converged
    } else if bounds.on_boundary(&sol.params) {
        Status::Approximate
    } else {
        Status::NotConverged
    };
    sol
}

/// Solves `map(θ) = target` for an increasing scalar map over the box.
fn monotone_inversion<F: FnMut(f64) -> f64>(
    family: Family,
    mut map: F,
    target: f64,
    bounds: &Bounds,
) -> SystemSolution {
    let (lo, hi) = (bounds.lower[0], bounds.upper[0]);
    let (flo, fhi) = (map(lo) - target, map(hi) - target);
    let (theta, residual, status) = if flo >= 0.0 {
        (
            lo,
            flo.abs(),
            if flo <= RESIDUAL_TOL {
                Status::Converged
            } else {
                Status::Approximate
            },
        )
    } else if fhi <= 0.0 {
        (
            hi,
            fhi.abs(),
            if -fhi <= RESIDUAL_TOL {
                Status::Converged
            } else {
                Status::Approximate
            },
        )
    } else {
        match bisect(|t| map(t) - target, lo, hi, 1e-12, 200) {
            Ok(t) => {
                let t = if family == Family::Frank && t.abs() < STRICT_EPS {
                    STRICT_EPS.copysign(t)
                } else {
                    t
                };
                let res = (map(t) - target).abs();
                let status = if res <= RESIDUAL_TOL {
                    Status::Converged
                } else {
                    Status::NotConverged
                };
                (t, res, status)
            }
            Err(_) => (lo, flo.abs(), Status::NotConverged),
        }
    };
    SystemSolution {
        params: vec![theta],
        residual,
        status,
        iterations: 0,
    }
}

/// BLM estimate using the `[12]` moments.
pub fn blm_estimate(ps: &PseudoSample, family: Family) -> Result<EstimationResult> {
    blm_estimate_directed(ps, family, Direction::D12)
}

pub fn blm_estimate_directed(
    ps: &PseudoSample,
    family: Family,
    direction: Direction,
) -> Result<EstimationResult> {
    let start = Instant::now();
    let r = family.param_count();
    let delta_hat = empirical_deltas(ps, r.max(1), direction)?;
    let sol = solve_blm_system(family, &delta_hat, None)?;
    Ok(EstimationResult {
        family,
        method: Method::Blm,
        estimate: sol.params,
        status: sol.status,
        objective_value: None,
        residual: Some(sol.residual),
        iterations: sol.iterations,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// `L_k(u, v; θ) = u P_k(v) − δ_k(θ)`.
pub fn cls_score(u: f64, v: f64, model: &CopulaModel, k: usize) -> Result<f64> {
    Ok(u * legendre::eval_p(k, v)? - theoretical_delta(model, k, Direction::D12)?)
}

// ---------------------------------------------------------------------------
// (τ, ρ)-inversion

/// Roots of `τ(α₁, α₂) = τ̂`, `ρ(α₁, α₂) = ρ̂` for the one-iterated FGM family.
///
/// Substituting `α₁ = 3ρ̂ − α₂/4` gives `α₂² − 12ρ̂α₂ + 1800(τ̂ − 2ρ̂/3) = 0`.
/// Roots inside the region are preferred, then the one with smaller `|α₂|`.
/// With a negative discriminant the residual minimizer `α₂ = 6ρ̂` is returned.
pub fn fgm_iter1_tau_rho_solve(tau: f64, rho: f64) -> (Vec<f64>, Status) {
    let disc = 36.0 * rho * rho - 1800.0 * (tau - 2.0 * rho / 3.0);
    let point = |a2: f64| vec![3.0 * rho - a2 / 4.0, a2];
    if disc < 0.0 {
        return (point(6.0 * rho), Status::Approximate);
    }
    let s = disc.sqrt();
    let mut roots = [point(6.0 * rho - s), point(6.0 * rho + s)];
    let region = ParameterRegion::new(Family::FgmIter1);
    roots.sort_by(|a, b| {
        let key = |p: &Vec<f64>| (!region.contains(p), p[1].abs());
        let (ka, kb) = (key(a), key(b));
        ka.0.cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
    let best = roots[0].clone();
    let status = region_status(Family::FgmIter1, &best);
    (best, status)
}

/// Grid resolution of the level-curve scan in [`gumbel2_tau_rho_solve`].
const LEVEL_CURVE_GRID: usize = 32;

/// Solves `τ(β) = τ̂`, `ρ(β) = ρ̂` for the two-parameter Gumbel family.
///
/// `τ = 1 − 2/(β₁(2 + β₂))` is closed form, so the τ equation fixes the curve
/// `β₁ = c/(2 + β₂)` with `c = 2/(1 − τ̂)`. The ρ equation is then solved in β₂
/// along that curve: a grid scan, bisection on the first sign change (the
/// smallest root in β₂), or, without a sign change, the least-residual curve
/// point (`Approximate`). A τ̂ outside the attainable range is first projected
/// onto it. ρ is nearly constant along the curves, so β₂ is weakly identified.
fn gumbel2_tau_rho_solve(tau_hat: f64, rho_hat: f64) -> SystemSolution {
    let b = search_bounds(Family::Gumbel2).expect("gumbel2 has bounds");
    let (b1_lo, b1_hi, b2_lo, b2_hi) = (b.lower[0], b.upper[0], b.lower[1], b.upper[1]);
    // c = β₁(2 + β₂) ranges over [b1_lo(2 + b2_lo), b1_hi(2 + b2_hi)] in the box
    let c_raw = if tau_hat < 1.0 {
        2.0 / (1.0 - tau_hat)
    } else {
        f64::INFINITY
    };
    let c = c_raw.clamp(b1_lo * (2.0 + b2_lo), b1_hi * (2.0 + b2_hi));
    let (lo, hi) = ((c / b1_hi - 2.0).max(b2_lo), (c / b1_lo - 2.0).min(b2_hi));
    let point = |b2: f64| vec![c / (2.0 + b2), b2];
    let g = |b2: f64| -> f64 {
        let gen = generator_for(Family::Gumbel2, &point(b2)).expect("archimedean");
        archimedean_moments(&gen, 0)
            .map(|(_, r)| r - rho_hat)
            .unwrap_or(f64::NAN)
    };
    let finish = |b2: f64, gap: f64, exact: bool| {
        let params = point(b2);
        let tau_gap = 1.0 - 2.0 / c - tau_hat;
        let residual = tau_gap.hypot(gap);
        let status = if exact && residual <= RESIDUAL_TOL {
            Status::Converged
        } else if residual.is_finite() {
            Status::Approximate
        } else {
            Status::NotConverged
        };
        SystemSolution {
            params,
            residual,
            status,
            iterations: 0,
        }
    };
    if hi <= lo {
        return finish(lo, g(lo), true);
    }
    let grid: Vec<f64> = (0..=LEVEL_CURVE_GRID)
        .map(|i| lo + (hi - lo) * i as f64 / LEVEL_CURVE_GRID as f64)
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&x| g(x)).collect();
    if let Some(i) = (0..LEVEL_CURVE_GRID).find(|&i| vals[i] == 0.0 || vals[i] * vals[i + 1] < 0.0)
    {
        let root = if vals[i] == 0.0 {
            Ok(grid[i])
        } else {
            bisect(&g, grid[i], grid[i + 1], 1e-12, 200)
        };
        if let Ok(x) = root {
            return finish(x, g(x), true);
        }
    }
    // no sign change: golden-section search on |g| around the best grid point
    let i = (0..=LEVEL_CURVE_GRID)
        .min_by(|&a, &b| vals[a].abs().total_cmp(&vals[b].abs()))
        .expect("nonempty grid");
    let (mut a, mut z) = (
        grid[i.saturating_sub(1)],
        grid[(i + 1).min(LEVEL_CURVE_GRID)],
    );
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let (x1, x2) = (z - phi * (z - a), a + phi * (z - a));
        if g(x1).abs() <= g(x2).abs() {
            z = x2;
        } else {
            a = x1;
        }
    }
    let x = 0.5 * (a + z);
    let (gx, gi) = (g(x), vals[i]);
    if gx.abs() <= gi.abs() {
        finish(x, gx, gx.abs() <= RESIDUAL_TOL)
    } else {
        finish(grid[i], gi, gi.abs() <= RESIDUAL_TOL)
    }
}

/// Method-of-moments estimate from the sample τ̂ and ρ̂.
pub fn tau_rho_inversion(ps: &PseudoSample, family: Family) -> Result<EstimationResult> {
    let start = Instant::now();
    let rho = empirical_concordance(ps, Concordance::Rho)?;
    let (estimate, status, residual) = match family {
        Family::Product => (vec![], Status::Converged, 0.0),
        Family::Fgm => {
            let p = vec![3.0 * rho];
            let s = region_status(family, &p);
            (p, s, 0.0)
        }
        Family::FgmIter1 => {
            let tau = empirical_concordance(ps, Concordance::Tau)?;
            let (p, s) = fgm_iter1_tau_rho_solve(tau, rho);
            let (t, r) = fgm_iter1_tau_rho(p[0], p[1]);
            (p, s, ((t - tau).powi(2) + (r - rho).powi(2)).sqrt())
        }
        Family::Gumbel2 => {
            let tau = empirical_concordance(ps, Concordance::Tau)?;
            let sol = gumbel2_tau_rho_solve(tau, rho);
            (sol.params, sol.status, sol.residual)
        }
        Family::FgmIter2 => {
            return Err(Error::Unsupported(
                "(τ, ρ)-inversion identifies at most two parameters".into(),
            ))
        }
        f => {
            let bounds = search_bounds(f).expect("archimedean family has bounds");
            let map = |t: f64| -> f64 {
                let g = generator_for(f, &[t]).expect("archimedean");
                archimedean_moments(&g, 0)
                    .map(|(_, r)| r)
                    .unwrap_or(f64::NAN)
            };
            let sol = monotone_inversion(f, map, rho, &bounds);
            (sol.params, sol.status, sol.residual)
        }
    };
    Ok(EstimationResult {
        family,
        method: Method::TauRho,
        estimate,
        status,
        objective_value: None,
        residual: Some(residual),
        iterations: 0,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

// ---------------------------------------------------------------------------
// penalized Nelder–Mead for MD and PML

struct Minimum {
    params: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

/// Minimizes `f` over the validity region. `f` is evaluated at the retraction
/// of each trial point and the squared constraint violation is added with an
/// increasing weight until the violation is below `1e-8`.
fn minimize_in_region<F>(family: Family, mut f: F, starts: &[Vec<f64>]) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
{
    let region = family.region();
    let opts = NelderMeadOptions::default();
    let mut best: Option<Minimum> = None;
    for start in starts {
        let mut x = region.retract(start);
        let mut iterations = 0;
        let mut converged = false;
        for &mu in &PENALTY_WEIGHTS {
            let out = nelder_mead(
                |p| {
                    let q = region.retract(p);
                    f(&q) + mu * region.penalty(p)
                },
                &x,
                &opts,
            );
            iterations += out.iterations;
            converged = out.converged;
            x = out.x;
            if region.penalty(&x).sqrt() < MAX_CONSTRAINT_VIOLATION {
                break;
            }
        }
        let params = region.retract(&x);
        let value = f(&params);
        if best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(Minimum {
                params,
                value,
                iterations,
                converged,
            });
        } else if let Some(b) = best.as_mut() {
            b.iterations += iterations;
        }
    }
    best.expect("at least one start")
}

fn blm_start(ps: &PseudoSample, family: Family) -> Vec<f64> {
    match blm_estimate(ps, family) {
        Ok(r) if r.estimate.iter().all(|v| v.is_finite()) => family.region().retract(&r.estimate),
        _ => family.independence_params(),
    }
}

fn model_unchecked(family: Family, params: &[f64]) -> CopulaModel {
    CopulaModel::new(family, params).unwrap_or_else(|_| {
        CopulaModel::new(family, &family.region().retract(params))
            .expect("retracted parameters are valid")
    })
}

/// `n⁻¹ Σ (C_n(Ûᵢ) − C_θ(Ûᵢ))²`.
pub fn cvm_distance(ps: &PseudoSample, cn: &[f64], model: &CopulaModel) -> f64 {
    let s: f64 = ps
        .pairs()
        .iter()
        .zip(cn)
        .map(|(&(u, v), &c)| (c - model.cdf_unchecked(u, v)).powi(2))
        .sum();
    s / ps.n() as f64
}

/// Minimum Cramér–von Mises distance estimate, started from the projected BLM estimate.
pub fn md_estimate(ps: &PseudoSample, family: Family) -> Result<EstimationResult> {
    let start = Instant::now();
    let cn = empirical_copula_at_sample(ps);
    if family == Family::Product {
        let value = cvm_distance(ps, &cn, &CopulaModel::product());
        return Ok(trivial_result(family, Method::Md, value, start));
    }
    let init = blm_start(ps, family);
    let min = minimize_in_region(
        family,
        |p| cvm_distance(ps, &cn, &model_unchecked(family, p)),
        &[init],
    );
    Ok(EstimationResult {
        family,
        method: Method::Md,
        status: if min.converged {
            Status::Converged
        } else {
            Status::NotConverged
        },
        estimate: min.params,
        objective_value: Some(min.value),
        residual: None,
        iterations: min.iterations,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// `n⁻¹ Σ log c_θ(Ûᵢ)`.
pub fn mean_log_likelihood(ps: &PseudoSample, model: &CopulaModel) -> f64 {
    let s: f64 = ps
        .pairs()
        .iter()
        .map(|&(u, v)| model.density_unchecked(u, v).ln())
        .sum();
    s / ps.n() as f64
}

/// Pseudo maximum likelihood estimate with three deterministic starts: the
/// projected BLM estimate, the independence point, and the reflection of the
/// former through the latter.
pub fn pml_estimate(ps: &PseudoSample, family: Family) -> Result<EstimationResult> {
    let start = Instant::now();
    if family == Family::Product {
        return Ok(trivial_result(family, Method::Pml, 0.0, start));
    }
    let blm = blm_start(ps, family);
    let indep = family.independence_params();
    let reflected: Vec<f64> = blm.iter().zip(&indep).map(|(b, i)| 2.0 * i - b).collect();
    let objective = |p: &[f64]| {
        let ll = mean_log_likelihood(ps, &model_unchecked(family, p));
        if ll.is_nan() {
            f64::INFINITY
        } else {
            -ll
        }
    };
    let min = minimize_in_region(family, objective, &[blm, indep, reflected]);
    let ll = mean_log_likelihood(ps, &model_unchecked(family, &min.params));
    if ll.is_nan() {
        return Err(Error::Numeric(format!(
            "log-likelihood is NaN at feasible point {:?}",
            min.params
        )));
    }
    Ok(EstimationResult {
        family,
        method: Method::Pml,
        status: if min.converged && ll.is_finite() {
            Status::Converged
        } else {
            Status::NotConverged
        },
        estimate: min.params,
        objective_value: Some(-ll),
        residual: None,
        iterations: min.iterations,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

fn trivial_result(family: Family, method: Method, value: f64, start: Instant) -> EstimationResult {
    EstimationResult {
        family,
        method,
        estimate: vec![],
        status: Status::Converged,
        objective_value: Some(value),
        residual: None,
        iterations: 0,
        wall_time: start.elapsed().as_secs_f64(),
    }
}
