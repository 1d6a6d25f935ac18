//! Pseudo-observations, the empirical copula, bivariate copula L-moments and
//! concordance measures.

use std::fmt;
use std::str::FromStr;

use crate::copula::{CopulaModel, Family};
use crate::error::{Error, Result};
use crate::legendre::{self, MAX_DEGREE};
use crate::quadrature::{self, GaussLegendre};

/// Rescaled ranks `(F⁺₁(Xᵢ), F⁺₂(Yᵢ))` with `F⁺ = rank/(n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSample {
    pairs: Vec<(f64, f64)>,
}

impl PseudoSample {
    /// Wraps pairs that are already in `(0, 1)²`.
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidInput("empty pseudo-sample".into()));
        }
        if let Some(&(u, v)) = pairs
            .iter()
            .find(|(u, v)| !(*u > 0.0 && *u < 1.0 && *v > 0.0 && *v < 1.0))
        {
            return Err(Error::InvalidInput(format!(
                "pseudo-observation ({u}, {v}) is not inside the open unit square"
            )));
        }
        Ok(Self { pairs })
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    /// The sample with its two coordinates exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            pairs: self.pairs.iter().map(|&(u, v)| (v, u)).collect(),
        }
    }

    /// Coordinates oriented for `direction`: `[12]` as stored, `[21]` swapped.
    fn oriented(&self, direction: Direction) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.pairs.iter().map(move |&(u, v)| match direction {
            Direction::D12 => (u, v),
            Direction::D21 => (v, u),
        })
    }
}

/// Rescaled ranks of `x`; ties receive their average rank.
fn rescaled_ranks(x: &[f64]) -> (Vec<f64>, bool) {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; n];
    let mut tied = false;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        if end - start > 1 {
            tied = true;
        }
        // ranks start..end (0-based) → average of (start+1 ..= end)
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            out[i] = rank / (n as f64 + 1.0);
        }
        start = end;
    }
    (out, tied)
}

/// Coordinatewise rescaled ranks of raw bivariate data.
pub fn pseudo_observations(data: &[(f64, f64)]) -> Result<PseudoSample> {
    if data.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 observations, got {}",
            data.len()
        )));
    }
    if data.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidInput("data contain non-finite values".into()));
    }
    let xs: Vec<f64> = data.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = data.iter().map(|p| p.1).collect();
    let (u, tied_u) = rescaled_ranks(&xs);
    let (v, tied_v) = rescaled_ranks(&ys);
    if tied_u || tied_v {
        log::warn!("ties in the data were assigned average ranks");
    }
    PseudoSample::new(u.into_iter().zip(v).collect())
}

/// `C_n(u, v) = n⁻¹ #{i : Ûᵢ⁽¹⁾ ≤ u, Ûᵢ⁽²⁾ ≤ v}`.
pub fn empirical_copula(ps: &PseudoSample, u: f64, v: f64) -> f64 {
    let count = ps.pairs.iter().filter(|&&(a, b)| a <= u && b <= v).count();
    count as f64 / ps.n() as f64
}

/// `C_n(Ûᵢ)` for every sample point in `O(n log n)`.
pub fn empirical_copula_at_sample(ps: &PseudoSample) -> Vec<f64> {
    let n = ps.n();
    let pairs = &ps.pairs;
    // compress the second coordinate to 1-based ranks, equal values sharing a rank
    let mut vs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    vs.sort_by(f64::total_cmp);
    vs.dedup();
    let v_rank = |v: f64| vs.partition_point(|&x| x <= v);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| pairs[a].0.total_cmp(&pairs[b].0));
    let mut tree = Fenwick::new(vs.len());
    let mut out = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pairs[order[end]].0 == pairs[order[start]].0 {
            end += 1;
        }
        for &i in &order[start..end] {
            tree.add(v_rank(pairs[i].1));
        }
        for &i in &order[start..end] {
            out[i] = tree.prefix(v_rank(pairs[i].1)) as f64 / n as f64;
        }
        start = end;
    }
    out
}

struct Fenwick {
    tree: Vec<usize>,
}

impl Fenwick {
    fn new(size: usize) -> Self {
        Self {
            tree: vec![0; size + 1],
        }
    }

    fn add(&mut self, mut i: usize) {
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    fn prefix(&self, mut i: usize) -> usize {
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Direction {
    /// `δ_k[12]`: first coordinate weighted by `P_k` of the second.
    #[default]
    D12,
    /// `δ_k[21]`: roles exchanged.
    D21,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::D12 => "12",
            Direction::D21 => "21",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().trim_matches(|c| c == '[' || c == ']') {
            "12" => Ok(Direction::D12),
            "21" => Ok(Direction::D21),
            other => Err(Error::Config(format!(
                "direction must be 12 or 21, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaSource {
    Empirical,
    ClosedForm,
    Quadrature,
}

/// `(δ₁, …, δ_r)` in a fixed direction.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaVector {
    pub direction: Direction,
    pub values: Vec<f64>,
    pub source: DeltaSource,
}

impl DeltaVector {
    pub fn new(direction: Direction, values: Vec<f64>, source: DeltaSource) -> Self {
        Self {
            direction,
            values,
            source,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_order(k: usize) -> Result<()> {
    if k == 0 || k > MAX_DEGREE {
        return Err(Error::InvalidInput(format!(
            "L-moment order must be in 1..={MAX_DEGREE}, got {k}"
        )));
    }
    Ok(())
}

/// `δ̂_k = n⁻¹ Σ F⁺₁(Xᵢ) P_k(F⁺₂(Yᵢ))` (coordinates swapped for `[21]`).
pub fn empirical_delta(ps: &PseudoSample, k: usize, direction: Direction) -> Result<f64> {
    check_order(k)?;
    let p = legendre::polynomial(k)?;
    let sum: f64 = ps.oriented(direction).map(|(a, b)| a * p.value(b)).sum();
    Ok(sum / ps.n() as f64)
}

pub fn empirical_deltas(ps: &PseudoSample, r: usize, direction: Direction) -> Result<DeltaVector> {
    let values = (1..=r)
        .map(|k| empirical_delta(ps, k, direction))
        .collect::<Result<_>>()?;
    Ok(DeltaVector::new(direction, values, DeltaSource::Empirical))
}

/// Closed-form `δ_k` of the FGM variants; identical in both directions.
pub fn closed_form_delta_fgm(model: &CopulaModel, k: usize) -> Result<f64> {
    let p = model.params();
    let unsupported = || {
        Error::Unsupported(format!(
            "no closed-form δ_{k} for family {}",
            model.family()
        ))
    };
    match (model.family(), k) {
        (Family::Fgm, 1) => Ok(p[0] / 18.0),
        (Family::FgmIter1, 1) => Ok(p[0] / 18.0 + p[1] / 72.0),
        (Family::FgmIter1, 2) => Ok(p[1] / 120.0),
        (Family::FgmIter2, 1) => Ok(p[0] / 18.0 + p[1] / 72.0 + p[2] / 450.0),
        (Family::FgmIter2, 2) => Ok(p[1] / 120.0),
        (Family::FgmIter2, 3) => Ok(-p[2] / 1050.0),
        _ => Err(unsupported()),
    }
}

/// `∫∫ (C(u₁,u₂) − u₁u₂) P_k′(u₂) du₁ du₂` with a fixed rule.
pub fn delta_with_rule(
    model: &CopulaModel,
    k: usize,
    direction: Direction,
    rule: &GaussLegendre,
) -> Result<f64> {
    check_order(k)?;
    let p = legendre::polynomial(k)?;
    Ok(rule.integrate_2d(|u1, u2| {
        let c = match direction {
            Direction::D12 => model.cdf_unchecked(u1, u2),
            Direction::D21 => model.cdf_unchecked(u2, u1),
        };
        (c - u1 * u2) * p.derivative_value(u2)
    }))
}

/// `δ_k` by escalating tensor quadrature, bypassing any closed form.
pub fn quadrature_delta(model: &CopulaModel, k: usize, direction: Direction) -> Result<f64> {
    check_order(k)?;
    if model.family() == Family::Product {
        return Ok(0.0);
    }
    let mut err = None;
    let value = quadrature::escalating(|rule| match delta_with_rule(model, k, direction, rule) {
        Ok(v) => v,
        Err(e) => {
            err = Some(e);
            f64::NAN
        }
    });
    match err {
        Some(e) => Err(e),
        None => value,
    }
}

/// `δ_k` of a model: closed form where available, quadrature otherwise.
pub fn theoretical_delta(model: &CopulaModel, k: usize, direction: Direction) -> Result<f64> {
    check_order(k)?;
    if model.family().is_fgm() && k <= model.family().param_count() {
        return closed_form_delta_fgm(model, k);
    }
    quadrature_delta(model, k, direction)
}

pub fn theoretical_deltas(
    model: &CopulaModel,
    r: usize,
    direction: Direction,
) -> Result<DeltaVector> {
    let closed = model.family().is_fgm() && r <= model.family().param_count();
    let values = (1..=r)
        .map(|k| theoretical_delta(model, k, direction))
        .collect::<Result<_>>()?;
    let source = if closed || model.family() == Family::Product {
        DeltaSource::ClosedForm
    } else {
        DeltaSource::Quadrature
    };
    Ok(DeltaVector::new(direction, values, source))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Concordance {
    /// Kendall's τ.
    Tau,
    /// Spearman's ρ.
    Rho,
    /// Gini's γ.
    Gamma,
    /// Spearman's footrule φ.
    Footrule,
}

/// Closed-form `(τ, ρ)` of the one-iterated FGM family.
pub fn fgm_iter1_tau_rho(a1: f64, a2: f64) -> (f64, f64) {
    let tau = 2.0 * a1 / 9.0 + a2 / 18.0 + a1 * a2 / 450.0;
    let rho = a1 / 3.0 + a2 / 12.0;
    (tau, rho)
}

/// Population concordance measure of a model.
pub fn concordance(model: &CopulaModel, which: Concordance) -> Result<f64> {
    let p = model.params();
    match (model.family(), which) {
        (Family::Product, _) => return Ok(0.0),
        (Family::Fgm, Concordance::Tau) => return Ok(2.0 * p[0] / 9.0),
        (Family::Fgm, Concordance::Rho) => return Ok(p[0] / 3.0),
        (Family::FgmIter1, Concordance::Tau) => return Ok(fgm_iter1_tau_rho(p[0], p[1]).0),
        (Family::FgmIter1, Concordance::Rho) => return Ok(fgm_iter1_tau_rho(p[0], p[1]).1),
        _ => {}
    }
    match which {
        Concordance::Rho => quadrature::escalating(|r| {
            12.0 * r.integrate_2d(|u, v| model.cdf_unchecked(u, v)) - 3.0
        }),
        Concordance::Tau => match model.generator() {
            Some(g) => {
                quadrature::escalating(|r| 1.0 + 4.0 * r.integrate(|t| g.phi(t) / g.phi_prime(t)))
            }
            None => quadrature::escalating(|r| {
                4.0 * r
                    .integrate_2d(|u, v| model.cdf_unchecked(u, v) * model.density_unchecked(u, v))
                    - 1.0
            }),
        },
        Concordance::Gamma => quadrature::escalating(|r| {
            4.0 * r.integrate(|u| model.cdf_unchecked(u, 1.0 - u) - (u - model.cdf_unchecked(u, u)))
        }),
        Concordance::Footrule => {
            quadrature::escalating(|r| 6.0 * r.integrate(|u| model.cdf_unchecked(u, u)) - 2.0)
        }
    }
}

/// Sample Kendall τ̂ or Spearman ρ̂ of a pseudo-sample.
pub fn empirical_concordance(ps: &PseudoSample, which: Concordance) -> Result<f64> {
    let n = ps.n();
    if n < 2 {
        return Err(Error::InvalidInput("concordance needs n ≥ 2".into()));
    }
    match which {
        Concordance::Tau => Ok(kendall_tau(ps.pairs())),
        Concordance::Rho => Ok(pearson(ps.pairs())),
        Concordance::Gamma | Concordance::Footrule => Err(Error::Unsupported(
            "sample versions are provided for τ and ρ only".into(),
        )),
    }
}

fn pearson(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let (mu, mv) = pairs
        .iter()
        .fold((0.0, 0.0), |(a, b), &(u, v)| (a + u, b + v));
    let (mu, mv) = (mu / n, mv / n);
    let (mut suv, mut suu, mut svv) = (0.0, 0.0, 0.0);
    for &(u, v) in pairs {
        let (du, dv) = (u - mu, v - mv);
        suv += du * dv;
        suu += du * du;
        svv += dv * dv;
    }
    suv / (suu * svv).sqrt()
}

/// τ-a: `(concordant − discordant) / C(n, 2)`.
fn kendall_tau(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len();
    let total = (n * (n - 1) / 2) as f64;
    let mut sorted = pairs.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let has_ties = sorted.windows(2).any(|w| w[0].0 == w[1].0) || {
        let mut v: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        v.sort_by(f64::total_cmp);
        v.windows(2).any(|w| w[0] == w[1])
    };
    if has_ties {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..i {
                let d = (pairs[i].0 - pairs[j].0) * (pairs[i].1 - pairs[j].1);
                s += if d > 0.0 {
                    1.0
                } else if d < 0.0 {
                    -1.0
                } else {
                    0.0
                };
            }
        }
        return s / total;
    }
    let mut ys: Vec<f64> = sorted.into_iter().map(|p| p.1).collect();
    let discordant = count_inversions(&mut ys) as f64;
    (total - 2.0 * discordant) / total
}

/// Merge sort returning the number of inversions.
fn count_inversions(x: &mut [f64]) -> u64 {
    let n = x.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = count_inversions(&mut x[..mid]) + count_inversions(&mut x[mid..]);
    let mut merged = Vec::with_capacity(n);
    let (mut i, mut j) = (0, mid);
    while i < mid && j < n {
        if x[i] <= x[j] {
            merged.push(x[i]);
            i += 1;
        } else {
            merged.push(x[j]);
            inv += (mid - i) as u64;
            j += 1;
        }
    }
    merged.extend_from_slice(&x[i..mid]);
    merged.extend_from_slice(&x[j..n]);
    x.copy_from_slice(&merged);
    inv
}
