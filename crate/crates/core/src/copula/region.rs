//! Parameter validity regions written as constraint functions `ℓ_j(θ) ≥ 0`.

use std::fmt;

use super::{fgm_density, Family};

/// Smallest admissible value used when retracting onto a strict inequality.
pub const STRICT_EPS: f64 = 1e-8;

/// Grid resolution of the density-nonnegativity scan for the two-iterated FGM family.
pub const FGM_ITER2_SCAN: usize = 51;

/// Identifier of a single region constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// Parameters must be finite numbers.
    Finite,
    /// FGM: `1 − α² ≥ 0`.
    FgmAlpha,
    /// One-iterated FGM `ℓ₁ = 1 − α₁²`.
    L1,
    /// One-iterated FGM `ℓ₂ = α₁ + α₂ + 1`.
    L2,
    /// One-iterated FGM `ℓ₃ = ½[3 − α₁ + (9 − 6α₁ − 3α₁²)^{1/2}] − α₂`.
    L3,
    /// Two-iterated FGM `|α₁| ≤ 1`.
    Iter2Alpha1,
    /// Two-iterated FGM `|α₂| ≤ 2`.
    Iter2Alpha2,
    /// Two-iterated FGM `|α₃| ≤ 4`.
    Iter2Alpha3,
    /// Two-iterated FGM density nonnegative on the scan grid.
    Iter2Density,
    /// Gumbel `β ≥ 1`.
    GumbelBeta,
    /// Two-parameter Gumbel `β₁ ≥ 1`.
    Gumbel2Beta1,
    /// Two-parameter Gumbel `β₂ > 0`.
    Gumbel2Beta2,
    /// Clayton `θ > 0`.
    ClaytonTheta,
    /// Frank `θ ≠ 0`.
    FrankTheta,
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Finite => "finite parameters",
            Self::FgmAlpha => "|α| ≤ 1",
            Self::L1 => "ℓ1: 1 − α1² ≥ 0",
            Self::L2 => "ℓ2: α1 + α2 + 1 ≥ 0",
            Self::L3 => "ℓ3: ½[3 − α1 + √(9 − 6α1 − 3α1²)] − α2 ≥ 0",
            Self::Iter2Alpha1 => "|α1| ≤ 1",
            Self::Iter2Alpha2 => "|α2| ≤ 2",
            Self::Iter2Alpha3 => "|α3| ≤ 4",
            Self::Iter2Density => "density ≥ 0 on the 51×51 grid",
            Self::GumbelBeta => "β ≥ 1",
            Self::Gumbel2Beta1 => "β1 ≥ 1",
            Self::Gumbel2Beta2 => "β2 > 0",
            Self::ClaytonTheta => "θ > 0",
            Self::FrankTheta => "θ ≠ 0",
        };
        f.write_str(s)
    }
}

/// Upper boundary `½[3 − α₁ + (9 − 6α₁ − 3α₁²)^{1/2}]` of the one-iterated FGM region.
pub fn fgm_iter1_upper(alpha1: f64) -> f64 {
    0.5 * (3.0 - alpha1 + (9.0 - 6.0 * alpha1 - 3.0 * alpha1 * alpha1).max(0.0).sqrt())
}

/// The validity region of a family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParameterRegion {
    family: Family,
}

impl ParameterRegion {
    pub fn new(family: Family) -> Self {
        Self { family }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Values of the constraint functions; a constraint holds when its value is
    /// `≥ 0` (or `> 0` for the strict ones, see [`Constraint::is_strict`]).
    pub fn constraint_values(&self, params: &[f64]) -> Vec<(Constraint, f64)> {
        use Constraint::*;
        match self.family {
            Family::Product => vec![],
            Family::Fgm => vec![(FgmAlpha, 1.0 - params[0].abs())],
            Family::FgmIter1 => {
                let (a1, a2) = (params[0], params[1]);
                vec![
                    (L1, 1.0 - a1 * a1),
                    (L2, a1 + a2 + 1.0),
                    (L3, fgm_iter1_upper(a1) - a2),
                ]
            }
            Family::FgmIter2 => vec![
                (Iter2Alpha1, 1.0 - params[0].abs()),
                (Iter2Alpha2, 2.0 - params[1].abs()),
                (Iter2Alpha3, 4.0 - params[2].abs()),
                (Iter2Density, fgm_iter2_min_density(params)),
            ],
            Family::Gumbel => vec![(GumbelBeta, params[0] - 1.0)],
            Family::Gumbel2 => vec![(Gumbel2Beta1, params[0] - 1.0), (Gumbel2Beta2, params[1])],
            Family::Clayton => vec![(ClaytonTheta, params[0])],
            Family::Frank => vec![(FrankTheta, params[0].abs())],
        }
    }

    /// Violated constraints, empty when the parameters are admissible.
    pub fn violations(&self, params: &[f64]) -> Vec<Constraint> {
        if params.iter().any(|p| !p.is_finite()) {
            return vec![Constraint::Finite];
        }
        self.constraint_values(params)
            .into_iter()
            .filter(|&(c, value)| {
                if c.is_strict() {
                    value <= 0.0
                } else {
                    value < 0.0
                }
            })
            .map(|(c, _)| c)
            .collect()
    }

    pub fn contains(&self, params: &[f64]) -> bool {
        self.violations(params).is_empty()
    }

    /// Squared exterior penalty `Σ max(0, −ℓ_j)²`.
    pub fn penalty(&self, params: &[f64]) -> f64 {
        if params.iter().any(|p| !p.is_finite()) {
            return f64::INFINITY;
        }
        self.constraint_values(params)
            .into_iter()
            .map(|(c, v)| {
                let v = if c.is_strict() { v - STRICT_EPS } else { v };
                v.min(0.0).powi(2)
            })
            .sum()
    }

    /// Maps a parameter vector into the closed region. Points already inside are
    /// returned unchanged.
    pub fn retract(&self, params: &[f64]) -> Vec<f64> {
        let mut p = params.to_vec();
        match self.family {
            Family::Product => {}
            Family::Fgm => p[0] = p[0].clamp(-1.0, 1.0),
            Family::FgmIter1 => {
                p[0] = p[0].clamp(-1.0, 1.0);
                p[1] = p[1].clamp(-1.0 - p[0], fgm_iter1_upper(p[0]));
            }
            Family::FgmIter2 => {
                p[0] = p[0].clamp(-1.0, 1.0);
                p[1] = p[1].clamp(-2.0, 2.0);
                p[2] = p[2].clamp(-4.0, 4.0);
                if fgm_iter2_min_density(&p) < 0.0 {
                    // The admissible set is convex and contains 0: shrink radially.
                    let (mut lo, mut hi) = (0.0, 1.0);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        let q: Vec<f64> = p.iter().map(|x| x * mid).collect();
                        if fgm_iter2_min_density(&q) >= 0.0 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    p.iter_mut().for_each(|x| *x *= lo);
                }
            }
            Family::Gumbel => p[0] = p[0].max(1.0),
            Family::Gumbel2 => {
                p[0] = p[0].max(1.0);
                p[1] = p[1].max(STRICT_EPS);
            }
            Family::Clayton => p[0] = p[0].max(STRICT_EPS),
            Family::Frank => {
                if p[0].abs() < STRICT_EPS {
                    p[0] = if p[0] < 0.0 { -STRICT_EPS } else { STRICT_EPS };
                }
            }
        }
        p
    }
}

impl Constraint {
    pub fn is_strict(&self) -> bool {
        matches!(
            self,
            Self::Gumbel2Beta2 | Self::ClaytonTheta | Self::FrankTheta
        )
    }
}

/// Minimum of the two-iterated FGM density over a closed `51×51` grid.
fn fgm_iter2_min_density(params: &[f64]) -> f64 {
    let m = FGM_ITER2_SCAN - 1;
    let mut min = f64::INFINITY;
    for i in 0..=m {
        let u = i as f64 / m as f64;
        for j in 0..=i {
            let v = j as f64 / m as f64;
            min = min.min(fgm_density(params, u, v));
        }
    }
    min
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fgm_iter1_region_points() {
        let r = ParameterRegion::new(Family::FgmIter1);
        assert!(r.contains(&[0.941, 1.445]));
        assert!(r.contains(&[-1.0, 0.0]));
        assert_eq!(r.violations(&[1.2, 0.0]), vec![Constraint::L1]);
        assert_eq!(r.violations(&[0.0, -1.5]), vec![Constraint::L2]);
        assert_eq!(r.violations(&[0.0, 3.1]), vec![Constraint::L3]);
    }

    #[test]
    fn fgm_iter1_region_is_density_nonnegativity() {
        // A point just outside ℓ3 must produce a negative density somewhere.
        let a1 = 0.3;
        let inside = [a1, fgm_iter1_upper(a1) - 1e-6];
        let outside = [a1, fgm_iter1_upper(a1) + 1e-2];
        let grid_min = |p: &[f64]| {
            let mut m = f64::INFINITY;
            for i in 0..=400 {
                for j in 0..=400 {
                    m = m.min(fgm_density(p, i as f64 / 400.0, j as f64 / 400.0));
                }
            }
            m
        };
        assert!(grid_min(&inside) > -1e-4);
        assert!(grid_min(&outside) < 0.0);
    }

    #[test]
    fn retract_lands_inside() {
        let cases: &[(Family, &[f64])] = &[
            (Family::Fgm, &[3.0]),
            (Family::FgmIter1, &[1.5, -4.0]),
            (Family::FgmIter1, &[-2.0, 9.0]),
            (Family::FgmIter2, &[1.0, 2.0, 4.0]),
            (Family::Gumbel2, &[0.2, -1.0]),
            (Family::Clayton, &[-1.0]),
            (Family::Frank, &[0.0]),
        ];
        for (family, p) in cases {
            let r = ParameterRegion::new(*family);
            let q = r.retract(p);
            assert!(r.contains(&q), "{family:?} {p:?} -> {q:?}");
            assert_eq!(r.penalty(&q), 0.0, "{family:?}");
            assert!(r.penalty(p) > 0.0);
        }
        let r = ParameterRegion::new(Family::FgmIter1);
        assert_eq!(r.retract(&[0.4, 0.9]), vec![0.4, 0.9]);
    }

    #[test]
    fn strict_constraints() {
        let r = ParameterRegion::new(Family::Gumbel2);
        assert_eq!(r.violations(&[1.0, 0.0]), vec![Constraint::Gumbel2Beta2]);
        assert!(r.contains(&[1.0, 1e-9]));
        let r = ParameterRegion::new(Family::Frank);
        assert_eq!(r.violations(&[0.0]), vec![Constraint::FrankTheta]);
        assert!(r.contains(&[-2.0]));
        let r = ParameterRegion::new(Family::Gumbel);
        assert_eq!(r.violations(&[f64::NAN]), vec![Constraint::Finite]);
    }
}
