//! Exact samplers: conditional inversion for the FGM variants and the
//! Kendall-function algorithm for Archimedean families.

use rand::distributions::Open01;
use rand::Rng;

use super::{ArchimedeanGenerator, CopulaModel, Family};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Absolute tolerance of the inner bisections.
pub const BISECTION_TOL: f64 = 1e-12;
pub const BISECTION_MAX_ITER: usize = 200;

/// `n` i.i.d. pairs from `model`, a pure function of `(model, n, seed)`.
pub fn sample(model: &CopulaModel, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| model.draw(&mut rng)).collect()
}

impl CopulaModel {
    /// One pair drawn with the supplied generator.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, f64)> {
        let a: f64 = rng.sample(Open01);
        let b: f64 = rng.sample(Open01);
        match self.family() {
            Family::Product => Ok((a, b)),
            Family::Fgm | Family::FgmIter1 | Family::FgmIter2 => {
                let v = bisect_unit(|v| self.conditional_cdf_unchecked(a, v), b)?;
                Ok((a, v))
            }
            _ => {
                let g = self
                    .generator()
                    .expect("archimedean family has a generator");
                kendall_draw(&g, a, b)
            }
        }
    }
}

/// Given `s, t ∈ (0,1)`: `w = K⁻¹(t)`, `u = φ⁻¹(sφ(w))`, `v = φ⁻¹((1−s)φ(w))`.
fn kendall_draw(g: &ArchimedeanGenerator, s: f64, t: f64) -> Result<(f64, f64)> {
    let w = bisect_unit(|x| g.kendall_function(x), t)?;
    if w <= 0.0 {
        // Underflow of the level set; both coordinates are then ~0.
        return Ok((f64::MIN_POSITIVE, f64::MIN_POSITIVE));
    }
    let pw = g.phi(w);
    let u = g.phi_inverse(s * pw);
    let v = g.phi_inverse((1.0 - s) * pw);
    Ok((interior(u), interior(v)))
}

fn interior(x: f64) -> f64 {
    x.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Solves `f(x) = target` on `[0, 1]` for a nondecreasing `f` with
/// `f(0) ≤ target ≤ f(1)`.
fn bisect_unit<F: Fn(f64) -> f64>(f: F, target: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    if f(lo) > target || f(hi) < target {
        return Err(Error::Bracketing(format!(
            "target {target} not bracketed by [{}, {}]",
            f(lo),
            f(hi)
        )));
    }
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranks(x: impl Iterator<Item = f64>) -> Vec<f64> {
        let x: Vec<f64> = x.collect();
        let mut idx: Vec<usize> = (0..x.len()).collect();
        idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
        let mut r = vec![0.0; x.len()];
        for (rank, i) in idx.into_iter().enumerate() {
            r[i] = rank as f64;
        }
        r
    }

    /// Pearson correlation of the ranks.
    fn spearman(pairs: &[(f64, f64)]) -> f64 {
        let a = ranks(pairs.iter().map(|p| p.0));
        let b = ranks(pairs.iter().map(|p| p.1));
        let n = a.len() as f64;
        let mean = (n - 1.0) / 2.0;
        let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - mean) * (y - mean)).sum();
        let var: f64 = a.iter().map(|x| (x - mean).powi(2)).sum();
        cov / var
    }

    #[test]
    fn deterministic_given_seed() {
        let m = CopulaModel::new(Family::Gumbel2, &[1.4, 0.2]).unwrap();
        assert_eq!(sample(&m, 50, 3).unwrap(), sample(&m, 50, 3).unwrap());
        assert_ne!(sample(&m, 50, 3).unwrap(), sample(&m, 50, 4).unwrap());
        assert!(sample(&m, 0, 3).is_err());
    }

    #[test]
    fn product_moment() {
        let s = sample(&CopulaModel::product(), 10_000, 11).unwrap();
        let m = s.iter().map(|(u, v)| u * v).sum::<f64>() / s.len() as f64;
        assert!((m - 0.25).abs() < 0.01, "{m}");
    }

    #[test]
    fn fgm_iter1_spearman() {
        let m = CopulaModel::new(Family::FgmIter1, &[0.4, 0.9]).unwrap();
        let rho = spearman(&sample(&m, 10_000, 12).unwrap());
        assert!((rho - 0.208).abs() < 0.03, "{rho}");
    }

    #[test]
    fn gumbel2_spearman() {
        let m = CopulaModel::new(Family::Gumbel2, &[2.5, 1.0]).unwrap();
        let rho = spearman(&sample(&m, 10_000, 13).unwrap());
        assert!((rho - 0.9).abs() < 0.02, "{rho}");
    }

    #[test]
    fn samples_are_interior() {
        for (family, p) in [
            (Family::Gumbel, vec![6.0]),
            (Family::Clayton, vec![8.0]),
            (Family::Frank, vec![-20.0]),
        ] {
            let m = CopulaModel::new(family, &p).unwrap();
            for (u, v) in sample(&m, 2000, 5).unwrap() {
                assert!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0);
            }
        }
    }
}
