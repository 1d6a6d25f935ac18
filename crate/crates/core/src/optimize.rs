//! Small solvers used by the estimators: bisection, box-constrained damped
//! Newton for square systems, and Nelder–Mead.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Root of a monotone `f` on `[lo, hi]`, assuming `f(lo)` and `f(hi)` have
/// opposite signs (or one is zero).
pub fn bisect<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() || flo.is_nan() || fhi.is_nan() {
        return Err(Error::Bracketing(format!(
            "f({lo}) = {flo} and f({hi}) = {fhi} do not bracket a root"
        )));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    /// Euclidean norm of the residual at `x`.
    pub residual: f64,
    pub iterations: usize,
}

/// Box `[lower_i, upper_i]` used to confine Newton iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn clamp(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&lo, &hi))| v.clamp(lo, hi))
            .collect()
    }

    /// Whether `x` touches a face of the box (relative slack `1e-9`).
    pub fn on_boundary(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .any(|(&v, (&lo, &hi))| {
                let slack = 1e-9 * (1.0 + v.abs());
                v - lo <= slack || hi - v <= slack
            })
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Central-difference Jacobian, one-sided at the faces of the box.
fn fd_jacobian<F>(f: &mut F, x: &[f64], fx: &[f64], bounds: &Bounds) -> DMatrix<f64>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let m = fx.len();
    let r = x.len();
    let mut jac = DMatrix::zeros(m, r);
    for j in 0..r {
        let h = 1e-6 * (1.0 + x[j].abs());
        let (mut lo, mut hi) = (x.to_vec(), x.to_vec());
        hi[j] = (x[j] + h).min(bounds.upper[j]);
        lo[j] = (x[j] - h).max(bounds.lower[j]);
        let (f_hi, f_lo) = match (hi[j] > x[j], lo[j] < x[j]) {
            (true, true) => (f(&hi), f(&lo)),
            (true, false) => (f(&hi), fx.to_vec()),
            (false, true) => (fx.to_vec(), f(&lo)),
            (false, false) => continue,
        };
        let span = hi[j] - lo[j];
        for i in 0..m {
            jac[(i, j)] = (f_hi[i] - f_lo[i]) / span;
        }
    }
    jac
}

/// Damped Newton iteration for `F(x) = 0` inside `bounds`.
///
/// Each step solves `J Δ = −F` (least squares fallback when `J` is singular),
/// projects onto the box and halves the step until `‖F‖` decreases. Runs to
/// full precision; the caller judges the final residual.
pub fn damped_newton<F>(mut f: F, x0: &[f64], bounds: &Bounds, max_iter: usize) -> NewtonOutcome
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    let mut x = bounds.clamp(x0);
    let mut fx = f(&x);
    let mut res = norm(&fx);
    let mut iterations = 0;
    while iterations < max_iter && res > 0.0 && res.is_finite() {
        iterations += 1;
        let jac = fd_jacobian(&mut f, &x, &fx, bounds);
        let rhs = -DVector::from_column_slice(&fx);
        let step = match jac.clone().lu().solve(&rhs) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => match jac.clone().svd(true, true).solve(&rhs, 1e-14) {
                Ok(s) => s,
                Err(_) => break,
            },
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = x
                .iter()
                .zip(step.iter())
                .map(|(a, d)| a + lambda * d)
                .collect();
            let trial = bounds.clamp(&trial);
            let ft = f(&trial);
            let rt = norm(&ft);
            if rt.is_finite() && rt < res {
                let moved = trial
                    .iter()
                    .zip(&x)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                x = trial;
                fx = ft;
                res = rt;
                accepted = true;
                if moved <= 1e-15 * (1.0 + norm(&x)) {
                    accepted = false;
                }
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    NewtonOutcome {
        x,
        residual: res,
        iterations,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOptions {
    pub max_iter: usize,
    /// Stop when the spread of function values across the simplex falls below this.
    pub f_tol: f64,
    /// ... and the simplex diameter falls below this.
    pub x_tol: f64,
    /// Initial edge length relative to `max(1, |x₀ᵢ|)`.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            f_tol: 1e-12,
            x_tol: 1e-8,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimizes `f` with the standard Nelder–Mead simplex method
/// (reflection 1, expansion 2, contraction ½, shrink ½).
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> NelderMeadOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    let eval = |f: &mut F, x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if dim == 0 {
        let value = eval(&mut f, x0);
        return NelderMeadOutcome {
            x: vec![],
            value,
            iterations: 0,
            converged: true,
        };
    }
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..dim {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step * x0[i].abs().max(1.0);
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| eval(&mut f, p)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = (values[dim] - values[0]).abs();
        let diameter = simplex[1..]
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= opts.f_tol * (1.0 + values[0].abs()) && diameter <= opts.x_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|p| p[j]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let xr = along(-1.0);
        let fr = eval(&mut f, &xr);
        if fr < values[0] {
            let xe = along(-2.0);
            let fe = eval(&mut f, &xe);
            if fe < fr {
                simplex[dim] = xe;
                values[dim] = fe;
            } else {
                simplex[dim] = xr;
                values[dim] = fr;
            }
            continue;
        }
        if fr < values[dim - 1] {
            simplex[dim] = xr;
            values[dim] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[dim] {
            let xc = along(-0.5);
            let fc = eval(&mut f, &xc);
            (xc, fc)
        } else {
            let xc = along(0.5);
            let fc = eval(&mut f, &xc);
            (xc, fc)
        };
        if fc < values[dim].min(fr) {
            simplex[dim] = xc;
            values[dim] = fc;
            continue;
        }
        // shrink towards the best vertex
        for i in 1..=dim {
            let p: Vec<f64> = simplex[i]
                .iter()
                .zip(&simplex[0])
                .map(|(a, b)| b + 0.5 * (a - b))
                .collect();
            values[i] = eval(&mut f, &p);
            simplex[i] = p;
        }
    }
    let best = (0..=dim)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .expect("simplex is nonempty");
    NelderMeadOutcome {
        x: simplex[best].clone(),
        value: values[best],
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 100).is_err());
        assert_eq!(bisect(|x| x, 0.0, 1.0, 1e-12, 100).unwrap(), 0.0);
    }

    #[test]
    fn newton_solves_nonlinear_system() {
        // x² + y² = 4, x·y = 1
        let bounds = Bounds {
            lower: vec![0.0, 0.0],
            upper: vec![5.0, 5.0],
        };
        let out = damped_newton(
            |p| vec![p[0] * p[0] + p[1] * p[1] - 4.0, p[0] * p[1] - 1.0],
            &[2.0, 0.3],
            &bounds,
            100,
        );
        assert!(out.residual < 1e-12, "{out:?}");
        let (x, y) = (out.x[0], out.x[1]);
        assert!((x * y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn newton_stops_on_boundary_when_root_is_outside() {
        let bounds = Bounds {
            lower: vec![1.0],
            upper: vec![3.0],
        };
        let out = damped_newton(|p| vec![p[0] - 0.5], &[2.0], &bounds, 100);
        assert_eq!(out.x, vec![1.0]);
        assert!((out.residual - 0.5).abs() < 1e-15);
        assert!(bounds.on_boundary(&out.x));
    }

    #[test]
    fn nelder_mead_rosenbrock() {
        let rosen = |p: &[f64]| (1.0 - p[0]).powi(2) + 100.0 * (p[1] - p[0] * p[0]).powi(2);
        let out = nelder_mead(rosen, &[-1.2, 1.0], &NelderMeadOptions::default());
        assert!(out.converged);
        assert!(
            (out.x[0] - 1.0).abs() < 1e-5 && (out.x[1] - 1.0).abs() < 1e-5,
            "{out:?}"
        );
    }

    #[test]
    fn nelder_mead_one_dimensional_and_cap() {
        let out = nelder_mead(
            |p| (p[0] - 3.0).powi(2),
            &[0.0],
            &NelderMeadOptions::default(),
        );
        assert!((out.x[0] - 3.0).abs() < 1e-7);
        let opts = NelderMeadOptions {
            max_iter: 3,
            ..Default::default()
        };
        let out = nelder_mead(|p| (p[0] - 3.0).powi(2), &[0.0], &opts);
        assert!(!out.converged);
        assert_eq!(out.iterations, 3);
    }
}
