//! Gauss–Legendre rules mapped to `[0, 1]` and tensor-product integration on
//! the unit square.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Base order for 2D integrals; the check order is twice that.
pub const BASE_ORDER: usize = 64;
/// Largest order tried during escalation.
pub const MAX_ORDER: usize = 512;
/// Accepted discrepancy between successive orders.
pub const REFINEMENT_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `order`-point rule on `[0, 1]` by Newton iteration on the
    /// Legendre three-term recurrence.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput(
                "quadrature order must be positive".into(),
            ));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // map [-1, 1] -> [0, 1]
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        Ok(Self { nodes, weights })
    }

    /// Cached rule of the given order.
    pub fn cached(order: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussLegendre>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("quadrature cache poisoned");
        if let Some(rule) = guard.get(&order) {
            return Ok(Arc::clone(rule));
        }
        let rule = Arc::new(Self::new(order)?);
        guard.insert(order, Arc::clone(&rule));
        Ok(rule)
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// `∫_a^b f` with the rule mapped onto `[a, b]`.
    pub fn integrate_on<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let len = b - a;
        len * self.integrate(|t| f(a + len * t))
    }

    /// Tensor-product integral over `[0, 1]²`.
    pub fn integrate_2d<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> f64 {
        let mut total = 0.0;
        for (&x, &wx) in self.nodes.iter().zip(&self.weights) {
            let mut row = 0.0;
            for (&y, &wy) in self.nodes.iter().zip(&self.weights) {
                row += wy * f(x, y);
            }
            total += wx * row;
        }
        total
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Integrates with successive orders `BASE_ORDER, 2·BASE_ORDER, …` until two
/// consecutive results agree within [`REFINEMENT_TOL`]; returns the higher-order value.
pub fn escalating<F>(mut integrate_at: F) -> Result<f64>
where
    F: FnMut(&GaussLegendre) -> f64,
{
    let mut order = BASE_ORDER;
    let mut previous = integrate_at(&*GaussLegendre::cached(order)?);
    while order < MAX_ORDER {
        order *= 2;
        let current = integrate_at(&*GaussLegendre::cached(order)?);
        if !current.is_finite() {
            return Err(Error::Quadrature(format!(
                "non-finite value at order {order}"
            )));
        }
        if (current - previous).abs() <= REFINEMENT_TOL {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::Quadrature(format!(
        "orders {} and {MAX_ORDER} still disagree by more than {REFINEMENT_TOL}",
        MAX_ORDER / 2
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        for n in [1, 2, 5, 16, 64, 128, 257] {
            let rule = GaussLegendre::new(n).unwrap();
            let s: f64 = rule.weights().iter().sum();
            assert!((s - 1.0).abs() < 1e-13, "order {n}: {s}");
            assert!(rule.nodes().iter().all(|&x| x > 0.0 && x < 1.0));
        }
    }

    #[test]
    fn exact_for_polynomials() {
        let rule = GaussLegendre::new(8).unwrap();
        for p in 0..16 {
            let got = rule.integrate(|x| x.powi(p));
            assert!((got - 1.0 / (p + 1) as f64).abs() < 1e-14, "x^{p}");
        }
    }

    #[test]
    fn two_dimensional_and_interval() {
        let rule = GaussLegendre::new(20).unwrap();
        let got = rule.integrate_2d(|x, y| x * y * y);
        assert!((got - 1.0 / 6.0).abs() < 1e-14);
        let got = rule.integrate_on(1.0, 3.0, |x| x * x);
        assert!((got - 26.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn escalation_accepts_smooth_and_rejects_wild() {
        let v = escalating(|r| r.integrate(|x| x.exp())).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-13);
        assert!(escalating(|r| r.integrate(|x| (1.0 / (x - 0.3)).sin())).is_err());
    }
}
