//! Cross-checks against exact values and distribution-free bounds.

use approx::assert_relative_eq;
use proptest::prelude::*;

use copula_blm::asymptotics::{compare_sigma0_with_oracle, influence_cov_numeric};
use copula_blm::copula::sample;
use copula_blm::dependence::{pseudo_observations, theoretical_deltas, Direction};
use copula_blm::harness::bias_rmse;
use copula_blm::legendre::eval_p;
use copula_blm::{CopulaModel, Family};

#[test]
fn influence_covariance_at_moderate_dependence() {
    // exact values by symbolic integration
    let model = CopulaModel::new(Family::FgmIter1, &[0.4, 0.9]).unwrap();
    let s = influence_cov_numeric(&model, 2, 1_000_000, 3).unwrap();
    assert_relative_eq!(s[(0, 0)], 0.0262464, max_relative = 0.02);
    assert_relative_eq!(s[(1, 1)], 0.01602125, max_relative = 0.02);
    assert!(s[(0, 1)].abs() < 5e-4, "{s}");
    assert_eq!(s[(0, 1)], s[(1, 0)]);
}

#[test]
fn printed_influence_covariance_is_far_from_oracle() {
    let cmp = compare_sigma0_with_oracle(0.0, 0.0, 200_000, 4).unwrap();
    assert_relative_eq!(cmp.oracle[(0, 0)], 1.0 / 36.0, max_relative = 0.02);
    assert_relative_eq!(cmp.oracle[(1, 1)], 1.0 / 60.0, max_relative = 0.02);
    assert!(!cmp.within(0.5));
}

/// Kolmogorov distance of a sample from the uniform distribution.
fn ks_uniform(mut x: Vec<f64>) -> f64 {
    x.sort_by(f64::total_cmp);
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| (v - i as f64 / n).abs().max(((i + 1) as f64 / n - v).abs()))
        .fold(0.0, f64::max)
}

#[test]
fn sampler_margins_pass_dkw_bound() {
    let n = 20_000;
    // P(sup |F_n − F| > ε) ≤ 2 exp(−2nε²) = 1e-6
    let eps = ((2.0f64 / 1e-6).ln() / (2.0 * n as f64)).sqrt();
    for (family, params) in [
        (Family::Product, vec![]),
        (Family::Fgm, vec![-0.7]),
        (Family::FgmIter1, vec![0.941, 1.445]),
        (Family::FgmIter2, vec![0.2, 0.3, -0.2]),
        (Family::Gumbel, vec![3.0]),
        (Family::Gumbel2, vec![2.5, 1.0]),
        (Family::Clayton, vec![4.0]),
        (Family::Frank, vec![-6.0]),
    ] {
        let m = CopulaModel::new(family, &params).unwrap();
        let data = sample(&m, n, 77).unwrap();
        let du = ks_uniform(data.iter().map(|p| p.0).collect());
        let dv = ks_uniform(data.iter().map(|p| p.1).collect());
        assert!(du < eps && dv < eps, "{family}: {du} {dv} (bound {eps})");
    }
}

#[test]
fn empirical_deltas_converge_for_archimedean() {
    let m = CopulaModel::new(Family::Clayton, &[2.0]).unwrap();
    let ps = pseudo_observations(&sample(&m, 50_000, 5).unwrap()).unwrap();
    let theory = theoretical_deltas(&m, 3, Direction::D12).unwrap();
    for k in 1..=3 {
        let emp = ps
            .pairs()
            .iter()
            .map(|&(u, v)| u * eval_p(k, v).unwrap())
            .sum::<f64>()
            / ps.n() as f64;
        assert!(
            (emp - theory.values[k - 1]).abs() < 0.005,
            "k={k}: {emp} vs {}",
            theory.values[k - 1]
        );
    }
}

proptest! {
    #[test]
    fn cdf_within_frechet_bounds(u in 0.0f64..=1.0, v in 0.0f64..=1.0, b1 in 1.0f64..6.0, b2 in 0.01f64..5.0) {
        let m = CopulaModel::new(Family::Gumbel2, &[b1, b2]).unwrap();
        let c = m.cdf(u, v).unwrap();
        prop_assert!(c >= (u + v - 1.0).max(0.0) - 1e-12);
        prop_assert!(c <= u.min(v) + 1e-12);
    }

    #[test]
    fn rmse_dominates_bias(xs in prop::collection::vec(-10.0f64..10.0, 1..50), t in -5.0f64..5.0) {
        let (b, r) = bias_rmse(xs.into_iter(), t);
        prop_assert!(r >= b.abs());
    }
}
