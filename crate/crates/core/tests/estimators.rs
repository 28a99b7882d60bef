//! Estimator oracles: normal CDF, analytic measures, path sampling and
//! replication experiments.

mod common;

use pof_gp::estimators::{
    cmc_estimate, credible_interval, estimate_gamma_check, estimate_gamma_hat, estimate_p_check,
    ismc_estimate, p_hat_from_means, vertical_p, VerticalField,
};
use pof_gp::gp::{GpModel, KernelSpec, PredictionCache, PriorSpec, Smoothness};
use pof_gp::qmc::{generate_nodes, SequenceConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

// Reference values from a 30-digit evaluation of the normal CDF.
const VERTICAL_TABLE: [(f64, f64, f64); 5] = [
    (1.0, 1.0, 0.841344746068542948585),
    (0.3, 2.0, 0.559617692370242515772),
    (-1.7, 0.5, 0.000336929265676881048853),
    (4.0, 3.0, 0.908788780274132130166),
    (-0.01, 0.02, 0.308537538725986896362),
];

#[test]
fn vertical_p_matches_normal_cdf_oracle() {
    let n = Normal::new(0.0, 1.0).unwrap();
    for (m, s, want) in VERTICAL_TABLE {
        let got = vertical_p(m, s);
        assert!((got - want).abs() < 1e-12, "({m}, {s}): {got} vs {want}");
        assert!((got - n.cdf(m / s)).abs() < 1e-9);
    }
    assert_eq!(vertical_p(0.0, 1.0), 0.5);
    assert_eq!(vertical_p(3.0, 0.0), 1.0);
    assert_eq!(vertical_p(0.0, 0.0), 1.0);
    assert_eq!(vertical_p(-1e-300, 0.0), 0.0);
}

#[test]
fn p_hat_of_linear_mean_is_half() {
    let nodes = generate_nodes(&SequenceConfig::low_discrepancy(2, 1), 1 << 14).unwrap();
    let means: Vec<f64> = nodes.rows().map(|u| u[0] - 0.5).collect();
    assert!((p_hat_from_means(&means) - 0.5).abs() < 1e-3);
}

#[test]
fn gamma_arithmetic_examples() {
    let field = VerticalField::from_probabilities(vec![0.01; 50]);
    assert!((estimate_gamma_hat(&field, 0.05).unwrap() - 0.2).abs() < 1e-12);
    let half = VerticalField::from_probabilities(vec![0.5; 7]);
    assert_eq!(estimate_gamma_hat(&half, 0.5).unwrap(), 1.0);
    assert_eq!(estimate_gamma_check(&half, 0.5).unwrap(), 1.0);
    assert!(estimate_gamma_hat(&half, 0.0).is_err());
    assert!(estimate_gamma_check(&half, 1.0).is_err());
}

// The posterior mean of P(g) equals mean(p): average the failure fraction
// of posterior sample paths on a grid and compare.
#[test]
fn p_check_matches_path_sampling() {
    let prior = PriorSpec::new(KernelSpec::new(Smoothness::FiveHalves, 0.15, 1.0).unwrap())
        .with_jitter(1e-10);
    let x = [0.1, 0.3, 0.45, 0.7, 0.9];
    let y = [-0.4, 0.8, 0.1, -1.2, 0.5];
    let grid = common::grid(400);
    let (mean, cov) = common::posterior_on_grid(&prior, &x, &y, &grid);
    let sd: Vec<f64> = cov.diagonal().iter().map(|v| v.max(0.0).sqrt()).collect();

    let model = GpModel::fit(prior, common::column(&x), y.to_vec()).unwrap();
    let cache = PredictionCache::predict(&model, &common::column(&grid)).unwrap();
    for i in 0..grid.len() {
        assert!((cache.mean()[i] - mean[i]).abs() < 1e-8);
        assert!((cache.sd()[i] - sd[i]).abs() < 1e-6);
    }
    let field = VerticalField::from_moments(cache.mean(), cache.sd()).unwrap();
    let p_check = estimate_p_check(&field);

    let factor = common::sampling_factor(&cov);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let draws: Vec<f64> = (0..1000)
        .map(|_| {
            let path = common::draw_path(&mut rng, &mean, &factor);
            path.iter().filter(|&&v| v >= 0.0).count() as f64 / grid.len() as f64
        })
        .collect();
    let (avg, var) = cmc_estimate(&draws).unwrap();
    let se = var.sqrt();
    assert!(
        (avg - p_check).abs() < 3.0 * se,
        "paths {avg} +- {se}, p_check {p_check}"
    );
}

#[test]
fn cmc_variance_law() {
    let (mu, n, reps) = (0.3, 1000, 1000);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let estimates: Vec<f64> = (0..reps)
        .map(|_| {
            let v: Vec<f64> = (0..n)
                .map(|_| if rng.gen::<f64>() < mu { 1.0 } else { 0.0 })
                .collect();
            cmc_estimate(&v).unwrap().0
        })
        .collect();
    let m = estimates.iter().sum::<f64>() / reps as f64;
    let var = estimates.iter().map(|e| (e - m) * (e - m)).sum::<f64>() / (reps - 1) as f64;
    let law = mu * (1.0 - mu) / n as f64;
    assert!((var / law - 1.0).abs() < 0.2, "empirical {var}, law {law}");
}

#[test]
fn cmc_reported_variance_tracks_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let v: Vec<f64> = (0..100_000)
        .map(|_| if rng.gen::<f64>() < 0.3 { 1.0 } else { 0.0 })
        .collect();
    let (m, var) = cmc_estimate(&v).unwrap();
    assert!((var - m * (1.0 - m) / 1e5).abs() < 1e-15);
    assert_eq!(cmc_estimate(&[2.5; 10]).unwrap(), (2.5, 0.0));
    assert!(cmc_estimate(&[1.0]).is_err());
}

#[test]
fn ismc_quarter_interval() {
    let n = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u: Vec<f64> = (0..n).map(|_| 0.5 * rng.gen::<f64>()).collect();
    let f: Vec<f64> = u
        .iter()
        .map(|&x| if x <= 0.25 { 1.0 } else { 0.0 })
        .collect();
    let q = vec![2.0; n];
    let est = ismc_estimate(&f, &q).unwrap();
    let ratios: Vec<f64> = f.iter().zip(&q).map(|(a, b)| a / b).collect();
    let se = cmc_estimate(&ratios).unwrap().1.sqrt();
    assert!((est - 0.25).abs() < 3.0 * se, "{est} +- {se}");
}

fn probability() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.0), Just(0.5), Just(1.0), 0.0f64..=1.0]
}

proptest! {
    #[test]
    fn gamma_hat_never_exceeds_gamma_check(p in prop::collection::vec(probability(), 1..200), alpha in 0.001f64..0.999) {
        let field = VerticalField::from_probabilities(p);
        prop_assert!(estimate_gamma_hat(&field, alpha).unwrap() <= estimate_gamma_check(&field, alpha).unwrap());
    }

    #[test]
    fn intervals_stay_in_unit_range(point in 0.0f64..=1.0, gamma in 0.0f64..10.0) {
        let (lo, hi) = credible_interval(point, gamma);
        prop_assert!(0.0 <= lo && lo <= point && point <= hi && hi <= 1.0);
        prop_assert_eq!(lo, (point - gamma).max(0.0));
        prop_assert_eq!(hi, (point + gamma).min(1.0));
    }

    #[test]
    fn certain_fields_agree(means in prop::collection::vec(-5.0f64..5.0, 1..100)) {
        let sd = vec![0.0; means.len()];
        let field = VerticalField::from_moments(&means, &sd).unwrap();
        prop_assert_eq!(p_hat_from_means(&means), estimate_p_check(&field));
        prop_assert_eq!(estimate_gamma_hat(&field, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn err_is_bounded_by_half(m in -10.0f64..10.0, s in 0.0f64..10.0) {
        let p = vertical_p(m, s);
        let field = VerticalField::from_probabilities(vec![p]);
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!(field.err[0] <= 0.5 && field.err[0] >= 0.0);
    }
}
