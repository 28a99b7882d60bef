//! End-to-end behaviour of the adaptive loop.

use pof_gp::adaptive::{
    estimation_nodes, refresh_estimates, run, run_problem, AdaptiveConfig, StopReason,
};
use pof_gp::estimators::vertical_p;
use pof_gp::gp::{HyperoptPolicy, PredictionCache, Smoothness};
use pof_gp::problems::{multimodal_problem, sine_problem, ProblemSpec};
use pof_gp::qmc::SampleMatrix;

fn config(seed: u64, nodes: usize, budget: usize) -> AdaptiveConfig {
    AdaptiveConfig {
        nodes,
        budget,
        seed,
        ..AdaptiveConfig::default()
    }
}

#[test]
fn incremental_updates_match_full_refits() {
    let problem = multimodal_problem();
    let base = config(5, 1 << 12, 34);
    let fast = run_problem(&problem, &base).unwrap();
    let slow = run_problem(
        &problem,
        &AdaptiveConfig {
            incremental: false,
            ..base
        },
    )
    .unwrap();
    assert_eq!(fast.history.len(), slow.history.len());
    for (a, b) in fast.history.iter().zip(&slow.history) {
        assert_eq!(a.n, b.n);
        assert!(
            (a.p_hat - b.p_hat).abs() <= 1e-8,
            "{} vs {}",
            a.p_hat,
            b.p_hat
        );
        assert!((a.gamma_hat - b.gamma_hat).abs() <= 1e-8 * b.gamma_hat.max(1.0));
        assert!((a.p_check - b.p_check).abs() <= 1e-8);
    }
}

#[test]
fn every_evaluation_enters_the_surrogate_once() {
    let problem = multimodal_problem();
    let mut seen: Vec<Vec<f64>> = Vec::new();
    let mut evaluator = |x: &SampleMatrix| -> pof_gp::Result<Vec<f64>> {
        seen.extend(x.rows().map(|r| r.to_vec()));
        Ok(x.rows().map(|r| problem.evaluate(r)).collect())
    };
    let r = run(2, &config(8, 1 << 12, 31), &mut evaluator).unwrap();
    assert_eq!(r.stop_reason, StopReason::BudgetExhausted);
    assert_eq!(seen.len(), 31);
    assert_eq!(r.model.n(), 31);
    let stored: Vec<Vec<f64>> = r.model.x().rows().map(|r| r.to_vec()).collect();
    assert_eq!(stored, seen);
    for (x, y) in stored.iter().zip(r.model.y()) {
        assert_eq!(*y, problem.evaluate(x));
    }
}

#[test]
fn refreshed_estimates_match_composition() {
    let cfg = config(2, 1 << 12, 20);
    let r = run_problem(&multimodal_problem(), &cfg).unwrap();
    let cache = PredictionCache::predict(&r.model, &estimation_nodes(&cfg, 2).unwrap()).unwrap();
    let (est, check) = refresh_estimates(&cache, cfg.alpha).unwrap();

    let n = cache.len() as f64;
    let p: Vec<f64> = cache
        .mean()
        .iter()
        .zip(cache.sd())
        .map(|(m, s)| vertical_p(*m, *s))
        .collect();
    let p_hat = cache.mean().iter().filter(|&&m| m >= 0.0).count() as f64 / n;
    let err = p.iter().map(|q| q.min(1.0 - q)).sum::<f64>() / n;
    let p_check = p.iter().sum::<f64>() / n;
    let gamma_check = 2.0 * p.iter().map(|q| q * (1.0 - q)).sum::<f64>() / n / cfg.alpha;
    assert_eq!(est.p_hat, p_hat);
    assert!((est.gamma_hat - err / cfg.alpha).abs() < 1e-12);
    assert!((check.p_check - p_check).abs() < 1e-12);
    assert!((check.gamma_check - gamma_check).abs() < 1e-12);
    assert_eq!(est.lower, (p_hat - est.gamma_hat).max(0.0));
    assert_eq!(est.upper, (p_hat + est.gamma_hat).min(1.0));
    let last = r.history.last().unwrap();
    assert_eq!((last.p_hat, last.gamma_hat), (est.p_hat, est.gamma_hat));
}

#[test]
fn sine_interval_covers_the_truth() {
    let cfg = AdaptiveConfig {
        n0: Some(8),
        ..config(1, 1 << 14, 64)
    };
    let r = run_problem(&sine_problem(), &cfg).unwrap();
    assert!(r.estimate.contains(0.5), "{:?}", r.estimate);
    assert!(r.estimate.gamma_hat < r.history[0].gamma_hat);
    assert_eq!(r.model.n(), 64);
}

#[test]
fn re_optimizing_every_iteration_runs() {
    let cfg = AdaptiveConfig {
        hyperopt: HyperoptPolicy::EveryIteration,
        ..config(3, 1 << 12, 22)
    };
    let r = run_problem(&multimodal_problem(), &cfg).unwrap();
    assert_eq!(r.model.n(), 22);
    assert_eq!(
        r.history.iter().map(|h| h.n).collect::<Vec<_>>(),
        [10, 14, 18, 22]
    );
    let never = AdaptiveConfig {
        hyperopt: HyperoptPolicy::Never,
        ..cfg
    };
    let r = run_problem(&multimodal_problem(), &never).unwrap();
    assert_eq!(r.model.prior().kernel.lengthscale, never.lengthscale);
}

#[test]
fn singular_kernel_escalates_jitter_once() {
    let problem = ProblemSpec::new(
        "slope",
        1,
        std::sync::Arc::new(|u: &[f64]| u[0] - 0.4),
        None,
    )
    .unwrap();
    let cfg = AdaptiveConfig {
        hyperopt: HyperoptPolicy::Never,
        smoothness: Smoothness::FiveHalves,
        lengthscale: 1e3,
        jitter: 0.0,
        n0: Some(24),
        ..config(4, 1 << 10, 28)
    };
    let r = run_problem(&problem, &cfg).unwrap();
    assert!(r.jitter_escalated);
    assert!(r.model.prior().jitter > 0.0);
    assert!((r.estimate.p_hat - 0.6).abs() < 0.05, "{:?}", r.estimate);
}

#[test]
fn reruns_are_reproducible() {
    let cfg = config(9, 1 << 12, 26);
    let a = run_problem(&multimodal_problem(), &cfg).unwrap();
    let b = run_problem(&multimodal_problem(), &cfg).unwrap();
    let strip = |h: &[pof_gp::adaptive::IterationRecord]| {
        h.iter()
            .map(|r| (r.n, r.p_hat, r.gamma_hat, r.p_check, r.tries))
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&a.history), strip(&b.history));
}
