//! Bundled problem catalogue: closed forms, determinism, calibrated truths.

use std::f64::consts::PI;
use std::sync::Arc;

use pof_gp::problems::functions::{ishigami, ishigami_raw};
use pof_gp::problems::{
    all_problems, brute_force_pof, by_name, calibrate_threshold, form_by_name, manifest,
    sine_problem, ProblemSpec,
};
use pof_gp::qmc::{generate_nodes, SequenceConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn ishigami_change_of_variables() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let u: Vec<f64> = (0..3).map(|_| rng.gen::<f64>()).collect();
        let x: Vec<f64> = u.iter().map(|v| 2.0 * PI * v - PI).collect();
        let direct = x[0].sin() + 7.0 * x[1].sin().powi(2) + 0.1 * x[2].powi(4) * x[0].sin();
        assert!((ishigami(&u) - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        assert_eq!(ishigami(&u), ishigami_raw(&x));
    }
}

#[test]
fn responses_are_deterministic_and_finite() {
    for p in all_problems() {
        let nodes =
            generate_nodes(&SequenceConfig::low_discrepancy(9, p.dimension), 100_000).unwrap();
        for u in nodes.rows() {
            let g = p.evaluate(u);
            assert!(g.is_finite(), "{} at {u:?}", p.name);
            assert_eq!(g.to_bits(), p.evaluate(u).to_bits());
        }
    }
}

#[test]
fn calibrated_truths_are_reproduced() {
    for p in all_problems() {
        let truth = p.true_p.unwrap();
        let (est, se) = brute_force_pof(&p, 1 << 20, 77).unwrap();
        assert!(
            (est - truth).abs() <= 3.0 * se.max(1e-6),
            "{}: {est} +- {se} vs {truth}",
            p.name
        );
    }
}

#[test]
fn sine_brute_force_is_half() {
    let (est, _) = brute_force_pof(&sine_problem(), 1 << 20, 1).unwrap();
    assert!((est - 0.5).abs() < 0.002);
}

#[test]
fn calibration_is_stable_across_seeds() {
    for entry in manifest()
        .problems
        .iter()
        .filter(|e| e.calibration == "calibrated")
    {
        let (dim, raw) = form_by_name(&entry.form).unwrap();
        let target = entry.true_p.unwrap();
        let xis: Vec<f64> = (0..4)
            .map(|s| calibrate_threshold(raw, dim, target, 1 << 16, 500 + s).unwrap())
            .collect();
        // Thresholds move by much less than the response spread.
        let spread = xis.iter().cloned().fold(f64::MIN, f64::max)
            - xis.iter().cloned().fold(f64::MAX, f64::min);
        assert!(
            spread < 0.05 * entry.xi.abs().max(1.0),
            "{}: {xis:?}",
            entry.name
        );
        for xi in xis {
            let shifted = ProblemSpec::new(
                entry.name.clone(),
                dim,
                Arc::new(move |u: &[f64]| raw(u) - xi),
                Some(target),
            )
            .unwrap();
            let (est, se) = brute_force_pof(&shifted, 1 << 16, 3).unwrap();
            assert!(
                (est - target).abs() < 4.0 * se + 2e-3,
                "{}: {est}",
                entry.name
            );
        }
    }
}

#[test]
fn unknown_names_are_rejected() {
    assert!(by_name("rosenbrock").is_err());
    assert!(form_by_name("rosenbrock").is_none());
}
