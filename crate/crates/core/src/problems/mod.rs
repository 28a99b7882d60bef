//! Bundled benchmark problems and brute-force reference estimators.
//!
//! Every problem is a map `g: (0,1)^d -> R` with failure meaning `g(u) >= 0`.
//! Non-uniform inputs are handled by composing the textbook function with a
//! change of variables, and the failure threshold `xi` is subtracted so the
//! sign convention holds. Thresholds live in `fixtures/problems.toml`.

pub mod functions;

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::estimators::cmc_estimate;
use crate::qmc::{derive_seed, generate_nodes, SequenceConfig, SequenceKind};

pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Names of the bundled problems, in table order.
pub const PROBLEM_NAMES: [&str; 5] = ["sine", "multimodal", "four_branch", "ishigami", "hartmann"];

/// Randomizations used for brute-force standard errors.
pub const BRUTE_FORCE_REPLICATES: usize = 8;

const MANIFEST_TEXT: &str = include_str!("../../fixtures/problems.toml");

#[derive(Debug, Clone, Deserialize)]
pub struct Manifest {
    pub version: u32,
    #[serde(rename = "problem")]
    pub problems: Vec<FixtureEntry>,
}

/// One manifest row: which closed form, its threshold and provenance.
#[derive(Debug, Clone, Deserialize)]
pub struct FixtureEntry {
    pub name: String,
    pub form: String,
    pub dimension: usize,
    pub xi: f64,
    pub true_p: Option<f64>,
    pub calibration: String,
    pub calibration_seed: Option<u64>,
    pub calibration_nodes: Option<usize>,
}

/// The bundled manifest.
pub fn manifest() -> &'static Manifest {
    static MANIFEST: OnceLock<Manifest> = OnceLock::new();
    MANIFEST.get_or_init(|| toml::from_str(MANIFEST_TEXT).expect("bundled problem manifest parses"))
}

/// Closed form (before thresholding) for a manifest `form` identifier.
pub fn form_by_name(form: &str) -> Option<(usize, fn(&[f64]) -> f64)> {
    Some(match form {
        "sine" => (1, functions::sine as fn(&[f64]) -> f64),
        "multimodal" => (2, functions::multimodal),
        "four_branch" => (2, functions::four_branch),
        "ishigami" => (3, functions::ishigami),
        "hartmann" => (6, functions::hartmann),
        _ => return None,
    })
}

#[derive(Clone)]
pub struct ProblemSpec {
    pub name: String,
    pub dimension: usize,
    evaluator: Evaluator,
    pub xi: f64,
    pub true_p: Option<f64>,
    pub provenance: String,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("dimension", &self.dimension)
            .field("xi", &self.xi)
            .field("true_p", &self.true_p)
            .field("provenance", &self.provenance)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    /// A problem from an arbitrary evaluator that already follows the
    /// `g >= 0` failure convention.
    pub fn new(
        name: impl Into<String>,
        dimension: usize,
        evaluator: Evaluator,
        true_p: Option<f64>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("problem dimension must be at least 1"));
        }
        if let Some(p) = true_p {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!(
                    "reference probability {p} outside [0,1]"
                )));
            }
        }
        Ok(ProblemSpec {
            name: name.into(),
            dimension,
            evaluator,
            xi: 0.0,
            true_p,
            provenance: "user supplied".into(),
        })
    }

    pub fn from_fixture(entry: &FixtureEntry) -> Result<Self> {
        let (dim, form) = form_by_name(&entry.form)
            .ok_or_else(|| Error::invalid(format!("unknown problem form {:?}", entry.form)))?;
        if dim != entry.dimension {
            return Err(Error::invalid(format!(
                "fixture {} declares dimension {} but form {} is {dim}-d",
                entry.name, entry.dimension, entry.form
            )));
        }
        let xi = entry.xi;
        let mut spec = ProblemSpec::new(
            entry.name.clone(),
            dim,
            Arc::new(move |u: &[f64]| form(u) - xi),
            entry.true_p,
        )?;
        spec.xi = xi;
        spec.provenance = match (entry.calibration_seed, entry.calibration_nodes) {
            (Some(seed), Some(n)) => format!("{} (seed {seed}, {n} nodes)", entry.calibration),
            _ => entry.calibration.clone(),
        };
        Ok(spec)
    }

    /// `g(u)`; nonnegative means failure.
    pub fn evaluate(&self, u: &[f64]) -> f64 {
        (self.evaluator)(u)
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    pub fn fails(&self, u: &[f64]) -> bool {
        self.evaluate(u) >= 0.0
    }
}

/// A bundled problem by name.
pub fn by_name(name: &str) -> Result<ProblemSpec> {
    let entry = manifest()
        .problems
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| {
            Error::invalid(format!(
                "unknown problem {name:?}; expected one of {PROBLEM_NAMES:?}"
            ))
        })?;
    ProblemSpec::from_fixture(entry)
}

pub fn sine_problem() -> ProblemSpec {
    by_name("sine").expect("bundled fixture")
}

pub fn multimodal_problem() -> ProblemSpec {
    by_name("multimodal").expect("bundled fixture")
}

pub fn four_branch_problem() -> ProblemSpec {
    by_name("four_branch").expect("bundled fixture")
}

pub fn ishigami_problem() -> ProblemSpec {
    by_name("ishigami").expect("bundled fixture")
}

pub fn hartmann_problem() -> ProblemSpec {
    by_name("hartmann").expect("bundled fixture")
}

pub fn all_problems() -> Vec<ProblemSpec> {
    PROBLEM_NAMES
        .iter()
        .map(|n| by_name(n).expect("bundled fixture"))
        .collect()
}

/// Reference estimate of `P(g >= 0)` with a replicated-randomization
/// standard error: `BRUTE_FORCE_REPLICATES` independent point sets of
/// `ceil(n / replicates)` nodes each.
pub fn brute_force_pof_with(
    problem: &ProblemSpec,
    n: usize,
    seed: u64,
    kind: SequenceKind,
) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::invalid(format!("brute force needs N >= 2, got {n}")));
    }
    let per = n.div_ceil(BRUTE_FORCE_REPLICATES);
    let mut means = Vec::with_capacity(BRUTE_FORCE_REPLICATES);
    for r in 0..BRUTE_FORCE_REPLICATES {
        let cfg = SequenceConfig {
            kind,
            seed: derive_seed(seed, r as u64),
            dimension: problem.dimension,
        };
        let nodes = generate_nodes(&cfg, per)?;
        let hits = nodes.rows().filter(|u| problem.fails(u)).count();
        means.push(hits as f64 / per as f64);
    }
    let (mean, var) = cmc_estimate(&means)?;
    // cmc_estimate reports the plug-in variance over R; rescale to the
    // unbiased standard error of the replicate mean.
    let r = BRUTE_FORCE_REPLICATES as f64;
    Ok((mean, (var * r / (r - 1.0)).sqrt()))
}

/// Quasi-Monte Carlo brute force; see [`brute_force_pof_with`].
pub fn brute_force_pof(problem: &ProblemSpec, n: usize, seed: u64) -> Result<(f64, f64)> {
    brute_force_pof_with(problem, n, seed, SequenceKind::LowDiscrepancy)
}

/// Threshold `xi` with `measure{raw(u) - xi >= 0} ~ target_p`: the empirical
/// `(1 - target_p)`-quantile of `raw` over `n` low-discrepancy nodes.
pub fn calibrate_threshold<F>(raw: F, dim: usize, target_p: f64, n: usize, seed: u64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if !(target_p > 0.0 && target_p < 1.0) {
        return Err(Error::invalid(format!(
            "target probability must be in (0,1), got {target_p}"
        )));
    }
    let nodes = generate_nodes(&SequenceConfig::low_discrepancy(seed, dim), n)?;
    let mut values: Vec<f64> = nodes.rows().map(&raw).collect();
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("raw response {bad} is not finite")));
    }
    values.sort_by(f64::total_cmp);
    if values[0] == values[values.len() - 1] {
        return Err(Error::invalid(
            "raw response is constant on the calibration nodes",
        ));
    }
    let k = ((target_p * n as f64).round() as usize).clamp(1, n);
    Ok(values[n - k])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_every_problem() {
        let m = manifest();
        assert_eq!(m.version, 1);
        let names: Vec<_> = m.problems.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, PROBLEM_NAMES);
    }

    #[test]
    fn table_values() {
        let truths: Vec<_> = all_problems().iter().map(|p| p.true_p.unwrap()).collect();
        assert_eq!(truths, [0.50, 0.30, 0.21, 0.16, 0.0074]);
        let dims: Vec<_> = all_problems().iter().map(|p| p.dimension).collect();
        assert_eq!(dims, [1, 2, 2, 3, 6]);
    }

    #[test]
    fn unknown_problem() {
        assert!(matches!(by_name("nope"), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn sine_boundary() {
        let p = sine_problem();
        assert_eq!(p.xi, 0.0);
        assert!(p.evaluate(&[1.0 / 6.0]).abs() < 1e-12);
        assert!(p.evaluate(&[1.0 / 3.0]).abs() < 1e-12);
    }

    #[test]
    fn ishigami_center_is_minus_xi() {
        let p = ishigami_problem();
        assert!((p.evaluate(&[0.5, 0.5, 0.5]) + p.xi).abs() < 1e-12);
    }

    #[test]
    fn uniform_quantiles() {
        let xi = calibrate_threshold(|u: &[f64]| u[0], 1, 0.5, 1 << 12, 1).unwrap();
        assert!((xi - 0.5).abs() < 1e-3);
        let xi = calibrate_threshold(|u: &[f64]| u[0], 1, 0.25, 1 << 12, 1).unwrap();
        assert!((xi - 0.75).abs() < 1e-3);
        assert!(calibrate_threshold(|_: &[f64]| 3.0, 1, 0.25, 64, 1).is_err());
        assert!(calibrate_threshold(|u: &[f64]| u[0], 1, 1.0, 64, 1).is_err());
    }

    #[test]
    fn brute_force_simple_regions() {
        let all = ProblemSpec::new("all", 2, Arc::new(|_: &[f64]| 1.0), None).unwrap();
        assert_eq!(brute_force_pof(&all, 1024, 3).unwrap(), (1.0, 0.0));
        let half = ProblemSpec::new("half", 2, Arc::new(|u: &[f64]| u[0] - 0.5), None).unwrap();
        let (p, _) = brute_force_pof(&half, 1 << 16, 3).unwrap();
        assert!((p - 0.5).abs() < 1e-3);
        assert!(brute_force_pof(&half, 1, 3).is_err());
    }
}
