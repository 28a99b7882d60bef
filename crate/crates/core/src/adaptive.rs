//! The adaptive estimation loop.
//!
//! 1. Evaluate an initial low-discrepancy design and fit the surrogate.
//! 2. Predict at a fixed set of `N` randomized low-discrepancy nodes.
//! 3. Estimate `P_hat` and its credible half-width on those nodes; stop when
//!    certain, narrow enough, or out of budget.
//! 4. Otherwise draw a batch from the density proportional to `ERR`,
//!    evaluate it, extend the factorization and the node cache, and repeat.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    err_field, estimate_gamma_check, estimate_gamma_hat, estimate_p_check, estimate_p_hat,
    PofEstimate,
};
use crate::gp::{
    optimize_hyperparameters, GpModel, HyperSearch, HyperoptPolicy, KernelSpec, PredictionCache,
    PriorSpec, Smoothness, DEFAULT_JITTER,
};
use crate::problems::ProblemSpec;
use crate::qmc::{derive_seed, generate_nodes, SampleMatrix, SequenceConfig, MAX_DIMENSION};
use crate::sampler::{initial_design, propose_batch, BatchProposal, DEFAULT_TRIES_PER_DRAW};

const NODE_STREAM: u64 = 0x4e4f_4445;
const PROPOSAL_STREAM: u64 = 0x5052_4f50;

/// Evaluates the simulation at every row of a block of points.
pub trait BatchEvaluator {
    fn evaluate_batch(&mut self, points: &SampleMatrix) -> Result<Vec<f64>>;
}

impl<F> BatchEvaluator for F
where
    F: FnMut(&SampleMatrix) -> Result<Vec<f64>>,
{
    fn evaluate_batch(&mut self, points: &SampleMatrix) -> Result<Vec<f64>> {
        self(points)
    }
}

impl BatchEvaluator for ProblemSpec {
    fn evaluate_batch(&mut self, points: &SampleMatrix) -> Result<Vec<f64>> {
        Ok(points.rows().map(|u| self.evaluate(u)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaptiveConfig {
    pub alpha: f64,
    /// Number `N` of fixed quadrature nodes.
    pub nodes: usize,
    /// Initial design size; `None` means `2d + 6`.
    pub n0: Option<usize>,
    pub batch: usize,
    /// Total evaluation budget `n_max`.
    pub budget: usize,
    /// Stop once the clamped interval width `upper - lower` is at most
    /// this; nonpositive disables.
    pub target_width: f64,
    pub seed: u64,
    pub hyperopt: HyperoptPolicy,
    pub smoothness: Smoothness,
    /// Kernel lengthscale, or the starting point for optimization.
    pub lengthscale: f64,
    /// Kernel amplitude, or the starting point for optimization.
    pub amplitude: f64,
    pub prior_mean: f64,
    pub jitter: f64,
    /// Optimization bounds; `None` scales them to the initial data.
    pub search: Option<HyperSearch>,
    /// Rejection-sampling try budget per requested draw.
    pub max_tries_per_draw: u64,
    /// Use block updates of the factorization and node cache. When off,
    /// every iteration refits and re-predicts from scratch.
    pub incremental: bool,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig {
            alpha: 0.05,
            nodes: 1 << 16,
            n0: None,
            batch: 4,
            budget: 128,
            target_width: 0.0,
            seed: 0,
            hyperopt: HyperoptPolicy::InitialOnly,
            smoothness: Smoothness::ThreeHalves,
            lengthscale: 0.25,
            amplitude: 1.0,
            prior_mean: 0.0,
            jitter: DEFAULT_JITTER,
            search: None,
            max_tries_per_draw: DEFAULT_TRIES_PER_DRAW,
            incremental: true,
        }
    }
}

impl AdaptiveConfig {
    pub fn initial_size(&self, dim: usize) -> usize {
        self.n0.unwrap_or(2 * dim + 6)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if dim == 0 || dim > MAX_DIMENSION {
            return Err(Error::invalid(format!(
                "dimension must be in 1..={MAX_DIMENSION}, got {dim}"
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!(
                "alpha must lie in (0,1), got {}",
                self.alpha
            )));
        }
        let n0 = self.initial_size(dim);
        if n0 < 2 {
            return Err(Error::invalid(format!("n0 must be at least 2, got {n0}")));
        }
        if self.batch == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        if self.budget < n0 {
            return Err(Error::invalid(format!(
                "budget {} is smaller than the initial design {n0}",
                self.budget
            )));
        }
        if self.nodes == 0 {
            return Err(Error::invalid("node count must be at least 1"));
        }
        if self.target_width.is_nan() {
            return Err(Error::invalid("target width is NaN"));
        }
        if self.max_tries_per_draw == 0 {
            return Err(Error::invalid("max_tries_per_draw must be at least 1"));
        }
        self.prior()?.validate()
    }

    /// The prior before any optimization.
    pub fn prior(&self) -> Result<PriorSpec> {
        let kernel = KernelSpec::new(self.smoothness, self.lengthscale, self.amplitude)?;
        Ok(PriorSpec::new(kernel)
            .with_mean(self.prior_mean)
            .with_jitter(self.jitter))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub n: usize,
    pub p_hat: f64,
    pub gamma_hat: f64,
    pub lower: f64,
    pub upper: f64,
    pub p_check: f64,
    pub gamma_check: f64,
    /// Rejection-sampling tries spent proposing the batch that led here.
    pub tries: u64,
    /// Wall seconds since the start of the run.
    pub elapsed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    WidthReached,
    BudgetExhausted,
    CertaintyReached,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::WidthReached => "width_reached",
            StopReason::BudgetExhausted => "budget_exhausted",
            StopReason::CertaintyReached => "certainty_reached",
        })
    }
}

/// Companion posterior-mean estimate and its (wider) half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CheckEstimate {
    pub p_check: f64,
    pub gamma_check: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub history: Vec<IterationRecord>,
    pub estimate: PofEstimate,
    pub stop_reason: StopReason,
    /// Surrogate over every evaluation made during the run.
    pub model: GpModel,
    /// Whether the jitter had to be raised after a failed factorization.
    pub jitter_escalated: bool,
}

/// A run that stopped on an error, with everything recorded before it.
#[derive(Debug)]
pub struct RunAbort {
    pub error: Error,
    pub history: Vec<IterationRecord>,
}

impl fmt::Display for RunAbort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "run aborted after {} iterations: {}",
            self.history.len(),
            self.error
        )
    }
}

impl std::error::Error for RunAbort {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<RunAbort> for Error {
    fn from(a: RunAbort) -> Self {
        a.error
    }
}

/// Estimates from a current cache.
pub fn refresh_estimates(
    cache: &PredictionCache,
    alpha: f64,
) -> Result<(PofEstimate, CheckEstimate)> {
    let field = err_field(cache);
    let estimate = PofEstimate::new(
        estimate_p_hat(cache),
        estimate_gamma_hat(&field, alpha)?,
        alpha,
        cache.n_data(),
        cache.len(),
    );
    let check = CheckEstimate {
        p_check: estimate_p_check(&field),
        gamma_check: estimate_gamma_check(&field, alpha)?,
    };
    Ok((estimate, check))
}

/// The fixed quadrature nodes a run with `config` uses.
pub fn estimation_nodes(config: &AdaptiveConfig, dim: usize) -> Result<SampleMatrix> {
    generate_nodes(
        &SequenceConfig::low_discrepancy(derive_seed(config.seed, NODE_STREAM), dim),
        config.nodes,
    )
}

/// Runs a bundled problem in-process.
pub fn run_problem(problem: &ProblemSpec, config: &AdaptiveConfig) -> Result<RunResult, RunAbort> {
    let mut evaluator = problem.clone();
    run(problem.dimension, config, &mut evaluator)
}

struct State<'a> {
    config: &'a AdaptiveConfig,
    nodes: SampleMatrix,
    search: Option<HyperSearch>,
    escalated: bool,
}

impl State<'_> {
    fn optimized(&mut self, prior: &PriorSpec, x: &SampleMatrix, y: &[f64]) -> Result<PriorSpec> {
        let search = *self
            .search
            .get_or_insert_with(|| HyperSearch::for_data(y, prior.mean));
        optimize_hyperparameters(prior, x, y, &search)
    }

    /// Full refit and re-prediction, escalating the jitter once if the
    /// kernel matrix does not factor.
    fn refit(
        &mut self,
        prior: PriorSpec,
        x: SampleMatrix,
        y: Vec<f64>,
    ) -> Result<(GpModel, PredictionCache)> {
        let model = match GpModel::fit(prior, x.clone(), y.clone()) {
            Ok(m) => m,
            Err(Error::Numerical {
                suggested_jitter, ..
            }) if !self.escalated => {
                self.escalated = true;
                GpModel::fit(prior.with_jitter(suggested_jitter), x, y)?
            }
            Err(e) => return Err(e),
        };
        let cache = PredictionCache::predict(&model, &self.nodes)?;
        Ok((model, cache))
    }

    fn initial(&mut self, x: SampleMatrix, y: Vec<f64>) -> Result<(GpModel, PredictionCache)> {
        let mut prior = self.config.prior()?;
        if self.config.hyperopt != HyperoptPolicy::Never {
            prior = self.optimized(&prior, &x, &y)?;
        }
        self.refit(prior, x, y)
    }

    fn extend(
        &mut self,
        model: GpModel,
        cache: PredictionCache,
        x_new: &SampleMatrix,
        y_new: &[f64],
    ) -> Result<(GpModel, PredictionCache)> {
        let x = model.x().concat(x_new)?;
        let mut y = model.y().to_vec();
        y.extend_from_slice(y_new);
        let mut prior = *model.prior();
        if self.config.hyperopt == HyperoptPolicy::EveryIteration {
            prior = self.optimized(&prior, &x, &y)?;
            return self.refit(prior, x, y);
        }
        if !self.config.incremental {
            return self.refit(prior, x, y);
        }
        match model.update(x_new, y_new) {
            Ok(next) => {
                let cache = cache.update(&model, &next)?;
                Ok((next, cache))
            }
            Err(Error::Numerical { .. }) if !self.escalated => self.refit(prior, x, y),
            Err(e) => Err(e),
        }
    }
}

fn evaluate<E: BatchEvaluator + ?Sized>(
    evaluator: &mut E,
    points: &SampleMatrix,
) -> Result<Vec<f64>> {
    let y = evaluator.evaluate_batch(points)?;
    if y.len() != points.nrows() {
        return Err(Error::Evaluator(format!(
            "requested {} evaluations, received {}",
            points.nrows(),
            y.len()
        )));
    }
    if let Some((i, v)) = y.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Evaluator(format!(
            "non-finite output {v} at {:?}",
            points.row(i)
        )));
    }
    Ok(y)
}

/// Runs the adaptive loop on a `dim`-dimensional simulation.
///
/// Every evaluation is requested exactly once and kept in the surrogate.
/// On error the partial history is returned inside [`RunAbort`].
pub fn run<E: BatchEvaluator + ?Sized>(
    dim: usize,
    config: &AdaptiveConfig,
    evaluator: &mut E,
) -> Result<RunResult, RunAbort> {
    let mut history = Vec::new();
    match run_inner(dim, config, evaluator, &mut history) {
        Ok(r) => Ok(r),
        Err(error) => Err(RunAbort { error, history }),
    }
}

fn run_inner<E: BatchEvaluator + ?Sized>(
    dim: usize,
    config: &AdaptiveConfig,
    evaluator: &mut E,
    history: &mut Vec<IterationRecord>,
) -> Result<RunResult> {
    config.validate(dim)?;
    let start = Instant::now();
    let mut state = State {
        config,
        nodes: estimation_nodes(config, dim)?,
        search: config.search,
        escalated: false,
    };

    let x0 = initial_design(dim, config.initial_size(dim), config.seed)?;
    let y0 = evaluate(evaluator, &x0)?;
    let (mut model, mut cache) = state.initial(x0, y0)?;
    let mut tries = 0;

    for iteration in 0u64.. {
        let (estimate, check) = refresh_estimates(&cache, config.alpha)?;
        history.push(IterationRecord {
            n: model.n(),
            p_hat: estimate.p_hat,
            gamma_hat: estimate.gamma_hat,
            lower: estimate.lower,
            upper: estimate.upper,
            p_check: check.p_check,
            gamma_check: check.gamma_check,
            tries,
            elapsed: start.elapsed().as_secs_f64(),
        });

        let mut stop = if estimate.gamma_hat == 0.0 {
            Some(StopReason::CertaintyReached)
        } else if config.target_width > 0.0 && estimate.width() <= config.target_width {
            Some(StopReason::WidthReached)
        } else if model.n() >= config.budget {
            Some(StopReason::BudgetExhausted)
        } else {
            None
        };

        if stop.is_none() {
            let b = config.batch.min(config.budget - model.n());
            let seed = derive_seed(derive_seed(config.seed, PROPOSAL_STREAM), iteration);
            let max_tries = config.max_tries_per_draw.saturating_mul(b as u64);
            match propose_batch(&model, b, seed, max_tries)? {
                BatchProposal::Points { points, tries: t } => {
                    let y = evaluate(evaluator, &points)?;
                    (model, cache) = state.extend(model, cache, &points, &y)?;
                    tries = t;
                }
                BatchProposal::CertaintyReached { .. } => stop = Some(StopReason::CertaintyReached),
            }
        }

        if let Some(stop_reason) = stop {
            return Ok(RunResult {
                history: history.clone(),
                estimate,
                stop_reason,
                model,
                jitter_escalated: state.escalated,
            });
        }
    }
    unreachable!("the iteration counter does not overflow")
}
