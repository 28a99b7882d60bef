//! Gaussian-process regression with incremental updates.
//!
//! [`GpModel::fit`] factors the kernel matrix once; [`GpModel::update`]
//! extends the factorization block-wise when observations arrive, and
//! [`PredictionCache::update`] carries posterior moments at a fixed node set
//! forward without touching the existing cross-kernel matrix.

mod cache;
mod hyper;
mod kernel;
mod model;

pub use cache::PredictionCache;
pub use hyper::{optimize_hyperparameters, HyperSearch, HyperoptPolicy};
pub use kernel::{kernel_eval, KernelSpec, Smoothness};
pub use model::{log_marginal_likelihood, GpModel, PriorSpec, DEFAULT_JITTER};

use crate::error::Result;
use crate::qmc::SampleMatrix;

/// Fits a model to `(x, y)`.
pub fn fit(prior: PriorSpec, x: SampleMatrix, y: Vec<f64>) -> Result<GpModel> {
    GpModel::fit(prior, x, y)
}

/// Posterior moments and cached intermediates at `nodes`.
pub fn predict(model: &GpModel, nodes: &SampleMatrix) -> Result<PredictionCache> {
    PredictionCache::predict(model, nodes)
}

/// Extends `model` with `b >= 1` new observations.
pub fn update(model: &GpModel, x_new: &SampleMatrix, y_new: &[f64]) -> Result<GpModel> {
    model.update(x_new, y_new)
}

/// Carries `cache`, produced from `model_old`, forward to `model_new`.
pub fn update_predictions(
    model_old: &GpModel,
    cache: PredictionCache,
    model_new: &GpModel,
) -> Result<PredictionCache> {
    cache.update(model_old, model_new)
}
