//! Point estimates and credible intervals for the probability of failure.
//!
//! Two estimator pairs are available over the posterior at a node set:
//!
//! * the predicted-failure-region measure `P_hat = mean(1{m >= 0})` with
//!   half-width `gamma_hat = mean(ERR) / alpha`, and
//! * the posterior mean `P_check = mean(p)` with half-width
//!   `gamma_check = 2 mean(p (1 - p)) / alpha`,
//!
//! where `p = Phi(m / sigma)` is the vertical failure probability and
//! `ERR = min(p, 1 - p)`. Since `min(p, 1-p) <= 2 p (1-p)` the first pair is
//! never wider and is the one reported by the adaptive loop.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::PredictionCache;
use crate::qmc::normal_cdf;

/// Estimate with its clamped `1 - alpha` credible interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PofEstimate {
    pub p_hat: f64,
    pub gamma_hat: f64,
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    /// Simulation evaluations behind the posterior.
    pub n: usize,
    /// Quadrature nodes used for the estimates.
    pub nodes: usize,
}

impl PofEstimate {
    pub fn new(p_hat: f64, gamma_hat: f64, alpha: f64, n: usize, nodes: usize) -> Self {
        let (lower, upper) = credible_interval(p_hat, gamma_hat);
        PofEstimate {
            p_hat,
            gamma_hat,
            lower,
            upper,
            alpha,
            n,
            nodes,
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, p: f64) -> bool {
        self.lower <= p && p <= self.upper
    }
}

/// Posterior probability that `g(u) >= 0` given its mean and standard deviation.
pub fn vertical_p(mean: f64, sd: f64) -> f64 {
    if sd > 0.0 {
        normal_cdf(mean / sd)
    } else if mean >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Vertical failure probabilities and expected error rates at a node set.
#[derive(Debug, Clone, PartialEq)]
pub struct VerticalField {
    pub p: Vec<f64>,
    pub err: Vec<f64>,
}

impl VerticalField {
    pub fn from_moments(mean: &[f64], sd: &[f64]) -> Result<Self> {
        if mean.len() != sd.len() {
            return Err(Error::invalid(format!(
                "{} means but {} standard deviations",
                mean.len(),
                sd.len()
            )));
        }
        let p: Vec<f64> = mean
            .iter()
            .zip(sd)
            .map(|(&m, &s)| vertical_p(m, s))
            .collect();
        Ok(Self::from_probabilities(p))
    }

    pub fn from_probabilities(p: Vec<f64>) -> Self {
        let err = p.iter().map(|&q| q.min(1.0 - q)).collect();
        VerticalField { p, err }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Mean of `ERR` over the nodes.
    pub fn mean_err(&self) -> f64 {
        mean(&self.err)
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "alpha must lie in (0,1), got {alpha}"
        )))
    }
}

/// Vertical field over a prediction cache's nodes.
pub fn err_field(cache: &PredictionCache) -> VerticalField {
    VerticalField::from_moments(cache.mean(), cache.sd()).expect("cache moments have equal length")
}

/// Fraction of posterior means that are nonnegative (ties count as failure).
pub fn p_hat_from_means(means: &[f64]) -> f64 {
    if means.is_empty() {
        return 0.0;
    }
    means.iter().filter(|&&m| m >= 0.0).count() as f64 / means.len() as f64
}

/// Measure of the predicted failure region, approximated on the cache's nodes.
pub fn estimate_p_hat(cache: &PredictionCache) -> f64 {
    p_hat_from_means(cache.mean())
}

pub fn estimate_gamma_hat(field: &VerticalField, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(field.mean_err() / alpha)
}

/// Posterior mean of the failure probability.
pub fn estimate_p_check(field: &VerticalField) -> f64 {
    mean(&field.p)
}

pub fn estimate_gamma_check(field: &VerticalField, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let var_sum: f64 = field.p.iter().map(|p| p * (1.0 - p)).sum();
    let n = field.len().max(1) as f64;
    Ok(2.0 * var_sum / n / alpha)
}

/// `[max(point - gamma, 0), min(point + gamma, 1)]`.
pub fn credible_interval(point: f64, gamma: f64) -> (f64, f64) {
    ((point - gamma).max(0.0), (point + gamma).min(1.0))
}

/// Crude Monte Carlo: sample mean and the plug-in estimate of the
/// estimator's variance, `mean((f - mean)^2) / N`. For indicators this is
/// `p (1 - p) / N`.
pub fn cmc_estimate(values: &[f64]) -> Result<(f64, f64)> {
    if values.len() < 2 {
        return Err(Error::invalid(format!(
            "crude Monte Carlo needs at least 2 values, got {}",
            values.len()
        )));
    }
    let n = values.len() as f64;
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Ok((m, ss / n / n))
}

/// Importance-sampling mean `(1/N) sum f_i / q_i` for nodes drawn from `q`.
pub fn ismc_estimate(f_values: &[f64], q_values: &[f64]) -> Result<f64> {
    if f_values.len() != q_values.len() {
        return Err(Error::invalid(format!(
            "{} integrand values but {} density values",
            f_values.len(),
            q_values.len()
        )));
    }
    if f_values.is_empty() {
        return Err(Error::invalid(
            "importance sampling needs at least one node",
        ));
    }
    let mut sum = 0.0;
    for (i, (&f, &q)) in f_values.iter().zip(q_values).enumerate() {
        if f == 0.0 {
            continue;
        }
        if !(q > 0.0) {
            return Err(Error::invalid(format!(
                "proposal density is {q} at node {i} where the integrand is {f}"
            )));
        }
        sum += f / q;
    }
    Ok(sum / f_values.len() as f64)
}
