use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use super::model::{log_marginal_likelihood, PriorSpec};
use crate::error::{Error, Result};
use crate::qmc::SampleMatrix;

/// When kernel hyperparameters are re-estimated during an adaptive run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HyperoptPolicy {
    /// Once, after the initial design; incremental updates afterwards.
    #[default]
    InitialOnly,
    /// Before every refinement step; forces a full refit each time.
    EveryIteration,
    Never,
}

/// Box bounds (inclusive) for lengthscale and amplitude, searched on a log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperSearch {
    pub lengthscale: (f64, f64),
    pub amplitude: (f64, f64),
    /// Grid points per axis before local refinement.
    pub grid: usize,
    /// Local search stops once the log-space step falls below this.
    pub tolerance: f64,
}

impl HyperSearch {
    /// Default bounds scaled to the second moment of `y` about `prior_mean`.
    pub fn for_data(y: &[f64], prior_mean: f64) -> Self {
        let scale = if y.is_empty() {
            1.0
        } else {
            y.iter().map(|v| (v - prior_mean).powi(2)).sum::<f64>() / y.len() as f64
        };
        let scale = if scale > 0.0 && scale.is_finite() {
            scale
        } else {
            1.0
        };
        HyperSearch {
            lengthscale: (0.05, 0.5),
            amplitude: (1e-3 * scale, 1e2 * scale),
            grid: 16,
            tolerance: 1e-3,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = |(lo, hi): (f64, f64)| lo > 0.0 && hi.is_finite() && lo <= hi;
        if !ok(self.lengthscale) || !ok(self.amplitude) {
            return Err(Error::invalid(format!(
                "empty or non-positive search bounds: lengthscale {:?}, amplitude {:?}",
                self.lengthscale, self.amplitude
            )));
        }
        if self.grid == 0 {
            return Err(Error::invalid(
                "search grid needs at least one point per axis",
            ));
        }
        Ok(())
    }
}

fn log_axis((lo, hi): (f64, f64), count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    if count == 1 || a == b {
        return vec![0.5 * (a + b)];
    }
    (0..count)
        .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
        .collect()
}

struct Objective<'a> {
    prior: &'a PriorSpec,
    x: &'a SampleMatrix,
    y: &'a [f64],
}

impl Objective<'_> {
    fn prior_at(&self, log_l: f64, log_a: f64) -> PriorSpec {
        let mut p = *self.prior;
        p.kernel = KernelSpec {
            lengthscale: log_l.exp(),
            amplitude: log_a.exp(),
            ..p.kernel
        };
        p
    }

    fn value(&self, log_l: f64, log_a: f64) -> f64 {
        log_marginal_likelihood(&self.prior_at(log_l, log_a), self.x, self.y)
            .unwrap_or(f64::NEG_INFINITY)
    }
}

/// Maximizes the log marginal likelihood over `(lengthscale, amplitude)`
/// with the smoothness, prior mean and jitter held fixed.
///
/// A log-scale grid is refined by compass search; the result is never worse
/// than the input prior.
pub fn optimize_hyperparameters(
    prior: &PriorSpec,
    x: &SampleMatrix,
    y: &[f64],
    search: &HyperSearch,
) -> Result<PriorSpec> {
    search.validate()?;
    prior.validate()?;
    if y.len() < 2 || x.nrows() != y.len() {
        return Err(Error::invalid(format!(
            "need at least two matching observations, got {} locations and {} values",
            x.nrows(),
            y.len()
        )));
    }
    let obj = Objective { prior, x, y };
    let ls = log_axis(search.lengthscale, search.grid);
    let amps = log_axis(search.amplitude, search.grid);

    let mut best = (f64::NEG_INFINITY, ls[0], amps[0]);
    for &l in &ls {
        for &a in &amps {
            let v = obj.value(l, a);
            if v > best.0 {
                best = (v, l, a);
            }
        }
    }
    if best.0 == f64::NEG_INFINITY {
        return Err(Error::Numerical {
            message: "kernel matrix failed to factor at every grid point".into(),
            suggested_jitter: (prior.jitter * 100.0).max(1e-10),
        });
    }

    let bounds = [
        (search.lengthscale.0.ln(), search.lengthscale.1.ln()),
        (search.amplitude.0.ln(), search.amplitude.1.ln()),
    ];
    let spacing = |(lo, hi): (f64, f64)| {
        if search.grid > 1 {
            (hi - lo) / (search.grid - 1) as f64
        } else {
            hi - lo
        }
    };
    let mut steps = [spacing(bounds[0]).max(1e-2), spacing(bounds[1]).max(1e-2)];
    let (mut value, mut point) = (best.0, [best.1, best.2]);
    while steps[0].max(steps[1]) > search.tolerance {
        let mut improved = false;
        for axis in 0..2 {
            for dir in [1.0, -1.0] {
                let mut cand = point;
                cand[axis] = (cand[axis] + dir * steps[axis]).clamp(bounds[axis].0, bounds[axis].1);
                if cand == point {
                    continue;
                }
                let v = obj.value(cand[0], cand[1]);
                if v > value {
                    value = v;
                    point = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            steps[0] *= 0.5;
            steps[1] *= 0.5;
        }
    }

    let found = obj.prior_at(point[0], point[1]);
    let start = log_marginal_likelihood(prior, x, y).unwrap_or(f64::NEG_INFINITY);
    Ok(if start > value { *prior } else { found })
}
