//! Rejection sampling from unnormalized densities bounded by one, and the
//! batch proposal that draws new simulation inputs from `2 ERR_n`.

use crate::error::{Error, Result};
use crate::estimators::vertical_p;
use crate::gp::GpModel;
use crate::qmc::{derive_seed, generate_nodes, CounterUniforms, SampleMatrix, SequenceConfig};

/// Points closer than this to an existing observation are re-drawn.
pub const DUPLICATE_RADIUS: f64 = 1e-10;

/// Default cap on candidates per requested draw.
pub const DEFAULT_TRIES_PER_DRAW: u64 = 1_000_000;

const DESIGN_STREAM: u64 = 0x4445_5349_474e;

/// An unnormalized density on the unit cube with values in `[0, 1]`.
pub trait Density {
    /// Writes the density at each row of `points` (row-major, `dim` columns)
    /// into `out`.
    fn eval_batch(&self, points: &[f64], dim: usize, out: &mut [f64]) -> Result<()>;
}

impl<F> Density for F
where
    F: Fn(&[f64]) -> f64,
{
    fn eval_batch(&self, points: &[f64], dim: usize, out: &mut [f64]) -> Result<()> {
        for (o, p) in out.iter_mut().zip(points.chunks_exact(dim)) {
            *o = self(p);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RejectionResult {
    pub accepted: SampleMatrix,
    /// Candidates examined, accepted or not.
    pub tries: u64,
    pub density_evals: u64,
}

enum Outcome {
    Done(RejectionResult),
    Exhausted { tries: u64, accepted: usize },
}

fn too_close(p: &[f64], others: &[f64], dim: usize) -> bool {
    let r2 = DUPLICATE_RADIUS * DUPLICATE_RADIUS;
    others
        .chunks_exact(dim)
        .any(|q| p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() <= r2)
}

/// Candidate `t` consumes uniforms `t*(d+1) .. (t+1)*(d+1)` of a counter
/// stream (coordinates, then threshold), so the accepted set does not
/// depend on how candidates are chunked for batch density evaluation.
fn sample_core<D: Density + ?Sized>(
    density: &D,
    b: usize,
    dim: usize,
    seed: u64,
    max_tries: u64,
    avoid: Option<&SampleMatrix>,
) -> Result<Outcome> {
    if b == 0 {
        return Err(Error::invalid("number of draws must be at least 1"));
    }
    if dim == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let stride = dim + 1;
    let mut stream = CounterUniforms::new(seed);
    let mut accepted: Vec<f64> = Vec::with_capacity(b * dim);
    let mut tries = 0u64;
    let mut evals = 0u64;
    let mut chunk = (2 * b).clamp(16, 4096);
    let mut uniforms = Vec::new();
    let mut candidates = Vec::new();
    let mut values = Vec::new();

    while accepted.len() < b * dim {
        if tries >= max_tries {
            return Ok(Outcome::Exhausted {
                tries,
                accepted: accepted.len() / dim,
            });
        }
        let count = (chunk as u64).min(max_tries - tries) as usize;
        uniforms.resize(count * stride, 0.0);
        stream.fill(tries * stride as u64, &mut uniforms);
        candidates.clear();
        for row in uniforms.chunks_exact(stride) {
            candidates.extend_from_slice(&row[..dim]);
        }
        values.resize(count, 0.0);
        density.eval_batch(&candidates, dim, &mut values)?;
        evals += count as u64;

        for (k, (row, &rho)) in uniforms.chunks_exact(stride).zip(&values).enumerate() {
            if !(0.0..=1.0).contains(&rho) {
                return Err(Error::invalid(format!(
                    "density value {rho} outside [0, 1] at {:?}",
                    &row[..dim]
                )));
            }
            tries += 1;
            let point = &row[..dim];
            let threshold = row[dim];
            if threshold <= rho {
                let duplicate = avoid.is_some_and(|x| too_close(point, x.as_slice(), dim))
                    || too_close(point, &accepted, dim);
                if !duplicate {
                    accepted.extend_from_slice(point);
                    if accepted.len() == b * dim {
                        // Candidates past this one were never examined.
                        evals -= (count - k - 1) as u64;
                        break;
                    }
                }
            }
        }
        chunk = (chunk * 2).min(1 << 14);
    }
    Ok(Outcome::Done(RejectionResult {
        accepted: SampleMatrix::new(accepted, b, dim)?,
        tries,
        density_evals: evals,
    }))
}

/// Draws `b` IID points with density proportional to `density`.
///
/// Each try draws a uniform candidate and a uniform threshold and accepts
/// when `threshold <= density(candidate)`.
pub fn rejection_sample<D: Density + ?Sized>(
    density: &D,
    b: usize,
    dim: usize,
    seed: u64,
    max_tries: u64,
) -> Result<RejectionResult> {
    match sample_core(density, b, dim, seed, max_tries, None)? {
        Outcome::Done(r) => Ok(r),
        Outcome::Exhausted { tries, accepted } => Err(Error::EfficiencyExhausted {
            tries,
            accepted,
            requested: b,
            acceptance_rate: accepted as f64 / tries.max(1) as f64,
        }),
    }
}

/// `2 ERR_n(u) = 2 min(p_n(u), 1 - p_n(u))`, evaluated by direct GP
/// prediction at each candidate.
pub struct ErrDensity<'a> {
    model: &'a GpModel,
}

impl<'a> ErrDensity<'a> {
    pub fn new(model: &'a GpModel) -> Self {
        ErrDensity { model }
    }
}

impl Density for ErrDensity<'_> {
    fn eval_batch(&self, points: &[f64], dim: usize, out: &mut [f64]) -> Result<()> {
        if dim != self.model.dim() {
            return Err(Error::invalid(format!(
                "candidates are {dim}-d, model is {}-d",
                self.model.dim()
            )));
        }
        let (mean, sd) = self.model.predict_points(points)?;
        for ((o, m), s) in out.iter_mut().zip(&mean).zip(&sd) {
            let p = vertical_p(*m, *s);
            *o = (2.0 * p.min(1.0 - p)).min(1.0);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BatchProposal {
    Points {
        points: SampleMatrix,
        tries: u64,
    },
    /// The error-rate density was too small to yield a batch within the
    /// try budget; the posterior is treated as certain.
    CertaintyReached {
        tries: u64,
        accepted: usize,
    },
}

/// Draws `b` new inputs IID from the density proportional to `ERR_n` under
/// `model`, never within [`DUPLICATE_RADIUS`] of an existing observation.
pub fn propose_batch(
    model: &GpModel,
    b: usize,
    seed: u64,
    max_tries: u64,
) -> Result<BatchProposal> {
    let density = ErrDensity::new(model);
    Ok(
        match sample_core(&density, b, model.dim(), seed, max_tries, Some(model.x()))? {
            Outcome::Done(r) => BatchProposal::Points {
                points: r.accepted,
                tries: r.tries,
            },
            Outcome::Exhausted { tries, accepted } => {
                BatchProposal::CertaintyReached { tries, accepted }
            }
        },
    )
}

/// First `n0` points of a randomized low-discrepancy stream reserved for
/// initial designs.
pub fn initial_design(dim: usize, n0: usize, seed: u64) -> Result<SampleMatrix> {
    if n0 < 2 {
        return Err(Error::invalid(format!(
            "initial design needs n0 >= 2, got {n0}"
        )));
    }
    generate_nodes(
        &SequenceConfig::low_discrepancy(derive_seed(seed, DESIGN_STREAM), dim),
        n0,
    )
}
