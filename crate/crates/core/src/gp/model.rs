use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use crate::error::{Error, Result};
use crate::qmc::SampleMatrix;

pub const DEFAULT_JITTER: f64 = 1e-8;

/// Constant prior mean, Matérn covariance and diagonal nugget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub mean: f64,
    pub kernel: KernelSpec,
    pub jitter: f64,
}

impl PriorSpec {
    pub fn new(kernel: KernelSpec) -> Self {
        PriorSpec {
            mean: 0.0,
            kernel,
            jitter: DEFAULT_JITTER,
        }
    }

    pub fn with_mean(mut self, mean: f64) -> Self {
        self.mean = mean;
        self
    }

    pub fn with_jitter(mut self, jitter: f64) -> Self {
        self.jitter = jitter;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.jitter >= 0.0 && self.jitter.is_finite()) {
            return Err(Error::invalid(format!(
                "jitter must be >= 0, got {}",
                self.jitter
            )));
        }
        if !self.mean.is_finite() {
            return Err(Error::invalid("prior mean must be finite"));
        }
        Ok(())
    }

    /// Prior variance at any point.
    pub fn variance(&self) -> f64 {
        self.kernel.amplitude
    }

    fn escalated_jitter(&self) -> f64 {
        (self.jitter * 100.0).max(1e-10 * self.kernel.amplitude)
    }
}

/// A fitted Gaussian process: data plus the Cholesky factor `L` of
/// `k(X, X) + s^2 I`, `kappa = L \ (y - m0)` and `beta = L^T \ kappa`.
#[derive(Debug, Clone)]
pub struct GpModel {
    prior: PriorSpec,
    x: SampleMatrix,
    y: Vec<f64>,
    chol: DMatrix<f64>,
    kappa: DVector<f64>,
    beta: DVector<f64>,
}

fn check_values(y: &[f64]) -> Result<()> {
    if let Some(bad) = y.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("observation {bad} is not finite")));
    }
    Ok(())
}

pub(crate) fn kernel_matrix(kernel: &KernelSpec, x: &SampleMatrix, jitter: f64) -> DMatrix<f64> {
    let n = x.nrows();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = kernel.amplitude + jitter;
        for j in 0..i {
            let v = kernel.cov(x.row(i), x.row(j));
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

pub(crate) fn cross_kernel(
    kernel: &KernelSpec,
    a: &SampleMatrix,
    b: &SampleMatrix,
) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), b.nrows(), |i, j| kernel.cov(a.row(i), b.row(j)))
}

fn cholesky_lower(m: DMatrix<f64>, prior: &PriorSpec, what: &str) -> Result<DMatrix<f64>> {
    nalgebra::Cholesky::new(m)
        .map(|c| c.unpack())
        .ok_or_else(|| Error::Numerical {
            message: format!(
                "{what} is not positive definite at jitter {:e}",
                prior.jitter
            ),
            suggested_jitter: prior.escalated_jitter(),
        })
}

fn solve_lower(l: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    l.solve_lower_triangular(rhs)
        .expect("cholesky factor has a positive diagonal")
}

fn solve_lower_transpose(l: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    l.tr_solve_lower_triangular(rhs)
        .expect("cholesky factor has a positive diagonal")
}

impl GpModel {
    /// Initial fit: factor the kernel matrix and solve for `kappa` and `beta`.
    pub fn fit(prior: PriorSpec, x: SampleMatrix, y: Vec<f64>) -> Result<Self> {
        prior.validate()?;
        if x.nrows() != y.len() {
            return Err(Error::invalid(format!(
                "{} locations but {} observations",
                x.nrows(),
                y.len()
            )));
        }
        check_values(&y)?;
        let k = kernel_matrix(&prior.kernel, &x, prior.jitter);
        let chol = cholesky_lower(k, &prior, "kernel matrix")?;
        let delta = DVector::from_iterator(y.len(), y.iter().map(|v| v - prior.mean));
        let kappa = solve_lower(&chol, &delta);
        let beta = solve_lower_transpose(&chol, &kappa);
        Ok(GpModel {
            prior,
            x,
            y,
            chol,
            kappa,
            beta,
        })
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    pub fn x(&self) -> &SampleMatrix {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    /// Lower-triangular Cholesky factor.
    pub fn chol(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn kappa(&self) -> &DVector<f64> {
        &self.kappa
    }

    pub fn beta(&self) -> &DVector<f64> {
        &self.beta
    }

    /// Adds `b` observations with fixed hyperparameters using the block
    /// Cholesky relations
    ///
    /// ```text
    /// chol([[K, Kx], [Kx^T, Kxx]]) = [[L, 0], [W^T, Lt]],  W = L \ Kx,
    /// Lt = chol(Kxx - W^T W)
    /// ```
    ///
    /// followed by the matching block forward and backward solves.
    pub fn update(&self, x_new: &SampleMatrix, y_new: &[f64]) -> Result<GpModel> {
        if x_new.dim() != self.dim() {
            return Err(Error::invalid(format!(
                "new points are {}-d, model is {}-d",
                x_new.dim(),
                self.dim()
            )));
        }
        if x_new.nrows() != y_new.len() {
            return Err(Error::invalid(format!(
                "{} new locations but {} new observations",
                x_new.nrows(),
                y_new.len()
            )));
        }
        check_values(y_new)?;
        let n = self.n();
        let b = y_new.len();
        let kernel = &self.prior.kernel;

        let k_cross = cross_kernel(kernel, &self.x, x_new);
        let w = self
            .chol
            .solve_lower_triangular(&k_cross)
            .expect("cholesky factor has a positive diagonal");
        let mut schur = kernel_matrix(kernel, x_new, self.prior.jitter);
        schur.gemm_tr(-1.0, &w, &w, 1.0);
        // Round-off can leave the product slightly asymmetric.
        for i in 0..b {
            for j in 0..i {
                let avg = 0.5 * (schur[(i, j)] + schur[(j, i)]);
                schur[(i, j)] = avg;
                schur[(j, i)] = avg;
            }
        }
        let chol_new = cholesky_lower(schur, &self.prior, "Schur complement")?;

        let mut resid = DVector::from_iterator(b, y_new.iter().map(|v| v - self.prior.mean));
        resid.gemv_tr(-1.0, &w, &self.kappa, 1.0);
        let kappa_new = solve_lower(&chol_new, &resid);
        let beta_2 = solve_lower_transpose(&chol_new, &kappa_new);
        let mut rhs = self.kappa.clone();
        rhs.gemv(-1.0, &w, &beta_2, 1.0);
        let beta_1 = solve_lower_transpose(&self.chol, &rhs);

        let mut chol = DMatrix::zeros(n + b, n + b);
        chol.view_mut((0, 0), (n, n)).copy_from(&self.chol);
        chol.view_mut((n, 0), (b, n)).copy_from(&w.transpose());
        chol.view_mut((n, n), (b, b)).copy_from(&chol_new);

        let kappa =
            DVector::from_iterator(n + b, self.kappa.iter().chain(kappa_new.iter()).copied());
        let beta = DVector::from_iterator(n + b, beta_1.iter().chain(beta_2.iter()).copied());
        let mut y = self.y.clone();
        y.extend_from_slice(y_new);
        Ok(GpModel {
            prior: self.prior,
            x: self.x.concat(x_new)?,
            y,
            chol,
            kappa,
            beta,
        })
    }

    /// `log N(y | m0, K + s^2 I)` from the cached factorization.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.n() as f64;
        let fit = self.kappa.dot(&self.kappa);
        let log_det: f64 = self.chol.diagonal().iter().map(|v| v.ln()).sum();
        -0.5 * fit - log_det - 0.5 * n * (2.0 * PI).ln()
    }

    /// Posterior mean and standard deviation at arbitrary points, without a
    /// persistent cache. `points` is row-major with `dim()` columns.
    pub fn predict_points(&self, points: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let d = self.dim();
        if !points.len().is_multiple_of(d) {
            return Err(Error::invalid(format!(
                "point buffer of length {} is not a multiple of dimension {d}",
                points.len()
            )));
        }
        let m = points.len() / d;
        let n = self.n();
        let kernel = &self.prior.kernel;
        let k = DMatrix::from_fn(n, m, |i, j| {
            kernel.cov(self.x.row(i), &points[j * d..(j + 1) * d])
        });
        let mean = k.tr_mul(&self.beta);
        let v = self
            .chol
            .solve_lower_triangular(&k)
            .expect("cholesky factor has a positive diagonal");
        let prior_var = self.prior.variance();
        let sd = v
            .column_iter()
            .map(|c| (prior_var - c.norm_squared()).max(0.0).sqrt())
            .collect();
        let mean = mean.iter().map(|v| v + self.prior.mean).collect();
        Ok((mean, sd))
    }
}

/// Log marginal likelihood of `y` at `x` under `prior`.
pub fn log_marginal_likelihood(prior: &PriorSpec, x: &SampleMatrix, y: &[f64]) -> Result<f64> {
    Ok(GpModel::fit(*prior, x.clone(), y.to_vec())?.log_marginal_likelihood())
}
