//! Shared dense-algebra oracles for the integration tests.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use pof_gp::gp::{kernel_eval, PriorSpec};
use pof_gp::qmc::SampleMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// Midpoint grid on (0, 1).
pub fn grid(g: usize) -> Vec<f64> {
    (0..g).map(|i| (i as f64 + 0.5) / g as f64).collect()
}

pub fn kernel_matrix(prior: &PriorSpec, a: &[f64], b: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), b.len(), |i, j| {
        kernel_eval(&prior.kernel, &[a[i]], &[b[j]]).unwrap()
    })
}

/// Posterior mean and covariance of a 1-d GP on `grid`, by dense inversion.
pub fn posterior_on_grid(
    prior: &PriorSpec,
    x: &[f64],
    y: &[f64],
    grid: &[f64],
) -> (DVector<f64>, DMatrix<f64>) {
    let kxx = kernel_matrix(prior, x, x) + DMatrix::identity(x.len(), x.len()) * prior.jitter;
    let kgx = kernel_matrix(prior, grid, x);
    let kgg = kernel_matrix(prior, grid, grid);
    let inv = kxx.try_inverse().expect("invertible kernel matrix");
    let delta = DVector::from_iterator(y.len(), y.iter().map(|v| v - prior.mean));
    let mean = &kgx * &inv * delta + DVector::from_element(grid.len(), prior.mean);
    let cov = kgg - &kgx * inv * kgx.transpose();
    (mean, cov)
}

/// Lower Cholesky factor of `cov + eps I`, escalating `eps` until it factors.
pub fn sampling_factor(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let n = cov.nrows();
    let sym = (cov + cov.transpose()) * 0.5;
    let mut eps = 1e-12 * sym.diagonal().max().max(1e-300);
    loop {
        if let Some(c) = (&sym + DMatrix::identity(n, n) * eps).cholesky() {
            return c.l();
        }
        eps *= 10.0;
    }
}

/// One Gaussian path `mean + L z`.
pub fn draw_path<R: Rng>(rng: &mut R, mean: &DVector<f64>, factor: &DMatrix<f64>) -> DVector<f64> {
    let z = DVector::from_iterator(
        mean.len(),
        (0..mean.len()).map(|_| rng.sample::<f64, _>(StandardNormal)),
    );
    mean + factor * z
}

pub fn column(values: &[f64]) -> SampleMatrix {
    SampleMatrix::new(values.to_vec(), values.len(), 1).unwrap()
}
