use nalgebra::{DMatrix, DMatrixView, DVector};

use super::model::{GpModel, PriorSpec};
use crate::error::{Error, Result};
use crate::qmc::SampleMatrix;

/// Posterior mean and standard deviation at a fixed node set `U`, together
/// with the intermediates needed to absorb new observations cheaply.
///
/// The `n x N` matrices `K_XU` and `V = L \ K_XU` are held transposed
/// (node-major, `N` rows, one column per observation) so that appending
/// observations only appends columns.
#[derive(Debug, Clone)]
pub struct PredictionCache {
    nodes: SampleMatrix,
    prior: PriorSpec,
    n_data: usize,
    prior_mean: Vec<f64>,
    prior_var: Vec<f64>,
    k_ux: Vec<f64>,
    v_t: Vec<f64>,
    v_sq: Vec<f64>,
    mean: Vec<f64>,
    sd: Vec<f64>,
}

fn fill_cross(
    kernel: &super::KernelSpec,
    nodes: &SampleMatrix,
    x: &SampleMatrix,
    rows: std::ops::Range<usize>,
    out: &mut Vec<f64>,
) {
    for j in rows {
        let xj = x.row(j);
        out.extend(nodes.rows().map(|u| kernel.cov(u, xj)));
    }
}

/// Forward substitution across node-major columns: solves `out * L^T = rhs`
/// for the `b x b` lower factor `l`, column by column.
fn forward_columns(l: &DMatrix<f64>, rhs: &mut [f64], nrows: usize) {
    let b = l.nrows();
    for j in 0..b {
        let (done, rest) = rhs.split_at_mut(j * nrows);
        let col = &mut rest[..nrows];
        for k in 0..j {
            let ljk = l[(j, k)];
            if ljk != 0.0 {
                let prev = &done[k * nrows..(k + 1) * nrows];
                for (c, p) in col.iter_mut().zip(prev) {
                    *c -= ljk * p;
                }
            }
        }
        let inv = 1.0 / l[(j, j)];
        for c in col.iter_mut() {
            *c *= inv;
        }
    }
}

fn posterior_sd(prior_var: &[f64], v_sq: &[f64]) -> Vec<f64> {
    prior_var
        .iter()
        .zip(v_sq)
        .map(|(s, v)| (s - v).max(0.0).sqrt())
        .collect()
}

impl PredictionCache {
    /// Posterior at `nodes` given `model`, retaining every intermediate.
    pub fn predict(model: &GpModel, nodes: &SampleMatrix) -> Result<Self> {
        if nodes.dim() != model.dim() {
            return Err(Error::invalid(format!(
                "nodes are {}-d, model is {}-d",
                nodes.dim(),
                model.dim()
            )));
        }
        let prior = *model.prior();
        let big_n = nodes.nrows();
        let n = model.n();
        let prior_mean = vec![prior.mean; big_n];
        let prior_var = vec![prior.variance(); big_n];

        let mut k_ux = Vec::with_capacity(big_n * n);
        fill_cross(&prior.kernel, nodes, model.x(), 0..n, &mut k_ux);

        let mut v_t = k_ux.clone();
        forward_columns(model.chol(), &mut v_t, big_n);
        let mut v_sq = vec![0.0; big_n];
        for col in v_t.chunks_exact(big_n) {
            for (acc, v) in v_sq.iter_mut().zip(col) {
                *acc += v * v;
            }
        }

        let mut cache = PredictionCache {
            nodes: nodes.clone(),
            prior,
            n_data: n,
            sd: posterior_sd(&prior_var, &v_sq),
            prior_mean,
            prior_var,
            k_ux,
            v_t,
            v_sq,
            mean: Vec::new(),
        };
        cache.mean = cache.mean_from(model.beta());
        Ok(cache)
    }

    fn mean_from(&self, beta: &DVector<f64>) -> Vec<f64> {
        let big_n = self.nodes.nrows();
        let k = DMatrixView::from_slice(&self.k_ux, big_n, self.n_data);
        let mut mean = DVector::from_column_slice(&self.prior_mean);
        mean.gemv(1.0, &k, beta, 1.0);
        mean.data.into()
    }

    /// Absorbs the observations `model_new` holds beyond `model_old`,
    /// reusing `m_U`, `K_XU`, `Sigma_U` and `V`.
    ///
    /// With `[[L, 0], [W^T, Lt]]` the factor of `model_new`, the new rows of
    /// `V` are `Lt \ (K_{X~U} - W^T V)` and the cached `diag(V^T V)` only
    /// accumulates their squares.
    pub fn update(mut self, model_old: &GpModel, model_new: &GpModel) -> Result<Self> {
        let n = model_old.n();
        if self.n_data != n {
            return Err(Error::invalid(format!(
                "cache holds {} observations but the old model has {n}",
                self.n_data
            )));
        }
        if model_old.prior() != &self.prior || model_new.prior() != &self.prior {
            return Err(Error::invalid("models and cache disagree on the prior"));
        }
        if model_new.n() <= n {
            return Err(Error::invalid("update needs at least one new observation"));
        }
        if model_new.dim() != self.nodes.dim()
            || model_new.x().as_slice()[..n * self.nodes.dim()] != *model_old.x().as_slice()
        {
            return Err(Error::invalid(
                "new model does not extend the old model's observation locations",
            ));
        }
        let b = model_new.n() - n;
        let big_n = self.nodes.nrows();
        let x_new = model_new.x().slice_rows(n, n + b)?;

        let mut k_new = Vec::with_capacity(big_n * b);
        fill_cross(&self.prior.kernel, &self.nodes, &x_new, 0..b, &mut k_new);

        let chol = model_new.chol();
        let w_t = chol.view((n, 0), (b, n));
        let chol_tilde = chol.view((n, n), (b, b)).into_owned();

        let mut rhs = DMatrix::from_column_slice(big_n, b, &k_new);
        {
            let v = DMatrixView::from_slice(&self.v_t, big_n, n);
            rhs.gemm(-1.0, &v, &w_t.transpose(), 1.0);
        }
        let mut v_tilde: Vec<f64> = rhs.data.into();
        forward_columns(&chol_tilde, &mut v_tilde, big_n);
        for col in v_tilde.chunks_exact(big_n) {
            for (acc, v) in self.v_sq.iter_mut().zip(col) {
                *acc += v * v;
            }
        }

        self.k_ux.extend_from_slice(&k_new);
        self.v_t.extend_from_slice(&v_tilde);
        self.n_data += b;
        self.sd = posterior_sd(&self.prior_var, &self.v_sq);
        self.mean = self.mean_from(model_new.beta());
        Ok(self)
    }

    pub fn nodes(&self) -> &SampleMatrix {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of observations the cache reflects.
    pub fn n_data(&self) -> usize {
        self.n_data
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn sd(&self) -> &[f64] {
        &self.sd
    }

    pub fn prior_mean(&self) -> &[f64] {
        &self.prior_mean
    }

    pub fn prior_var(&self) -> &[f64] {
        &self.prior_var
    }

    /// `diag(V^T V)`.
    pub fn v_sq(&self) -> &[f64] {
        &self.v_sq
    }

    /// `K_XU` transposed, node-major (`N x n`).
    pub fn k_ux(&self) -> DMatrixView<'_, f64> {
        DMatrixView::from_slice(&self.k_ux, self.nodes.nrows(), self.n_data)
    }

    /// `V = L \ K_XU` transposed, node-major (`N x n`).
    pub fn v_t(&self) -> DMatrixView<'_, f64> {
        DMatrixView::from_slice(&self.v_t, self.nodes.nrows(), self.n_data)
    }
}
