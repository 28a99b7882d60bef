//! Node generation on the open unit cube.
//!
//! Two families of point sets are provided: IID uniforms from a counter-based
//! stream and an extensible randomized digital net. Both are fully determined
//! by `(kind, seed, dimension)` and the point index, so disjoint index ranges
//! can be produced independently and concatenated.

mod normal;
mod sobol;

use nalgebra::DMatrix;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use normal::{inverse_normal_cdf, normal_cdf, normal_pdf};
pub use sobol::MAX_DIMENSION;

/// An `N x d` row-major block of points strictly inside `(0, 1)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: Vec<f64>,
    rows: usize,
    dim: usize,
}

impl SampleMatrix {
    pub fn new(data: Vec<f64>, rows: usize, dim: usize) -> Result<Self> {
        if rows == 0 || dim == 0 {
            return Err(Error::invalid(
                "sample matrix needs at least one row and column",
            ));
        }
        if data.len() != rows * dim {
            return Err(Error::invalid(format!(
                "expected {} entries for a {rows}x{dim} block, got {}",
                rows * dim,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|&&u| !(u > 0.0 && u < 1.0)) {
            return Err(Error::invalid(format!(
                "coordinate {bad} is outside the open unit interval"
            )));
        }
        Ok(SampleMatrix { data, rows, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != dim) {
            return Err(Error::invalid("rows have differing lengths"));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        SampleMatrix::new(data, rows.len(), dim)
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Rows `start..end` as a new matrix.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.rows {
            return Err(Error::invalid(format!(
                "row range {start}..{end} invalid for {} rows",
                self.rows
            )));
        }
        Ok(SampleMatrix {
            data: self.data[start * self.dim..end * self.dim].to_vec(),
            rows: end - start,
            dim: self.dim,
        })
    }

    /// Stacks `other` below `self`.
    pub fn concat(&self, other: &SampleMatrix) -> Result<Self> {
        if other.dim != self.dim {
            return Err(Error::invalid(format!(
                "cannot stack {}-d rows under {}-d rows",
                other.dim, self.dim
            )));
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(SampleMatrix {
            data,
            rows: self.rows + other.rows,
            dim: self.dim,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    LowDiscrepancy,
    Iid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SequenceConfig {
    pub kind: SequenceKind,
    pub seed: u64,
    pub dimension: usize,
}

impl SequenceConfig {
    pub fn low_discrepancy(seed: u64, dimension: usize) -> Self {
        SequenceConfig {
            kind: SequenceKind::LowDiscrepancy,
            seed,
            dimension,
        }
    }

    pub fn iid(seed: u64, dimension: usize) -> Self {
        SequenceConfig {
            kind: SequenceKind::Iid,
            seed,
            dimension,
        }
    }
}

/// SplitMix64 finalizer; used to derive independent sub-seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for an independent stream identified by `tag` under a master seed.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix64(mix64(seed) ^ mix64(tag.wrapping_mul(0xA24B_AED4_963E_E407)))
}

/// Maps 64 random bits to the midpoint of a 2^-53 cell, so the result is
/// never 0 or 1.
#[inline]
pub(crate) fn bits_to_open_unit(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Counter-based uniform stream: value `k` depends only on `(seed, k)`.
#[derive(Debug, Clone)]
pub(crate) struct CounterUniforms {
    rng: ChaCha8Rng,
}

impl CounterUniforms {
    pub(crate) fn new(seed: u64) -> Self {
        CounterUniforms {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Fills `out` with uniforms number `first..first + out.len()`.
    pub(crate) fn fill(&mut self, first: u64, out: &mut [f64]) {
        self.rng.set_word_pos(u128::from(first) * 2);
        for o in out {
            *o = bits_to_open_unit(self.rng.next_u64());
        }
    }
}

fn check_config(config: &SequenceConfig, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("node count must be at least 1"));
    }
    if config.dimension == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    if config.kind == SequenceKind::LowDiscrepancy && config.dimension > MAX_DIMENSION {
        return Err(Error::invalid(format!(
            "low-discrepancy nodes support at most {MAX_DIMENSION} dimensions, got {}",
            config.dimension
        )));
    }
    Ok(())
}

/// First `n` points of the stream described by `config`.
pub fn generate_nodes(config: &SequenceConfig, n: usize) -> Result<SampleMatrix> {
    generate_nodes_range(config, 0, n)
}

/// Points `start..start + n` of the stream described by `config`.
///
/// Concatenating consecutive ranges reproduces a single [`generate_nodes`]
/// call exactly.
pub fn generate_nodes_range(config: &SequenceConfig, start: u64, n: usize) -> Result<SampleMatrix> {
    check_config(config, n)?;
    let d = config.dimension;
    let mut data = vec![0.0; n * d];
    match config.kind {
        SequenceKind::Iid => {
            CounterUniforms::new(config.seed).fill(start * d as u64, &mut data);
        }
        SequenceKind::LowDiscrepancy => {
            let end = start
                .checked_add(n as u64)
                .filter(|&e| e <= 1u64 << 32)
                .ok_or_else(|| Error::invalid("low-discrepancy index range exceeds 2^32"))?;
            debug_assert!(end > start);
            let net = sobol::DigitalNet::new(d);
            let mut shift_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, 0x5348_4946));
            let shifts: Vec<u64> = (0..d).map(|_| shift_rng.next_u64()).collect();
            let mut bits = vec![0u32; n * d];
            net.fill_bits(start as u32, n, &mut bits);
            for (row_bits, row) in bits.chunks_exact(d).zip(data.chunks_exact_mut(d)) {
                for ((&b, &s), u) in row_bits.iter().zip(&shifts).zip(row.iter_mut()) {
                    *u = bits_to_open_unit((u64::from(b) << 32) ^ s);
                }
            }
        }
    }
    SampleMatrix::new(data, n, d)
}

/// Maps unit-cube nodes to Gaussian points `a + A * Phi^{-1}(u)`, one row per node.
///
/// `factor` must have as many columns as the nodes have coordinates; the
/// output has `factor.nrows()` columns.
pub fn transform_gaussian(
    nodes: &SampleMatrix,
    mean: &[f64],
    factor: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if factor.ncols() != nodes.dim() {
        return Err(Error::invalid(format!(
            "factor has {} columns but nodes are {}-dimensional",
            factor.ncols(),
            nodes.dim()
        )));
    }
    if mean.len() != factor.nrows() {
        return Err(Error::invalid(format!(
            "mean has length {} but factor has {} rows",
            mean.len(),
            factor.nrows()
        )));
    }
    let m = factor.nrows();
    let mut out = DMatrix::zeros(nodes.nrows(), m);
    let mut row_out = vec![0.0; m];
    for (i, row) in nodes.rows().enumerate() {
        gaussian_point(row, mean, factor, &mut row_out)?;
        for (r, v) in row_out.iter().enumerate() {
            out[(i, r)] = *v;
        }
    }
    Ok(out)
}

/// Single-point form of [`transform_gaussian`]; dimensions are not checked
/// beyond what indexing enforces.
pub fn gaussian_point(
    u: &[f64],
    mean: &[f64],
    factor: &DMatrix<f64>,
    out: &mut [f64],
) -> Result<()> {
    let z = u
        .iter()
        .map(|&x| inverse_normal_cdf(x))
        .collect::<Result<Vec<_>>>()?;
    for (r, o) in out.iter_mut().enumerate() {
        *o = mean[r]
            + z.iter()
                .enumerate()
                .map(|(c, zc)| factor[(r, c)] * zc)
                .sum::<f64>();
    }
    Ok(())
}
