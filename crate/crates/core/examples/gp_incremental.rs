//! Fits a Gaussian process, adds a batch by block-Cholesky update, and
//! compares the updated prediction cache with a full refit.
//!
//!     cargo run --release --example gp_incremental

use std::time::Instant;

use pof_gp::gp::{self, GpModel, KernelSpec, PriorSpec, Smoothness};
use pof_gp::qmc::{generate_nodes, SequenceConfig};

fn main() -> pof_gp::Result<()> {
    let f = |u: &[f64]| (6.0 * u[0]).sin() * (4.0 * u[1]).cos();
    let prior = PriorSpec::new(KernelSpec::new(Smoothness::ThreeHalves, 0.2, 1.0)?);
    let design = generate_nodes(&SequenceConfig::low_discrepancy(1, 2), 96)?;
    let (x, x_new) = (design.slice_rows(0, 64)?, design.slice_rows(64, 96)?);
    let y: Vec<f64> = x.rows().map(f).collect();
    let y_new: Vec<f64> = x_new.rows().map(f).collect();
    let nodes = generate_nodes(&SequenceConfig::low_discrepancy(2, 2), 1 << 15)?;

    let model = GpModel::fit(prior, x.clone(), y.clone())?;
    let cache = gp::predict(&model, &nodes)?;

    let t = Instant::now();
    let updated = model.update(&x_new, &y_new)?;
    let cache = gp::update_predictions(&model, cache, &updated)?;
    let incremental = t.elapsed();

    let t = Instant::now();
    let mut all_y = y;
    all_y.extend_from_slice(&y_new);
    let full = GpModel::fit(prior, x.concat(&x_new)?, all_y)?;
    let fresh = gp::predict(&full, &nodes)?;
    let refit = t.elapsed();

    let gap = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    };
    println!(
        "n = {} -> {}, {} prediction nodes",
        model.n(),
        updated.n(),
        nodes.nrows()
    );
    println!(
        "max |mean difference| {:.2e}",
        gap(cache.mean(), fresh.mean())
    );
    println!("max |sd difference|   {:.2e}", gap(cache.sd(), fresh.sd()));
    println!("update {incremental:?}, refit {refit:?}");
    Ok(())
}
