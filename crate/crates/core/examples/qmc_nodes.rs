//! Randomized Sobol' nodes versus IID points on a smooth integral, and the
//! map from the unit cube to a correlated Gaussian.
//!
//!     cargo run --release --example qmc_nodes

use nalgebra::DMatrix;
use pof_gp::qmc::{generate_nodes, transform_gaussian, SequenceConfig};

fn main() -> pof_gp::Result<()> {
    // integral of u1 * u2 * u3 over the cube is 1/8
    let f = |u: &[f64]| u.iter().product::<f64>();
    println!("{:>8} {:>12} {:>12}", "n", "iid err", "sobol err");
    for k in [8, 10, 12, 14, 16] {
        let n = 1 << k;
        let err = |cfg: SequenceConfig| -> pof_gp::Result<f64> {
            let nodes = generate_nodes(&cfg, n)?;
            Ok((nodes.rows().map(f).sum::<f64>() / n as f64 - 0.125).abs())
        };
        println!(
            "{n:>8} {:>12.3e} {:>12.3e}",
            err(SequenceConfig::iid(1, 3))?,
            err(SequenceConfig::low_discrepancy(1, 3))?
        );
    }

    let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.8, 0.8, 1.0]);
    let factor = sigma.cholesky().expect("positive definite").l();
    let nodes = generate_nodes(&SequenceConfig::low_discrepancy(2, 2), 1 << 14)?;
    let v = transform_gaussian(&nodes, &[0.0, 0.0], &factor)?;
    let n = v.nrows() as f64;
    let cov = (0..v.nrows()).map(|i| v[(i, 0)] * v[(i, 1)]).sum::<f64>() / n;
    println!("sample covariance of the transformed nodes: {cov:.4} (target 0.8)");
    Ok(())
}
