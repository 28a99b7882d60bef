//! Rejection sampling from an unnormalized density, then batch proposals
//! from a fitted surrogate's misclassification density.
//!
//!     cargo run --release --example rejection_sampling

use pof_gp::gp::{GpModel, KernelSpec, PriorSpec, Smoothness};
use pof_gp::qmc::SampleMatrix;
use pof_gp::sampler::{propose_batch, rejection_sample, BatchProposal};

fn main() -> pof_gp::Result<()> {
    let rho = |u: &[f64]| u[0] * u[0];
    let r = rejection_sample(&rho, 10_000, 1, 1, u64::MAX)?;
    let mean = r.accepted.as_slice().iter().sum::<f64>() / 10_000.0;
    println!(
        "rho(u) = u^2: sample mean {mean:.4} (exact 0.75), {:.2} tries per draw (exact 3)",
        r.tries as f64 / 1e4
    );

    let x = SampleMatrix::new(vec![0.1, 0.3, 0.5, 0.7, 0.9], 5, 1)?;
    let y = vec![-1.0, -0.2, 0.4, 0.1, -0.8];
    let prior = PriorSpec::new(KernelSpec::new(Smoothness::ThreeHalves, 0.2, 1.0)?);
    let model = GpModel::fit(prior, x, y)?;
    match propose_batch(&model, 8, 2, 1_000_000)? {
        BatchProposal::Points { points, tries } => {
            let mut u: Vec<f64> = points.into_vec();
            u.sort_by(f64::total_cmp);
            println!("batch near the sign changes after {tries} tries:");
            for v in u {
                println!("  {v:.4}");
            }
        }
        BatchProposal::CertaintyReached { tries, .. } => {
            println!("posterior is certain after {tries} tries")
        }
    }
    Ok(())
}
