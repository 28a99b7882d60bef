//! The two credible intervals for a fixed posterior: the predicted failure
//! region with half-width E[ERR]/alpha, and the posterior mean of the
//! failure probability with half-width 2 E[p(1-p)]/alpha.
//!
//!     cargo run --release --example credible_interval

use pof_gp::estimators::{
    credible_interval, err_field, estimate_gamma_check, estimate_gamma_hat, estimate_p_check,
    estimate_p_hat,
};
use pof_gp::gp::{self, GpModel, KernelSpec, PriorSpec, Smoothness};
use pof_gp::problems::{brute_force_pof, sine_problem};
use pof_gp::qmc::{generate_nodes, SequenceConfig};

fn main() -> pof_gp::Result<()> {
    let problem = sine_problem();
    let nodes = generate_nodes(&SequenceConfig::low_discrepancy(3, 1), 1 << 14)?;
    let prior = PriorSpec::new(KernelSpec::new(Smoothness::ThreeHalves, 0.1, 1.0)?);
    let (truth, _) = brute_force_pof(&problem, 1 << 16, 1)?;
    println!("truth {truth:.4}");
    println!(
        "{:>4} {:>8} {:>21} {:>8} {:>21}",
        "n", "P_hat", "interval", "P_check", "interval"
    );
    for n in [4, 8, 16, 32] {
        let x = generate_nodes(&SequenceConfig::low_discrepancy(7, 1), n)?;
        let y: Vec<f64> = x.rows().map(|u| problem.evaluate(u)).collect();
        let cache = gp::predict(&GpModel::fit(prior, x, y)?, &nodes)?;
        let field = err_field(&cache);
        let alpha = 0.05;
        let p_hat = estimate_p_hat(&cache);
        let p_check = estimate_p_check(&field);
        let (a, b) = credible_interval(p_hat, estimate_gamma_hat(&field, alpha)?);
        let (c, d) = credible_interval(p_check, estimate_gamma_check(&field, alpha)?);
        println!("{n:>4} {p_hat:>8.4} [{a:>8.4}, {b:>8.4}] {p_check:>8.4} [{c:>8.4}, {d:>8.4}]");
    }
    Ok(())
}
