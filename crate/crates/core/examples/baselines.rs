//! Crude and quasi-Monte Carlo estimates at growing sample sizes, for
//! comparison with the handful of evaluations the surrogate needs.
//!
//!     cargo run --release --example baselines [problem]

use pof_gp::cli::baseline_rows;
use pof_gp::problems::by_name;

fn main() -> pof_gp::Result<()> {
    let name = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "four_branch".into());
    let problem = by_name(&name)?;
    println!("{name}, reference {}", problem.true_p.unwrap_or(f64::NAN));
    println!(
        "{:>8} {:<4} {:>10} {:>10} {:>10}",
        "n", "", "estimate", "std err", "abs err"
    );
    for k in [8, 10, 12, 14, 16] {
        for r in baseline_rows(&problem, 1 << k, 0)? {
            println!(
                "{:>8} {:<4} {:>10.6} {:>10.2e} {:>10.2e}",
                r.evaluations, r.method, r.estimate, r.std_error, r.abs_error
            );
        }
    }
    Ok(())
}
