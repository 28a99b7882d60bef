//! The adaptive loop on the one-dimensional sine problem, printing the
//! credible interval as it tightens.
//!
//!     cargo run --release --example adaptive_sine [seed]

use pof_gp::adaptive::{run_problem, AdaptiveConfig};
use pof_gp::problems::sine_problem;

fn main() -> pof_gp::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let config = AdaptiveConfig {
        seed,
        nodes: 1 << 14,
        n0: Some(8),
        budget: 64,
        ..AdaptiveConfig::default()
    };
    let result = run_problem(&sine_problem(), &config)?;
    println!(
        "{:>4} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "n", "P_hat", "lower", "upper", "gamma", "tries"
    );
    for h in &result.history {
        println!(
            "{:>4} {:>8.4} {:>8.4} {:>8.4} {:>8.4} {:>8}",
            h.n, h.p_hat, h.lower, h.upper, h.gamma_hat, h.tries
        );
    }
    let lengthscale = result.model.prior().kernel.lengthscale;
    println!(
        "stop: {}, fitted lengthscale {lengthscale:.3}, truth 0.5",
        result.stop_reason
    );
    Ok(())
}
