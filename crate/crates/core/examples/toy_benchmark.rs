//! All five bundled problems at their default budgets over a few seeds,
//! reporting how often the final interval contains the reference value.
//!
//!     cargo run --release --example toy_benchmark [seeds]

use pof_gp::adaptive::AdaptiveConfig;
use pof_gp::cli::benchmark_rows;
use pof_gp::problems::all_problems;

fn main() {
    let seeds: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(3);
    let seeds: Vec<u64> = (1..=seeds).collect();
    let rows = benchmark_rows(&all_problems(), &seeds, &AdaptiveConfig::default(), false);
    println!(
        "{:<12} {:>7} {:>9} {:>9} {:>9} {:>9} {:>5}",
        "problem", "truth", "P_hat", "lower", "upper", "inside", "n"
    );
    for r in &rows {
        let f = |v: Option<f64>| v.map_or("-".into(), |v| format!("{v:.4}"));
        println!(
            "{:<12} {:>7} {:>9} {:>9} {:>9} {:>9} {:>5}",
            r.problem,
            r.truth,
            f(r.p_hat),
            f(r.lower),
            f(r.upper),
            r.contained.map_or("error".into(), |c| c.to_string()),
            r.evaluations
        );
    }
    let inside = rows.iter().filter(|r| r.contained == Some(true)).count();
    println!("{inside}/{} intervals contain the truth", rows.len());
}
