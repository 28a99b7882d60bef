//! Recomputes the failure thresholds stored in `fixtures/problems.toml` and
//! checks each against an independent brute-force estimate.
//!
//!     cargo run --release --example calibrate_fixtures

use pof_gp::problems::{brute_force_pof, calibrate_threshold, form_by_name, manifest, ProblemSpec};

fn main() -> pof_gp::Result<()> {
    println!(
        "{:<12} {:>22} {:>22} {:>12} {:>10}",
        "problem", "stored xi", "recomputed xi", "brute", "se"
    );
    for entry in &manifest().problems {
        let (dim, form) = form_by_name(&entry.form).expect("known form");
        let recomputed = match (
            entry.calibration_seed,
            entry.calibration_nodes,
            entry.true_p,
        ) {
            (Some(seed), Some(n), Some(p)) => calibrate_threshold(form, dim, p, n, seed)?,
            _ => entry.xi,
        };
        let mut fixed = entry.clone();
        fixed.xi = recomputed;
        let spec = ProblemSpec::from_fixture(&fixed)?;
        let (p, se) = brute_force_pof(&spec, 1 << 20, 99)?;
        println!(
            "{:<12} {:>22.17} {:>22.17} {:>12.6} {:>10.2e}",
            entry.name, entry.xi, recomputed, p, se
        );
    }
    Ok(())
}
