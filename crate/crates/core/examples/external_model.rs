//! Drives the adaptive loop through an external model: a bundled HTTP
//! server answering `{"input": [...]}` with `{"output": ...}`. Any server
//! speaking that protocol, or a subprocess speaking the line-delimited one,
//! can stand in for it.
//!
//!     cargo run --release --example external_model

use std::time::Duration;

use pof_gp::adaptive::{run, AdaptiveConfig};
use pof_gp::extsim::server::{FixtureModel, HttpFixture};
use pof_gp::extsim::{ModelClient, ModelEndpoint};

fn main() -> pof_gp::Result<()> {
    let server = HttpFixture::start(
        FixtureModel::by_name("ishigami")?,
        "127.0.0.1:0",
        Duration::from_millis(5),
        8,
    )?;
    println!("model server at {}", server.url());

    let endpoint = ModelEndpoint::http(server.url(), 3)
        .with_max_concurrency(4)
        .with_timeout(10.0);
    let mut client = ModelClient::connect(endpoint)?;
    let config = AdaptiveConfig {
        seed: 3,
        budget: 192,
        ..AdaptiveConfig::default()
    };
    let result = run(3, &config, &mut client)?;
    let e = result.estimate;
    println!(
        "P_hat {:.4} in [{:.4}, {:.4}] after {} evaluations ({} requests served), reference 0.16",
        e.p_hat,
        e.lower,
        e.upper,
        e.n,
        server.requests()
    );
    Ok(())
}
