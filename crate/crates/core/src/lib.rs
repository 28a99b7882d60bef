//! Probability-of-failure estimation for expensive simulations.
//!
//! A Gaussian-process surrogate of the limit state `g: (0,1)^d -> R` (failure
//! where `g >= 0`) is refined in batches drawn from its misclassification
//! rate, and the failure probability is reported with a credible interval
//! computed over a fixed randomized quasi-Monte Carlo node set.
//!
//! ```no_run
//! use pof_gp::adaptive::{run_problem, AdaptiveConfig};
//! use pof_gp::problems::sine_problem;
//!
//! let result = run_problem(&sine_problem(), &AdaptiveConfig { budget: 64, ..Default::default() }).unwrap();
//! println!("{:.4} in [{:.4}, {:.4}]", result.estimate.p_hat, result.estimate.lower, result.estimate.upper);
//! ```

pub mod adaptive;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod extsim;
pub mod gp;
pub mod problems;
pub mod qmc;
pub mod sampler;

pub use error::{Error, Result};
