//! Batch evaluation of simulations that run outside this process.
//!
//! Two transports share one message shape, a point in and a scalar out:
//!
//! * `subprocess`: newline-delimited JSON over the child's stdin/stdout.
//!   Request `{"id": 7, "input": [0.1, 0.2]}`, response `{"id": 7, "output": 1.5}`.
//!   Each worker process handles one request at a time; up to
//!   `max_concurrency` workers are started and kept alive between batches.
//! * `http`: `POST` to the address with body `{"input": [0.1, 0.2]}`; a
//!   `200` response carries `{"output": 1.5}`.
//!
//! [`server`] implements both ends for bundled reference models.

mod http;
pub mod server;
mod subprocess;

use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::adaptive::BatchEvaluator;
use crate::error::{Error, Result};
use crate::qmc::SampleMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transport {
    Subprocess,
    Http,
}

/// Where and how to reach an external model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelEndpoint {
    pub transport: Transport,
    /// Command line (shell-style quoting) or URL.
    pub address: String,
    pub input_dim: usize,
    /// Per-point timeout in seconds.
    #[serde(default = "default_timeout")]
    pub timeout: f64,
    #[serde(default = "default_concurrency")]
    pub max_concurrency: usize,
    /// Extra attempts per point after a failure. Each retry is logged.
    #[serde(default)]
    pub retries: u32,
}

fn default_timeout() -> f64 {
    60.0
}

fn default_concurrency() -> usize {
    1
}

impl ModelEndpoint {
    pub fn subprocess(command: impl Into<String>, input_dim: usize) -> Self {
        ModelEndpoint {
            transport: Transport::Subprocess,
            address: command.into(),
            input_dim,
            timeout: default_timeout(),
            max_concurrency: default_concurrency(),
            retries: 0,
        }
    }

    pub fn http(url: impl Into<String>, input_dim: usize) -> Self {
        ModelEndpoint {
            transport: Transport::Http,
            ..ModelEndpoint::subprocess(url, input_dim)
        }
    }

    pub fn with_timeout(mut self, seconds: f64) -> Self {
        self.timeout = seconds;
        self
    }

    pub fn with_max_concurrency(mut self, max_concurrency: usize) -> Self {
        self.max_concurrency = max_concurrency;
        self
    }

    pub fn with_retries(mut self, retries: u32) -> Self {
        self.retries = retries;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 {
            return Err(Error::invalid("endpoint input_dim must be at least 1"));
        }
        if self.max_concurrency == 0 {
            return Err(Error::invalid(
                "endpoint max_concurrency must be at least 1",
            ));
        }
        if !(self.timeout > 0.0 && self.timeout.is_finite()) {
            return Err(Error::invalid(format!(
                "endpoint timeout must be positive, got {}",
                self.timeout
            )));
        }
        if self.address.trim().is_empty() {
            return Err(Error::invalid("endpoint address is empty"));
        }
        Ok(())
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let endpoint: ModelEndpoint =
            toml::from_str(text).map_err(|e| Error::invalid(format!("endpoint config: {e}")))?;
        endpoint.validate()?;
        Ok(endpoint)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::invalid(format!(
                "cannot read endpoint config {}: {e}",
                path.display()
            ))
        })?;
        Self::from_toml_str(&text)
    }

    fn timeout_duration(&self) -> Duration {
        Duration::from_secs_f64(self.timeout)
    }
}

enum Backend {
    Subprocess(subprocess::Pool),
    Http(http::Client),
}

/// A connection to an endpoint, reusable across batches.
///
/// Subprocess workers are started on first use and kept until the client
/// is dropped; a worker that fails or times out is discarded.
pub struct ModelClient {
    endpoint: ModelEndpoint,
    backend: Backend,
}

impl ModelClient {
    pub fn connect(endpoint: ModelEndpoint) -> Result<Self> {
        endpoint.validate()?;
        let backend = match endpoint.transport {
            Transport::Subprocess => Backend::Subprocess(subprocess::Pool::new(
                &endpoint.address,
                endpoint.timeout_duration(),
            )?),
            Transport::Http => Backend::Http(http::Client::new(
                &endpoint.address,
                endpoint.timeout_duration(),
            )),
        };
        Ok(ModelClient { endpoint, backend })
    }

    pub fn endpoint(&self) -> &ModelEndpoint {
        &self.endpoint
    }

    /// One output per row, in row order. The first failing point (after
    /// retries) aborts the batch; points not yet dispatched are skipped.
    pub fn evaluate_batch(&self, points: &SampleMatrix) -> Result<Vec<f64>> {
        if points.dim() != self.endpoint.input_dim {
            return Err(Error::invalid(format!(
                "points are {}-d but the endpoint expects {}-d inputs",
                points.dim(),
                self.endpoint.input_dim
            )));
        }
        let call = |index: usize, point: &[f64]| match &self.backend {
            Backend::Subprocess(pool) => pool.call(index, point),
            Backend::Http(client) => client.call(index, point),
        };
        dispatch(
            points,
            self.endpoint.max_concurrency,
            self.endpoint.retries,
            call,
        )
    }
}

impl BatchEvaluator for ModelClient {
    fn evaluate_batch(&mut self, points: &SampleMatrix) -> Result<Vec<f64>> {
        ModelClient::evaluate_batch(self, points)
    }
}

/// Connects, evaluates one batch, and disconnects.
pub fn evaluate_batch(endpoint: &ModelEndpoint, points: &SampleMatrix) -> Result<Vec<f64>> {
    ModelClient::connect(endpoint.clone())?.evaluate_batch(points)
}

fn dispatch<F>(points: &SampleMatrix, concurrency: usize, retries: u32, call: F) -> Result<Vec<f64>>
where
    F: Fn(usize, &[f64]) -> Result<f64> + Sync,
{
    let b = points.nrows();
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let results: Mutex<Vec<(usize, Result<f64>)>> = Mutex::new(Vec::with_capacity(b));

    thread::scope(|s| {
        for _ in 0..concurrency.min(b) {
            s.spawn(|| {
                while !abort.load(Ordering::SeqCst) {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= b {
                        break;
                    }
                    let mut attempt = 0;
                    let r = loop {
                        match call(i, points.row(i)) {
                            Err(e) if attempt < retries => {
                                attempt += 1;
                                log::warn!("point {i}: {e}; retry {attempt} of {retries}");
                            }
                            r => break r,
                        }
                    };
                    if r.is_err() {
                        abort.store(true, Ordering::SeqCst);
                    }
                    results
                        .lock()
                        .expect("no worker panics while holding the lock")
                        .push((i, r));
                }
            });
        }
    });

    let mut results = results.into_inner().expect("workers finished");
    results.sort_by_key(|(i, _)| *i);
    let mut out = Vec::with_capacity(b);
    for (_, r) in results {
        out.push(r?);
    }
    debug_assert_eq!(out.len(), b);
    Ok(out)
}
