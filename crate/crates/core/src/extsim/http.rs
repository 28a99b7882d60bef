use std::time::{Duration, Instant};

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Deserialize)]
struct Response {
    output: f64,
}

pub(super) struct Client {
    agent: ureq::Agent,
    url: String,
    timeout: Duration,
}

impl Client {
    pub(super) fn new(url: &str, timeout: Duration) -> Self {
        Client {
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
            url: url.to_string(),
            timeout,
        }
    }

    pub(super) fn call(&self, index: usize, point: &[f64]) -> Result<f64> {
        let body = serde_json::json!({ "input": point }).to_string();
        let start = Instant::now();
        let response = match self
            .agent
            .post(&self.url)
            .set("Content-Type", "application/json")
            .send_string(&body)
        {
            Ok(r) => r,
            Err(ureq::Error::Status(code, r)) => {
                let text = r.into_string().unwrap_or_default();
                return Err(Error::protocol(
                    format!("HTTP status {code} for point {index}"),
                    &text,
                ));
            }
            Err(ureq::Error::Transport(t)) => {
                if t.kind() == ureq::ErrorKind::Io && start.elapsed() >= self.timeout.mul_f64(0.95)
                {
                    return Err(Error::Timeout {
                        index,
                        seconds: self.timeout.as_secs_f64(),
                    });
                }
                return Err(Error::Transport(format!("{}: {t}", self.url)));
            }
        };
        if response.status() != 200 {
            let code = response.status();
            let text = response.into_string().unwrap_or_default();
            return Err(Error::protocol(
                format!("HTTP status {code} for point {index}"),
                &text,
            ));
        }
        let text = response.into_string()?;
        let parsed: Response = serde_json::from_str(&text).map_err(|e| {
            Error::protocol(format!("malformed response to point {index}: {e}"), &text)
        })?;
        Ok(parsed.output)
    }
}
