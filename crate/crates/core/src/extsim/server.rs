//! Reference model servers for both transports.
//!
//! These back the `serve` subcommand and the end-to-end tests. A model is
//! either a bundled problem (the same evaluator the in-process runs use) or
//! `echo`, which returns the first input coordinate.

use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::{by_name, ProblemSpec};

#[derive(Debug, Clone)]
pub enum FixtureModel {
    Problem(ProblemSpec),
    Echo,
}

impl FixtureModel {
    /// `echo` or the name of a bundled problem.
    pub fn by_name(name: &str) -> Result<Self> {
        if name == "echo" {
            Ok(FixtureModel::Echo)
        } else {
            Ok(FixtureModel::Problem(by_name(name)?))
        }
    }

    pub fn dimension(&self) -> Option<usize> {
        match self {
            FixtureModel::Problem(p) => Some(p.dimension),
            FixtureModel::Echo => None,
        }
    }

    pub fn evaluate(&self, input: &[f64]) -> std::result::Result<f64, String> {
        if input.is_empty() {
            return Err("input is empty".into());
        }
        match self {
            FixtureModel::Echo => Ok(input[0]),
            FixtureModel::Problem(p) => {
                if input.len() != p.dimension {
                    return Err(format!(
                        "expected {} inputs, got {}",
                        p.dimension,
                        input.len()
                    ));
                }
                if let Some(u) = input.iter().find(|u| !(**u > 0.0 && **u < 1.0)) {
                    return Err(format!("input {u} outside the open unit interval"));
                }
                Ok(p.evaluate(input))
            }
        }
    }
}

#[derive(Deserialize)]
struct StdioRequest {
    id: u64,
    input: Vec<f64>,
}

#[derive(Serialize)]
struct StdioResponse {
    id: u64,
    output: f64,
}

#[derive(Serialize)]
struct StdioError<'a> {
    id: Option<u64>,
    error: &'a str,
}

/// Answers newline-delimited requests until `input` ends. A request the
/// model cannot answer gets an `{"id", "error"}` line, which clients treat
/// as a protocol error.
pub fn serve_stdio<R: BufRead, W: Write>(
    model: &FixtureModel,
    delay: Duration,
    input: R,
    mut output: W,
) -> Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = match serde_json::from_str::<StdioRequest>(&line) {
            Ok(req) => {
                thread::sleep(delay);
                match model.evaluate(&req.input) {
                    Ok(output) => serde_json::to_string(&StdioResponse { id: req.id, output }),
                    Err(e) => serde_json::to_string(&StdioError {
                        id: Some(req.id),
                        error: &e,
                    }),
                }
            }
            Err(e) => serde_json::to_string(&StdioError {
                id: None,
                error: &e.to_string(),
            }),
        }
        .expect("serializable reply");
        writeln!(output, "{reply}")?;
        output.flush()?;
    }
    Ok(())
}

#[derive(Deserialize)]
struct HttpRequest {
    input: Vec<f64>,
}

/// A multi-threaded HTTP model server, stopped on drop.
pub struct HttpFixture {
    server: Arc<tiny_http::Server>,
    addr: SocketAddr,
    workers: Vec<JoinHandle<()>>,
    requests: Arc<AtomicUsize>,
}

impl HttpFixture {
    /// Binds to `bind` (use port 0 for an ephemeral port) and starts
    /// `threads` request handlers.
    pub fn start(model: FixtureModel, bind: &str, delay: Duration, threads: usize) -> Result<Self> {
        let server = tiny_http::Server::http(bind)
            .map_err(|e| Error::Transport(format!("cannot bind {bind}: {e}")))?;
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| Error::Transport("server is not bound to an IP address".into()))?;
        let server = Arc::new(server);
        let model = Arc::new(model);
        let requests = Arc::new(AtomicUsize::new(0));
        let workers = (0..threads.max(1))
            .map(|_| {
                let server = Arc::clone(&server);
                let model = Arc::clone(&model);
                let requests = Arc::clone(&requests);
                thread::spawn(move || {
                    while let Ok(request) = server.recv() {
                        requests.fetch_add(1, Ordering::SeqCst);
                        handle(&model, delay, request);
                    }
                })
            })
            .collect();
        Ok(HttpFixture {
            server,
            addr,
            workers,
            requests,
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Requests received so far.
    pub fn requests(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    pub fn url(&self) -> String {
        format!("http://{}/evaluate", self.addr)
    }

    /// Blocks until the server is stopped from elsewhere.
    pub fn join(mut self) {
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

impl Drop for HttpFixture {
    fn drop(&mut self) {
        for _ in 0..self.workers.len() {
            self.server.unblock();
        }
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

fn handle(model: &FixtureModel, delay: Duration, mut request: tiny_http::Request) {
    let json = tiny_http::Header::from_bytes(&b"Content-Type"[..], &b"application/json"[..])
        .expect("static header");
    let reply = |status: u16, body: String| {
        tiny_http::Response::from_string(body)
            .with_status_code(status)
            .with_header(json.clone())
    };
    if *request.method() != tiny_http::Method::Post {
        let _ = request.respond(reply(405, r#"{"error":"use POST"}"#.into()));
        return;
    }
    let mut body = String::new();
    if request.as_reader().read_to_string(&mut body).is_err() {
        let _ = request.respond(reply(400, r#"{"error":"unreadable body"}"#.into()));
        return;
    }
    let response = match serde_json::from_str::<HttpRequest>(&body) {
        Ok(req) => {
            thread::sleep(delay);
            match model.evaluate(&req.input) {
                Ok(output) => reply(200, serde_json::json!({ "output": output }).to_string()),
                Err(e) => reply(422, serde_json::json!({ "error": e }).to_string()),
            }
        }
        Err(e) => reply(
            400,
            serde_json::json!({ "error": e.to_string() }).to_string(),
        ),
    };
    let _ = request.respond(response);
}
