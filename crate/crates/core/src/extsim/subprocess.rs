use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Serialize)]
struct Request<'a> {
    id: u64,
    input: &'a [f64],
}

#[derive(Deserialize)]
struct Response {
    id: u64,
    output: f64,
}

struct Worker {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
}

impl Worker {
    fn spawn(program: &str, args: &[String]) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Process(format!("cannot start {program:?}: {e}")))?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Worker {
            child,
            stdin,
            lines,
        })
    }

    fn exit_error(&mut self, index: usize) -> Error {
        let deadline = Instant::now() + Duration::from_secs(2);
        let status = loop {
            match self.child.try_wait() {
                Ok(Some(status)) => break Some(status),
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(5)),
                _ => break None,
            }
        };
        match status {
            Some(s) => Error::Process(format!(
                "model process exited ({s}) before answering point {index}"
            )),
            None => Error::Process(format!(
                "model process closed its output before answering point {index}"
            )),
        }
    }

    fn call(&mut self, id: u64, index: usize, point: &[f64], timeout: Duration) -> Result<f64> {
        let mut message =
            serde_json::to_vec(&Request { id, input: point }).expect("finite request");
        message.push(b'\n');
        let stdin = self
            .stdin
            .as_mut()
            .expect("stdin open while the worker is alive");
        if stdin
            .write_all(&message)
            .and_then(|_| stdin.flush())
            .is_err()
        {
            return Err(self.exit_error(index));
        }
        let line = match self.lines.recv_timeout(timeout) {
            Ok(line) => line?,
            Err(RecvTimeoutError::Timeout) => {
                return Err(Error::Timeout {
                    index,
                    seconds: timeout.as_secs_f64(),
                })
            }
            Err(RecvTimeoutError::Disconnected) => return Err(self.exit_error(index)),
        };
        let response: Response = serde_json::from_str(&line).map_err(|e| {
            Error::protocol(format!("malformed response to point {index}: {e}"), &line)
        })?;
        if response.id != id {
            return Err(Error::protocol(
                format!("response id {} does not match request id {id}", response.id),
                &line,
            ));
        }
        Ok(response.output)
    }
}

impl Drop for Worker {
    fn drop(&mut self) {
        // Closing stdin asks the model to exit; stragglers are killed.
        drop(self.stdin.take());
        let deadline = Instant::now() + Duration::from_millis(200);
        while Instant::now() < deadline {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            thread::sleep(Duration::from_millis(2));
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub(super) struct Pool {
    program: String,
    args: Vec<String>,
    timeout: Duration,
    idle: Mutex<Vec<Worker>>,
    next_id: AtomicU64,
}

impl Pool {
    pub(super) fn new(command: &str, timeout: Duration) -> Result<Self> {
        let mut words = shell_words::split(command)
            .map_err(|e| Error::invalid(format!("cannot parse command line {command:?}: {e}")))?;
        if words.is_empty() {
            return Err(Error::invalid("empty command line"));
        }
        let program = words.remove(0);
        Ok(Pool {
            program,
            args: words,
            timeout,
            idle: Mutex::new(Vec::new()),
            next_id: AtomicU64::new(0),
        })
    }

    pub(super) fn call(&self, index: usize, point: &[f64]) -> Result<f64> {
        let idle = self.idle.lock().expect("pool lock").pop();
        let mut worker = match idle {
            Some(w) => w,
            None => Worker::spawn(&self.program, &self.args)?,
        };
        let id = self.next_id.fetch_add(1, Ordering::SeqCst);
        let value = worker.call(id, index, point, self.timeout)?;
        self.idle.lock().expect("pool lock").push(worker);
        Ok(value)
    }
}
