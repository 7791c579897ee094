//! Pool of out-of-process heuristic workers.
//!
//! Each worker is a child process speaking [`crate::protocol`] over its
//! stdin/stdout. The parent enforces its own deadline on every request; a
//! worker that misses it is killed and respawned.

use std::io::{self, BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use roco_core::exec::{ExecRequest, ExecResponse, HeuristicRunner};
use roco_core::heuristic::Failure;
use serde::{Deserialize, Serialize};

use crate::protocol::{Handshake, Request, Response, PROTOCOL_VERSION};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerCommand {
    pub program: String,
    #[serde(default)]
    pub args: Vec<String>,
}

impl WorkerCommand {
    pub fn new(program: impl Into<String>, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self {
            program: program.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }
}

#[derive(Debug)]
pub enum WorkerError {
    Spawn(io::Error),
    Handshake(String),
}

impl std::fmt::Display for WorkerError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WorkerError::Spawn(e) => write!(f, "cannot start worker: {e}"),
            WorkerError::Handshake(m) => write!(f, "worker handshake failed: {m}"),
        }
    }
}

impl std::error::Error for WorkerError {}

const HANDSHAKE_TIMEOUT: Duration = Duration::from_secs(30);

/// Parent-side deadline for a request with the given worker timeout.
pub fn parent_deadline(timeout_s: f64) -> Duration {
    Duration::from_secs_f64(timeout_s + (0.25 * timeout_s).max(0.25))
}

struct Worker {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<io::Result<String>>,
}

impl Worker {
    fn spawn(cmd: &WorkerCommand) -> Result<Self, WorkerError> {
        let mut child = Command::new(&cmd.program)
            .args(&cmd.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(WorkerError::Spawn)?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let end = line.is_err();
                if tx.send(line).is_err() || end {
                    break;
                }
            }
        });
        let mut w = Worker { child, stdin, lines: rx };
        let line = match w.lines.recv_timeout(HANDSHAKE_TIMEOUT) {
            Ok(Ok(l)) => l,
            Ok(Err(e)) => return Err(WorkerError::Handshake(e.to_string())),
            Err(_) => {
                w.kill();
                return Err(WorkerError::Handshake("no greeting".into()));
            }
        };
        match serde_json::from_str::<Handshake>(&line) {
            Ok(h) if h.ready && h.proto == PROTOCOL_VERSION => Ok(w),
            _ => {
                w.kill();
                Err(WorkerError::Handshake(format!("unexpected greeting {line:?}")))
            }
        }
    }

    fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }

    /// An outer `Err` means the worker is unusable and must be replaced.
    fn call(&mut self, id: u64, req: &ExecRequest) -> Result<Result<ExecResponse, Failure>, Failure> {
        let line = serde_json::to_string(&Request::eval(id, req)).expect("requests serialize");
        let sent = writeln!(self.stdin, "{line}").and_then(|()| self.stdin.flush());
        if let Err(e) = sent {
            return Err(Failure::Exception(format!("worker exited: {e}")));
        }
        let deadline = Instant::now() + parent_deadline(req.timeout_s);
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            match self.lines.recv_timeout(left) {
                Ok(Ok(line)) => {
                    let resp: Response = match serde_json::from_str(&line) {
                        Ok(r) => r,
                        Err(e) => {
                            log::warn!("ignoring malformed worker line: {e}");
                            continue;
                        }
                    };
                    if resp.id != id {
                        log::debug!("ignoring stale response {}", resp.id);
                        continue;
                    }
                    return Ok(resp.into_outcome().map(|(value, elapsed_s)| ExecResponse { value, elapsed_s }));
                }
                Ok(Err(e)) => return Err(Failure::Exception(format!("worker exited: {e}"))),
                Err(RecvTimeoutError::Disconnected) => return Err(Failure::Exception("worker exited".into())),
                Err(RecvTimeoutError::Timeout) => return Err(Failure::Timeout),
            }
        }
    }
}

impl Drop for Worker {
    fn drop(&mut self) {
        self.kill();
    }
}

/// Fixed-size set of workers; batches are spread across all of them.
pub struct WorkerPool {
    command: WorkerCommand,
    workers: Vec<Option<Worker>>,
    next_id: u64,
    respawns: usize,
}

impl WorkerPool {
    pub fn new(command: WorkerCommand, size: usize) -> Result<Self, WorkerError> {
        let workers = (0..size.max(1))
            .map(|_| Worker::spawn(&command).map(Some))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            command,
            workers,
            next_id: 0,
            respawns: 0,
        })
    }

    pub fn size(&self) -> usize {
        self.workers.len()
    }

    /// Workers replaced after a missed deadline or a crash.
    pub fn respawns(&self) -> usize {
        self.respawns
    }

    fn dispatch(command: &WorkerCommand, slot: &mut Option<Worker>, id: u64, req: &ExecRequest) -> (Result<ExecResponse, Failure>, bool) {
        if slot.is_none() {
            match Worker::spawn(command) {
                Ok(w) => *slot = Some(w),
                Err(e) => return (Err(Failure::Exception(e.to_string())), false),
            }
        }
        let worker = slot.as_mut().expect("spawned above");
        match worker.call(id, req) {
            Ok(r) => (r, false),
            Err(failure) => {
                log::warn!("replacing worker after {failure}");
                *slot = None;
                let respawned = match Worker::spawn(command) {
                    Ok(w) => {
                        *slot = Some(w);
                        true
                    }
                    Err(e) => {
                        log::error!("{e}");
                        false
                    }
                };
                (Err(failure), respawned)
            }
        }
    }
}

impl HeuristicRunner for WorkerPool {
    fn run(&mut self, request: &ExecRequest) -> Result<ExecResponse, Failure> {
        self.next_id += 1;
        let (r, respawned) = Self::dispatch(&self.command, &mut self.workers[0], self.next_id, request);
        self.respawns += usize::from(respawned);
        r
    }

    fn run_batch(&mut self, requests: &[ExecRequest]) -> Vec<Result<ExecResponse, Failure>> {
        let base = self.next_id;
        self.next_id += requests.len() as u64;
        let n = self.workers.len();
        if n == 1 || requests.len() <= 1 {
            let mut out = Vec::with_capacity(requests.len());
            for (i, req) in requests.iter().enumerate() {
                let (r, respawned) = Self::dispatch(&self.command, &mut self.workers[0], base + 1 + i as u64, req);
                self.respawns += usize::from(respawned);
                out.push(r);
            }
            return out;
        }
        let command = &self.command;
        let mut results: Vec<Option<Result<ExecResponse, Failure>>> = (0..requests.len()).map(|_| None).collect();
        let mut respawns = 0;
        thread::scope(|scope| {
            let handles: Vec<_> = self
                .workers
                .iter_mut()
                .enumerate()
                .map(|(w, slot)| {
                    scope.spawn(move || {
                        let mut local = Vec::new();
                        let mut respawned = 0;
                        for i in (w..requests.len()).step_by(n) {
                            let (r, again) = Self::dispatch(command, slot, base + 1 + i as u64, &requests[i]);
                            respawned += usize::from(again);
                            local.push((i, r));
                        }
                        (local, respawned)
                    })
                })
                .collect();
            for h in handles {
                let (local, r) = h.join().expect("worker thread panicked");
                respawns += r;
                for (i, res) in local {
                    results[i] = Some(res);
                }
            }
        });
        self.respawns += respawns;
        results.into_iter().map(|r| r.expect("every request answered")).collect()
    }
}
