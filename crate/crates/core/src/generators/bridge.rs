//! Client for external generator / classifier processes.
//!
//! The wire protocol is newline-delimited JSON, one frame per line, one
//! request in flight per connection:
//!
//! ```text
//! -> {"v":1,"kind":"generate"|"classify","minute":12,"tweets":["..."],"context":[{"minute":9,"text":"..."}]}
//! <- {"v":1,"update":"..."|null}
//! <- {"v":1,"decision":"yes"|"no"}
//! ```
//!
//! A peer may answer `{"v":1,"error":"..."}`, which surfaces as a protocol
//! error. The peer is either a child process (frames on stdin/stdout) or a
//! TCP server.

use std::io::{self, BufRead, BufReader, Write};
use std::net::{Shutdown, TcpStream};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::pipeline::{ContextEntry, Decision, Gate, GenerationRequest, Generator, GeneratorError};
use crate::types::normalize_update_text;

pub const PROTOCOL_VERSION: u64 = 1;

#[derive(Debug, Error)]
pub enum BridgeError {
    #[error("bridge peer did not answer within {0} ms")]
    Timeout(u64),
    #[error("bridge protocol error: {0}")]
    Protocol(String),
    #[error("bridge peer exited with {}", .0.map_or("a signal".to_string(), |c| format!("code {c}")))]
    Exit(Option<i32>),
    #[error("bridge i/o: {0}")]
    Io(#[from] io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Transport {
    /// Spawn `command[0]` with the remaining arguments.
    Subprocess { command: Vec<String> },
    /// Connect to `addr` (`host:port`).
    Tcp { addr: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeConfig {
    pub transport: Transport,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    /// Requests carry at most this many tweets, keeping the earliest.
    #[serde(default = "default_max_tweets")]
    pub max_tweets_per_request: usize,
}

fn default_timeout_ms() -> u64 {
    30_000
}

fn default_max_tweets() -> usize {
    256
}

impl BridgeConfig {
    pub fn subprocess<S: Into<String>>(command: impl IntoIterator<Item = S>) -> Self {
        BridgeConfig {
            transport: Transport::Subprocess {
                command: command.into_iter().map(Into::into).collect(),
            },
            timeout_ms: default_timeout_ms(),
            max_tweets_per_request: default_max_tweets(),
        }
    }

    pub fn tcp(addr: impl Into<String>) -> Self {
        BridgeConfig {
            transport: Transport::Tcp { addr: addr.into() },
            timeout_ms: default_timeout_ms(),
            max_tweets_per_request: default_max_tweets(),
        }
    }

    pub fn with_timeout_ms(mut self, timeout_ms: u64) -> Self {
        self.timeout_ms = timeout_ms;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameKind {
    Generate,
    Classify,
}

/// Request frame as sent on the wire.
#[derive(Debug, Serialize, Deserialize)]
pub struct RequestFrame {
    pub v: u64,
    pub kind: FrameKind,
    pub minute: i64,
    pub tweets: Vec<String>,
    pub context: Vec<ContextEntryFrame>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ContextEntryFrame {
    pub minute: i64,
    pub text: String,
}

impl RequestFrame {
    pub fn new(kind: FrameKind, req: &GenerationRequest<'_>, max_tweets: usize) -> Self {
        RequestFrame {
            v: PROTOCOL_VERSION,
            kind,
            minute: req.minute,
            tweets: req
                .tweets
                .iter()
                .take(max_tweets)
                .map(|t| t.text.clone())
                .collect(),
            context: req
                .context
                .iter()
                .map(|ContextEntry { minute, text }| ContextEntryFrame {
                    minute: *minute,
                    text: text.clone(),
                })
                .collect(),
        }
    }
}

/// Lockstep connection to one peer.
pub struct BridgeClient {
    writer: Option<Box<dyn Write + Send>>,
    lines: Receiver<io::Result<String>>,
    child: Option<Child>,
    socket: Option<TcpStream>,
    timeout: Duration,
    max_tweets: usize,
    // Set after a timeout: a late answer would be read as the reply to the
    // next request.
    poisoned: bool,
}

fn spawn_reader<R: io::Read + Send + 'static>(source: R) -> Receiver<io::Result<String>> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let mut reader = BufReader::new(source);
        loop {
            let mut line = String::new();
            match reader.read_line(&mut line) {
                Ok(0) => break,
                Ok(_) => {
                    if tx.send(Ok(line)).is_err() {
                        break;
                    }
                }
                Err(e) => {
                    let _ = tx.send(Err(e));
                    break;
                }
            }
        }
    });
    rx
}

impl BridgeClient {
    pub fn connect(cfg: &BridgeConfig) -> Result<Self, BridgeError> {
        if cfg.timeout_ms == 0 {
            return Err(BridgeError::Protocol("timeout_ms must be > 0".into()));
        }
        let mut socket = None;
        let (writer, lines, child): (Box<dyn Write + Send>, _, _) = match &cfg.transport {
            Transport::Subprocess { command } => {
                let (program, args) = command
                    .split_first()
                    .ok_or_else(|| BridgeError::Protocol("empty bridge command".into()))?;
                let mut child = Command::new(program)
                    .args(args)
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .stderr(Stdio::inherit())
                    .spawn()?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                (Box::new(stdin), spawn_reader(stdout), Some(child))
            }
            Transport::Tcp { addr } => {
                let stream = TcpStream::connect(addr)?;
                stream.set_nodelay(true)?;
                let read_half = stream.try_clone()?;
                socket = Some(stream.try_clone()?);
                (Box::new(stream), spawn_reader(read_half), None)
            }
        };
        Ok(BridgeClient {
            writer: Some(writer),
            lines,
            child,
            socket,
            timeout: Duration::from_millis(cfg.timeout_ms),
            max_tweets: cfg.max_tweets_per_request,
            poisoned: false,
        })
    }

    fn exit_status(&mut self) -> BridgeError {
        let Some(child) = self.child.as_mut() else {
            return BridgeError::Protocol("peer closed the connection".into());
        };
        let deadline = Instant::now() + Duration::from_millis(500);
        loop {
            match child.try_wait() {
                Ok(Some(status)) => return BridgeError::Exit(status.code()),
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(5)),
                Ok(None) => return BridgeError::Protocol("peer closed its output".into()),
                Err(e) => return BridgeError::Io(e),
            }
        }
    }

    /// Sends one frame and waits for one response object.
    pub fn round_trip(
        &mut self,
        frame: &RequestFrame,
    ) -> Result<serde_json::Map<String, Value>, BridgeError> {
        if self.poisoned {
            return Err(BridgeError::Protocol(
                "connection unusable after an earlier timeout".into(),
            ));
        }
        let mut line =
            serde_json::to_string(frame).map_err(|e| BridgeError::Protocol(e.to_string()))?;
        line.push('\n');
        let writer = self
            .writer
            .as_mut()
            .expect("writer open while client alive");
        if let Err(e) = writer
            .write_all(line.as_bytes())
            .and_then(|_| writer.flush())
        {
            return Err(match e.kind() {
                io::ErrorKind::BrokenPipe if self.child.is_some() => self.exit_status(),
                _ => BridgeError::Io(e),
            });
        }
        let reply = match self.lines.recv_timeout(self.timeout) {
            Ok(Ok(reply)) => reply,
            Ok(Err(e)) => return Err(BridgeError::Io(e)),
            Err(RecvTimeoutError::Timeout) => {
                self.poisoned = true;
                return Err(BridgeError::Timeout(self.timeout.as_millis() as u64));
            }
            Err(RecvTimeoutError::Disconnected) => return Err(self.exit_status()),
        };
        parse_response(&reply)
    }

    pub fn generate(&mut self, req: &GenerationRequest<'_>) -> Result<Option<String>, BridgeError> {
        let obj = self.round_trip(&RequestFrame::new(
            FrameKind::Generate,
            req,
            self.max_tweets,
        ))?;
        match obj.get("update") {
            Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(normalize_update_text(Some(s.clone()))),
            Some(other) => Err(BridgeError::Protocol(format!(
                "\"update\" must be string or null, got {other}"
            ))),
            None => Err(BridgeError::Protocol("response lacks \"update\"".into())),
        }
    }

    pub fn classify(&mut self, req: &GenerationRequest<'_>) -> Result<Decision, BridgeError> {
        let obj = self.round_trip(&RequestFrame::new(
            FrameKind::Classify,
            req,
            self.max_tweets,
        ))?;
        match obj.get("decision").and_then(Value::as_str) {
            Some("yes") => Ok(Decision::Yes),
            Some("no") => Ok(Decision::No),
            Some(other) => Err(BridgeError::Protocol(format!("unknown decision {other:?}"))),
            None => Err(BridgeError::Protocol(
                "response lacks a string \"decision\"".into(),
            )),
        }
    }
}

fn parse_response(line: &str) -> Result<serde_json::Map<String, Value>, BridgeError> {
    let value: Value = serde_json::from_str(line.trim_end_matches(['\n', '\r']))
        .map_err(|e| BridgeError::Protocol(format!("invalid JSON frame: {e}")))?;
    let Value::Object(obj) = value else {
        return Err(BridgeError::Protocol("frame is not a JSON object".into()));
    };
    match obj.get("v").and_then(Value::as_u64) {
        Some(PROTOCOL_VERSION) => {}
        other => {
            return Err(BridgeError::Protocol(format!(
                "version mismatch: expected {PROTOCOL_VERSION}, got {other:?}"
            )))
        }
    }
    if let Some(err) = obj.get("error") {
        return Err(BridgeError::Protocol(format!("peer error: {err}")));
    }
    Ok(obj)
}

impl Drop for BridgeClient {
    fn drop(&mut self) {
        // Closing stdin lets a well-behaved peer exit on its own.
        self.writer.take();
        if let Some(socket) = self.socket.take() {
            let _ = socket.shutdown(Shutdown::Both);
        }
        if let Some(mut child) = self.child.take() {
            let deadline = Instant::now() + Duration::from_millis(200);
            while Instant::now() < deadline {
                if let Ok(Some(_)) = child.try_wait() {
                    return;
                }
                thread::sleep(Duration::from_millis(5));
            }
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

/// External generator.
pub struct BridgeGenerator(pub BridgeClient);

impl BridgeGenerator {
    pub fn connect(cfg: &BridgeConfig) -> Result<Self, BridgeError> {
        BridgeClient::connect(cfg).map(BridgeGenerator)
    }
}

impl Generator for BridgeGenerator {
    fn generate(&mut self, req: &GenerationRequest<'_>) -> Result<Option<String>, GeneratorError> {
        Ok(self.0.generate(req)?)
    }
}

/// External yes/no classifier.
pub struct BridgeGate(pub BridgeClient);

impl BridgeGate {
    pub fn connect(cfg: &BridgeConfig) -> Result<Self, BridgeError> {
        BridgeClient::connect(cfg).map(BridgeGate)
    }
}

impl Gate for BridgeGate {
    fn decide(&mut self, req: &GenerationRequest<'_>) -> Result<Decision, GeneratorError> {
        Ok(self.0.classify(req)?)
    }
}
