//! Minimal bridge peer with canned behaviors.
//!
//! Serves the bridge protocol on any reader/writer pair. The `livetl
//! stub-peer` command exposes it over stdio or TCP so pipelines can be
//! exercised end to end without a model. The fault behaviors exist to
//! test the client's error paths.

use std::io::{self, BufRead, Write};
use std::net::{TcpListener, ToSocketAddrs};
use std::thread;
use std::time::Duration;

use clap::ValueEnum;
use serde_json::{json, Value};

use crate::generators::bridge::{FrameKind, RequestFrame, PROTOCOL_VERSION};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StubBehavior {
    /// First tweet, or null for an empty window.
    EchoFirstTweet,
    /// `minute {m}: {n} tweets, {k} context`.
    Template,
    AlwaysNull,
    AlwaysYes,
    AlwaysNo,
    /// Never answers.
    Hang,
    /// Answers with a line that is not JSON.
    Garbage,
    /// Answers `{"decision":"maybe"}`.
    BadDecision,
    /// Answers with protocol version 2.
    WrongVersion,
    /// Exits with status 7 upon the first request.
    Exit,
}

/// What to do with one parsed request.
fn respond(behavior: StubBehavior, req: &RequestFrame) -> Option<String> {
    let frame = match (behavior, req.kind) {
        (StubBehavior::EchoFirstTweet, _) => json!({"v": 1, "update": req.tweets.first()}),
        (StubBehavior::Template, _) => json!({
            "v": 1,
            "update": format!(
                "minute {}: {} tweets, {} context",
                req.minute,
                req.tweets.len(),
                req.context.len()
            ),
        }),
        (StubBehavior::AlwaysNull, _) => json!({"v": 1, "update": Value::Null}),
        (StubBehavior::AlwaysYes, _) => json!({"v": 1, "decision": "yes"}),
        (StubBehavior::AlwaysNo, _) => json!({"v": 1, "decision": "no"}),
        (StubBehavior::BadDecision, _) => json!({"v": 1, "decision": "maybe"}),
        (StubBehavior::WrongVersion, FrameKind::Generate) => json!({"v": 2, "update": Value::Null}),
        (StubBehavior::WrongVersion, FrameKind::Classify) => json!({"v": 2, "decision": "yes"}),
        (StubBehavior::Garbage, _) => return Some("this is not json".into()),
        (StubBehavior::Hang | StubBehavior::Exit, _) => return None,
    };
    Some(frame.to_string())
}

/// Outcome of a serve loop.
#[derive(Debug, PartialEq, Eq)]
pub enum ServeEnd {
    /// Input closed.
    Eof,
    /// The `Exit` behavior fired; the caller should exit with this code.
    Exit(i32),
}

/// Answers one frame per input line until EOF.
pub fn serve<R: BufRead, W: Write>(
    behavior: StubBehavior,
    input: R,
    mut output: W,
) -> io::Result<ServeEnd> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = match serde_json::from_str::<RequestFrame>(&line) {
            Ok(req) if req.v != PROTOCOL_VERSION => {
                json!({"v": 1, "error": format!("unsupported version {}", req.v)}).to_string()
            }
            Ok(req) => match behavior {
                StubBehavior::Exit => return Ok(ServeEnd::Exit(7)),
                StubBehavior::Hang => loop {
                    thread::sleep(Duration::from_secs(3600));
                },
                _ => respond(behavior, &req).expect("answering behavior"),
            },
            Err(e) => json!({"v": 1, "error": e.to_string()}).to_string(),
        };
        output.write_all(format!("{reply}\n").as_bytes())?;
        output.flush()?;
    }
    Ok(ServeEnd::Eof)
}

/// Serves connections one at a time on `addr`. Calls `ready` with the bound
/// address before accepting.
pub fn serve_tcp<A: ToSocketAddrs>(
    behavior: StubBehavior,
    addr: A,
    ready: impl FnOnce(std::net::SocketAddr),
) -> io::Result<ServeEnd> {
    let listener = TcpListener::bind(addr)?;
    ready(listener.local_addr()?);
    for stream in listener.incoming() {
        let stream = stream?;
        stream.set_nodelay(true)?;
        let reader = io::BufReader::new(stream.try_clone()?);
        if let ServeEnd::Exit(code) = serve(behavior, reader, stream)? {
            return Ok(ServeEnd::Exit(code));
        }
    }
    Ok(ServeEnd::Eof)
}
