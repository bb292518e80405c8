//! Remote policy against a throwaway HTTP stub.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use pokerlm_core::engine::{GameState, TableConfig};
use pokerlm_core::hand_history::{ActionKind, BlindStructure};
use pokerlm_core::policies::{RemoteConfig, RemotePolicy};
use pokerlm_core::Chips;
use serde_json::Value;

/// Serves `replies` in order, one per connection, and forwards each request
/// body to the returned channel.
fn stub(replies: Vec<(u16, String)>) -> (String, mpsc::Receiver<Value>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/generate", listener.local_addr().unwrap());
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for (status, body) in replies {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            let _ = tx.send(serde_json::from_slice(&buf).unwrap_or(Value::Null));
            let mut stream = stream;
            let _ = write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
        }
    });
    (url, rx)
}

fn heads_up() -> GameState {
    let blinds = BlindStructure::new(Chips(2), Chips(5), "USD");
    GameState::new(TableConfig::uniform(2, blinds, Chips(500), 1, 9)).unwrap()
}

fn policy(url: &str, retries: u32) -> RemotePolicy {
    RemotePolicy::new(RemoteConfig { endpoint: url.to_string(), timeout: Duration::from_secs(5), retries })
}

#[test]
fn reply_is_parsed_and_snapped_to_the_menu() {
    let (url, rx) = stub(vec![(200, r#"{"text":"I think you should raise to 0.12 here."}"#.into())]);
    let state = heads_up();
    let legal = state.legal_actions().unwrap();
    let out = policy(&url, 0).decide_prompt("PROMPT", "s-1", &legal);
    assert!(!out.fallback);
    assert_eq!(out.decision.kind, ActionKind::Raise);
    assert_eq!(out.decision.amount, Chips(15));
    let sent = rx.recv().unwrap();
    assert_eq!(sent["prompt"], "PROMPT");
    assert_eq!(sent["session_id"], "s-1");
}

#[test]
fn unparseable_reply_falls_back() {
    let (url, _rx) = stub(vec![(200, r#"{"text":"no idea"}"#.into())]);
    let legal = heads_up().legal_actions().unwrap();
    let out = policy(&url, 0).decide_prompt("p", "s", &legal);
    assert!(out.fallback);
    assert_eq!(out.decision.kind, ActionKind::Fold);
}

#[test]
fn retries_after_a_server_error() {
    let (url, _rx) = stub(vec![(500, "{}".into()), (200, r#"{"text":"call"}"#.into())]);
    let legal = heads_up().legal_actions().unwrap();
    let out = policy(&url, 1).decide_prompt("p", "s", &legal);
    assert!(!out.fallback, "{:?}", out.rationale);
    assert_eq!(out.decision.kind, ActionKind::Call);
}

#[test]
fn unreachable_endpoint_falls_back() {
    let url = {
        let l = TcpListener::bind("127.0.0.1:0").unwrap();
        format!("http://{}/", l.local_addr().unwrap())
    };
    let legal = heads_up().legal_actions().unwrap();
    let out = policy(&url, 2).decide_prompt("p", "s", &legal);
    assert!(out.fallback);
}
