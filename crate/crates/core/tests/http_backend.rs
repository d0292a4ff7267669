//! HTTP transport against a scripted local server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;

use adaem::backends::{Backend, BackendError, BackendKind, BackendSpec, CompletionRequest, Endpoint, HttpBackend};

#[derive(Debug, Clone)]
struct Seen {
    path: String,
    auth: Option<String>,
    body: serde_json::Value,
}

/// Serves `script` in order, one response per connection, then stops.
fn serve(script: Vec<(u16, &'static str)>) -> (String, Arc<Mutex<Vec<Seen>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = seen.clone();
    thread::spawn(move || {
        for (status, body) in script {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            let path = line.split_whitespace().nth(1).unwrap_or_default().to_string();
            let (mut len, mut auth) = (0, None);
            loop {
                let mut h = String::new();
                reader.read_line(&mut h).unwrap();
                let h = h.trim_end();
                if h.is_empty() {
                    break;
                }
                let (k, v) = h.split_once(':').unwrap();
                match k.to_ascii_lowercase().as_str() {
                    "content-length" => len = v.trim().parse().unwrap(),
                    "authorization" => auth = Some(v.trim().to_string()),
                    _ => {}
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            let body_json = serde_json::from_slice(&buf).unwrap_or(serde_json::Value::Null);
            log.lock().unwrap().push(Seen { path, auth, body: body_json });
            let reply = format!(
                "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                body.len()
            );
            reader.into_inner().write_all(reply.as_bytes()).unwrap();
        }
    });
    (url, seen)
}

fn backend(url: &str, kind: BackendKind, attempts: u32) -> HttpBackend {
    let mut spec = BackendSpec::http("remote", kind, url, "test-model");
    spec.retry.max_attempts = attempts;
    spec.retry.backoff_base_ms = 1;
    HttpBackend::new(spec).unwrap()
}

const OK: &str = r#"{"choices":[{"message":{"role":"assistant","content":"Stance: yes"}}]}"#;

#[test]
fn retries_transient_statuses_then_succeeds() {
    let (url, seen) = serve(vec![(503, "busy"), (429, "slow down"), (200, OK)]);
    let b = backend(&url, BackendKind::Chat, 4);
    assert_eq!(b.complete(&CompletionRequest::prompt("Should we?")).unwrap(), "Stance: yes");
    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 3);
    assert_eq!(seen[2].path, "/v1/chat/completions");
    assert_eq!(seen[2].body["model"], "test-model");
    assert_eq!(seen[2].body["messages"][0]["content"], "Should we?");
}

#[test]
fn gives_up_after_max_attempts() {
    let (url, seen) = serve(vec![(500, "x"), (502, "x"), (500, "x")]);
    let err = backend(&url, BackendKind::Chat, 3).complete(&CompletionRequest::prompt("q")).unwrap_err();
    assert!(matches!(err, BackendError::Unavailable { attempts: 3, .. }), "{err}");
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let (url, seen) = serve(vec![(400, r#"{"error":"bad"}"#), (200, OK)]);
    let err = backend(&url, BackendKind::Chat, 4).complete(&CompletionRequest::prompt("q")).unwrap_err();
    assert!(matches!(err, BackendError::Protocol { .. }), "{err}");
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn malformed_replies_are_protocol_errors() {
    let (url, _) = serve(vec![(200, "not json"), (200, r#"{"choices":[]}"#)]);
    let b = backend(&url, BackendKind::Chat, 1);
    for _ in 0..2 {
        assert!(matches!(b.complete(&CompletionRequest::prompt("q")), Err(BackendError::Protocol { .. })));
    }
}

#[test]
fn unreachable_endpoint_is_unavailable() {
    // bind then drop, so nothing listens on the port
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let b = backend(&format!("http://127.0.0.1:{port}/v1"), BackendKind::Chat, 2);
    assert!(matches!(b.complete(&CompletionRequest::prompt("q")), Err(BackendError::Unavailable { attempts: 2, .. })));
}

#[test]
fn embeddings_are_normalized_and_keyed() {
    let (url, seen) = serve(vec![(200, r#"{"data":[{"embedding":[3.0,4.0]}]}"#)]);
    let mut spec = BackendSpec::http("emb", BackendKind::Embed, &url, "e-model");
    spec.endpoint = Some(Endpoint { url: url.clone(), model: "e-model".into(), api_key: Some("sk-test".into()) });
    let b = HttpBackend::new(spec).unwrap();
    let v = b.embed("hello").unwrap();
    assert!((v[0] - 0.6).abs() < 1e-12 && (v[1] - 0.8).abs() < 1e-12);
    let seen = seen.lock().unwrap();
    assert_eq!(seen[0].path, "/v1/embeddings");
    assert_eq!(seen[0].auth.as_deref(), Some("Bearer sk-test"));
    assert!(b.complete(&CompletionRequest::prompt("q")).is_err());
}
