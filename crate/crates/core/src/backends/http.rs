//! OpenAI-compatible HTTP transport.

use std::sync::{Arc, Condvar, Mutex};
use std::thread;
use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Backend, BackendError, BackendKind, BackendSpec, CompletionRequest, Message};
use crate::text::normalize;

const REQUEST_TIMEOUT: Duration = Duration::from_secs(120);

/// Counting semaphore bounding in-flight requests per endpoint.
#[derive(Debug)]
pub(crate) struct Gate {
    limit: usize,
    in_flight: Mutex<usize>,
    freed: Condvar,
}

impl Gate {
    pub(crate) fn new(limit: usize) -> Self {
        Gate { limit: limit.max(1), in_flight: Mutex::new(0), freed: Condvar::new() }
    }

    fn acquire(&self) -> GateGuard<'_> {
        let mut n = self.in_flight.lock().expect("gate poisoned");
        while *n >= self.limit {
            n = self.freed.wait(n).expect("gate poisoned");
        }
        *n += 1;
        GateGuard { gate: self }
    }
}

struct GateGuard<'a> {
    gate: &'a Gate,
}

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        let mut n = self.gate.in_flight.lock().expect("gate poisoned");
        *n -= 1;
        self.gate.freed.notify_one();
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: &'a [Message],
    temperature: f64,
    top_p: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

#[derive(Serialize)]
struct EmbeddingRequest<'a> {
    model: &'a str,
    input: &'a str,
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    embedding: Vec<f64>,
}

enum Attempt {
    Done(String),
    Transient(String),
    Fatal(BackendError),
}

pub struct HttpBackend {
    spec: BackendSpec,
    client: Client,
    api_key: Option<String>,
    gate: Arc<Gate>,
}

impl std::fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpBackend").field("id", &self.spec.id).finish()
    }
}

impl HttpBackend {
    pub fn new(spec: BackendSpec) -> Result<Self, BackendError> {
        let gate = Arc::new(Gate::new(spec.max_in_flight));
        Self::with_gate(spec, gate)
    }

    pub(crate) fn with_gate(spec: BackendSpec, gate: Arc<Gate>) -> Result<Self, BackendError> {
        spec.validate()?;
        if spec.endpoint.is_none() {
            return Err(BackendError::InvalidSpec(format!("`{}`: endpoint required", spec.id)));
        }
        let api_key = std::env::var(spec.api_key_env())
            .ok()
            .or_else(|| spec.endpoint.as_ref().and_then(|e| e.api_key.clone()));
        let client = Client::builder()
            .timeout(REQUEST_TIMEOUT)
            .build()
            .map_err(|e| BackendError::InvalidSpec(e.to_string()))?;
        Ok(HttpBackend { spec, client, api_key, gate })
    }

    fn url(&self, path: &str) -> String {
        let base = &self.spec.endpoint.as_ref().expect("validated").url;
        format!("{}/{}", base.trim_end_matches('/'), path)
    }

    fn model(&self) -> &str {
        &self.spec.endpoint.as_ref().expect("validated").model
    }

    fn post_once<B: Serialize>(&self, path: &str, body: &B) -> Attempt {
        let _slot = self.gate.acquire();
        let mut req = self.client.post(self.url(path)).json(body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        match req.send() {
            Err(e) => Attempt::Transient(e.to_string()),
            Ok(resp) => {
                let status = resp.status();
                let text = match resp.text() {
                    Ok(t) => t,
                    Err(e) => return Attempt::Transient(e.to_string()),
                };
                if status.is_success() {
                    Attempt::Done(text)
                } else if status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error() {
                    Attempt::Transient(format!("HTTP {status}"))
                } else {
                    Attempt::Fatal(BackendError::Protocol {
                        id: self.spec.id.clone(),
                        detail: format!("HTTP {status}: {}", truncate(&text, 200)),
                    })
                }
            }
        }
    }

    /// POSTs with retry on transport failures, 429 and 5xx.
    fn post<B: Serialize>(&self, path: &str, body: &B) -> Result<String, BackendError> {
        let retry = &self.spec.retry;
        let mut last = String::new();
        for attempt in 1..=retry.max_attempts {
            match self.post_once(path, body) {
                Attempt::Done(text) => return Ok(text),
                Attempt::Fatal(e) => return Err(e),
                Attempt::Transient(why) => {
                    log::debug!("{}: attempt {attempt} failed: {why}", self.spec.id);
                    last = why;
                }
            }
            if attempt < retry.max_attempts {
                thread::sleep(retry.backoff(attempt));
            }
        }
        Err(BackendError::Unavailable { id: self.spec.id.clone(), attempts: retry.max_attempts, last })
    }

    fn protocol(&self, detail: impl Into<String>) -> BackendError {
        BackendError::Protocol { id: self.spec.id.clone(), detail: detail.into() }
    }
}

fn truncate(s: &str, n: usize) -> &str {
    match s.char_indices().nth(n) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

impl Backend for HttpBackend {
    fn spec(&self) -> &BackendSpec {
        &self.spec
    }

    fn complete(&self, req: &CompletionRequest) -> Result<String, BackendError> {
        if self.spec.kind == BackendKind::Embed {
            return Err(BackendError::Unsupported { id: self.spec.id.clone(), what: "completions" });
        }
        let sampling = req.sampling.as_ref().unwrap_or(&self.spec.sampling);
        let body = ChatRequest {
            model: self.model(),
            messages: &req.messages,
            temperature: sampling.temperature,
            top_p: sampling.top_p,
            max_tokens: sampling.max_tokens,
        };
        let text = self.post("chat/completions", &body)?;
        let parsed: ChatResponse =
            serde_json::from_str(&text).map_err(|e| self.protocol(format!("malformed reply: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| self.protocol("reply has no message content"))
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, BackendError> {
        if text.trim().is_empty() {
            return Err(BackendError::EmptyInput);
        }
        if self.spec.kind != BackendKind::Embed {
            return Err(BackendError::Unsupported { id: self.spec.id.clone(), what: "embeddings" });
        }
        let body = EmbeddingRequest { model: self.model(), input: text };
        let reply = self.post("embeddings", &body)?;
        let parsed: EmbeddingResponse = serde_json::from_str(&reply).map_err(|e| {
            let hint = serde_json::from_str::<Value>(&reply).map(|_| "unexpected shape").unwrap_or("not JSON");
            self.protocol(format!("malformed embedding reply ({hint}): {e}"))
        })?;
        let v = parsed
            .data
            .into_iter()
            .next()
            .map(|d| d.embedding)
            .filter(|v| !v.is_empty())
            .ok_or_else(|| self.protocol("empty embedding"))?;
        Ok(normalize(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn gate_bounds_concurrency() {
        let gate = Arc::new(Gate::new(3));
        let current = Arc::new(AtomicUsize::new(0));
        let peak = Arc::new(AtomicUsize::new(0));
        thread::scope(|s| {
            for _ in 0..12 {
                let (gate, current, peak) = (gate.clone(), current.clone(), peak.clone());
                s.spawn(move || {
                    let _g = gate.acquire();
                    let now = current.fetch_add(1, Ordering::SeqCst) + 1;
                    peak.fetch_max(now, Ordering::SeqCst);
                    thread::sleep(Duration::from_millis(10));
                    current.fetch_sub(1, Ordering::SeqCst);
                });
            }
        });
        assert!(peak.load(Ordering::SeqCst) <= 3);
        assert!(peak.load(Ordering::SeqCst) >= 2);
    }

    #[test]
    fn truncate_respects_char_boundaries() {
        assert_eq!(truncate("héllo", 2), "hé");
        assert_eq!(truncate("hi", 10), "hi");
    }
}
