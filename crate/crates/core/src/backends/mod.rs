//! Text-generation, judging and embedding backends.
//!
//! Every backend speaks the same [`Backend`] trait. HTTP backends talk to an
//! OpenAI-compatible chat-completions endpoint; mock backends are
//! deterministic personas that answer every prompt the pipeline issues, so
//! whole runs can execute offline and replay bit-identically.

mod http;
mod ledger;
mod mock;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::values::ValueSystem;

pub use http::HttpBackend;
pub use ledger::{Ledger, LedgerRecord};
pub use mock::{
    context_cues, mock_embedding, persona_judge, persona_respond, MockBackend, MockPersona, PersonaSpec,
    CONTEXT_CUES, MOCK_EMBED_DIM,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("backend `{id}` unavailable after {attempts} attempt(s): {last}")]
    Unavailable { id: String, attempts: u32, last: String },
    #[error("protocol error from `{id}`: {detail}")]
    Protocol { id: String, detail: String },
    #[error("backend `{id}` cannot serve {what}")]
    Unsupported { id: String, what: &'static str },
    #[error("empty input")]
    EmptyInput,
    #[error("unknown backend `{0}`")]
    UnknownBackend(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("invalid backend spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Chat,
    Judge,
    Embed,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    #[serde(default = "Sampling::default_temperature")]
    pub temperature: f64,
    #[serde(default = "Sampling::default_top_p")]
    pub top_p: f64,
    #[serde(default = "Sampling::default_max_tokens")]
    pub max_tokens: u32,
}

impl Sampling {
    fn default_temperature() -> f64 {
        1.0
    }
    fn default_top_p() -> f64 {
        0.95
    }
    fn default_max_tokens() -> u32 {
        1024
    }
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            temperature: Self::default_temperature(),
            top_p: Self::default_top_p(),
            max_tokens: Self::default_max_tokens(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetryPolicy {
    #[serde(default = "RetryPolicy::default_attempts")]
    pub max_attempts: u32,
    #[serde(default = "RetryPolicy::default_backoff")]
    pub backoff_base_ms: u64,
}

impl RetryPolicy {
    fn default_attempts() -> u32 {
        4
    }
    fn default_backoff() -> u64 {
        500
    }

    /// Delay before retry number `attempt` (1-based): `base * 2^(attempt-1)`.
    pub fn backoff(&self, attempt: u32) -> Duration {
        Duration::from_millis(self.backoff_base_ms.saturating_mul(1 << (attempt - 1).min(16)))
    }
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: Self::default_attempts(),
            backoff_base_ms: Self::default_backoff(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Endpoint {
    /// Base URL, e.g. `https://api.openai.com/v1`.
    pub url: String,
    pub model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendSpec {
    pub id: String,
    pub kind: BackendKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<Endpoint>,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub retry: RetryPolicy,
    /// Upper bound on in-flight requests against this backend's endpoint.
    #[serde(default = "default_max_in_flight")]
    pub max_in_flight: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub persona: Option<PersonaSpec>,
}

fn default_max_in_flight() -> usize {
    8
}

impl BackendSpec {
    pub fn mock(id: &str, persona: PersonaSpec) -> Self {
        BackendSpec {
            id: id.to_string(),
            kind: BackendKind::Mock,
            endpoint: None,
            sampling: Sampling::default(),
            retry: RetryPolicy::default(),
            max_in_flight: default_max_in_flight(),
            persona: Some(persona),
        }
    }

    pub fn http(id: &str, kind: BackendKind, url: &str, model: &str) -> Self {
        BackendSpec {
            id: id.to_string(),
            kind,
            endpoint: Some(Endpoint {
                url: url.to_string(),
                model: model.to_string(),
                api_key: None,
            }),
            sampling: Sampling::default(),
            retry: RetryPolicy::default(),
            max_in_flight: default_max_in_flight(),
            persona: None,
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        let bad = |m: String| Err(BackendError::InvalidSpec(format!("`{}`: {m}", self.id)));
        if self.sampling.temperature < 0.0 {
            return bad("temperature must be >= 0".into());
        }
        if !(self.sampling.top_p > 0.0 && self.sampling.top_p <= 1.0) {
            return bad("top_p must be in (0, 1]".into());
        }
        if self.retry.max_attempts < 1 {
            return bad("max_attempts must be >= 1".into());
        }
        if self.max_in_flight < 1 {
            return bad("max_in_flight must be >= 1".into());
        }
        match self.kind {
            BackendKind::Mock if self.persona.is_none() => bad("mock backend needs a persona".into()),
            BackendKind::Chat | BackendKind::Judge | BackendKind::Embed if self.endpoint.is_none() => {
                bad("endpoint required".into())
            }
            _ => Ok(()),
        }
    }

    /// Environment variable consulted for this backend's API key.
    pub fn api_key_env(&self) -> String {
        let id: String = self
            .id
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_uppercase() } else { '_' })
            .collect();
        format!("ADAEM_API_KEY_{id}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn user(content: impl Into<String>) -> Self {
        Message { role: Role::User, content: content.into() }
    }
    pub fn assistant(content: impl Into<String>) -> Self {
        Message { role: Role::Assistant, content: content.into() }
    }
    pub fn system(content: impl Into<String>) -> Self {
        Message { role: Role::System, content: content.into() }
    }
}

/// Which pipeline step issued a request. HTTP backends ignore it; mock
/// personas dispatch on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Opinion,
    Judge,
    Explore,
    Question,
    Reflect,
    Refine,
    Free,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub task: Task,
    pub messages: Vec<Message>,
    /// Template bindings the prompt was rendered from.
    #[serde(default)]
    pub bindings: BTreeMap<String, String>,
    /// Caller-derived variation key; mocks fold it into their RNG seed.
    #[serde(default)]
    pub nonce: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<Sampling>,
}

impl CompletionRequest {
    pub fn prompt(text: impl Into<String>) -> Self {
        CompletionRequest {
            task: Task::Free,
            messages: vec![Message::user(text)],
            bindings: BTreeMap::new(),
            nonce: 0,
            sampling: None,
        }
    }

    pub fn new(task: Task, messages: Vec<Message>, bindings: BTreeMap<String, String>) -> Self {
        CompletionRequest { task, messages, bindings, nonce: 0, sampling: None }
    }

    pub fn with_nonce(mut self, nonce: u64) -> Self {
        self.nonce = nonce;
        self
    }

    pub fn last_user(&self) -> &str {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
            .unwrap_or("")
    }
}

pub trait Backend: Send + Sync {
    fn spec(&self) -> &BackendSpec;

    fn id(&self) -> &str {
        &self.spec().id
    }

    fn complete(&self, req: &CompletionRequest) -> Result<String, BackendError>;

    /// Unit-norm embedding of `text`.
    fn embed(&self, text: &str) -> Result<Vec<f64>, BackendError>;
}

/// All configured backends, keyed by id, plus the run ledger.
#[derive(Clone, Default)]
pub struct Registry {
    backends: BTreeMap<String, Arc<dyn Backend>>,
    ledger: Option<Arc<Ledger>>,
}

impl std::fmt::Debug for Registry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Registry").field("backends", &self.backends.keys().collect::<Vec<_>>()).finish()
    }
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds backends from specs. HTTP backends sharing an endpoint URL share
    /// one in-flight limit (the smallest configured).
    pub fn from_specs(specs: &[BackendSpec], system: &Arc<ValueSystem>) -> Result<Self, BackendError> {
        let mut limits: HashMap<String, usize> = HashMap::new();
        for spec in specs {
            spec.validate()?;
            if let Some(ep) = &spec.endpoint {
                let e = limits.entry(ep.url.clone()).or_insert(spec.max_in_flight);
                *e = (*e).min(spec.max_in_flight);
            }
        }
        let gates: HashMap<String, Arc<http::Gate>> =
            limits.into_iter().map(|(url, n)| (url, Arc::new(http::Gate::new(n)))).collect();
        let mut reg = Registry::new();
        for spec in specs {
            let backend: Arc<dyn Backend> = match spec.kind {
                BackendKind::Mock => Arc::new(MockBackend::from_spec(spec.clone(), system.clone())?),
                _ => {
                    let url = &spec.endpoint.as_ref().expect("validated").url;
                    Arc::new(HttpBackend::with_gate(spec.clone(), gates[url].clone())?)
                }
            };
            reg.insert(backend)?;
        }
        Ok(reg)
    }

    pub fn insert(&mut self, backend: Arc<dyn Backend>) -> Result<(), BackendError> {
        let id = backend.id().to_string();
        if self.backends.contains_key(&id) {
            return Err(BackendError::InvalidSpec(format!("duplicate backend id `{id}`")));
        }
        self.backends.insert(id, backend);
        Ok(())
    }

    pub fn with_ledger(mut self, ledger: Arc<Ledger>) -> Self {
        self.ledger = Some(ledger);
        self
    }

    pub fn ledger(&self) -> Option<&Arc<Ledger>> {
        self.ledger.as_ref()
    }

    pub fn get(&self, id: &str) -> Result<&Arc<dyn Backend>, BackendError> {
        self.backends.get(id).ok_or_else(|| BackendError::UnknownBackend(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.backends.contains_key(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.backends.keys().map(String::as_str)
    }

    pub fn complete(&self, id: &str, req: &CompletionRequest) -> Result<String, BackendError> {
        let backend = self.get(id)?;
        let started = Instant::now();
        let out = backend.complete(req);
        if let Some(ledger) = &self.ledger {
            ledger.record(id, req, &out, started.elapsed());
        }
        out
    }

    pub fn embed(&self, id: &str, text: &str) -> Result<Vec<f64>, BackendError> {
        self.get(id)?.embed(text)
    }

    /// Issues `req` to every listed backend concurrently; results are keyed by
    /// backend id.
    pub fn fan_out(&self, ids: &[String], req: &CompletionRequest) -> BTreeMap<String, Result<String, BackendError>> {
        ids.par_iter().map(|id| (id.clone(), self.complete(id, req))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        let mut spec = BackendSpec::http("a", BackendKind::Chat, "http://localhost:1", "m");
        assert!(spec.validate().is_ok());
        spec.sampling.top_p = 0.0;
        assert!(spec.validate().is_err());
        spec.sampling.top_p = 1.0;
        spec.sampling.temperature = -0.1;
        assert!(spec.validate().is_err());
        spec.sampling.temperature = 0.0;
        spec.retry.max_attempts = 0;
        assert!(spec.validate().is_err());
        let mut no_ep = BackendSpec::http("b", BackendKind::Judge, "x", "m");
        no_ep.endpoint = None;
        assert!(no_ep.validate().is_err());
    }

    #[test]
    fn api_key_env_name() {
        let spec = BackendSpec::http("gpt-4o.mini", BackendKind::Chat, "x", "m");
        assert_eq!(spec.api_key_env(), "ADAEM_API_KEY_GPT_4O_MINI");
    }

    #[test]
    fn backoff_doubles() {
        let r = RetryPolicy { max_attempts: 5, backoff_base_ms: 100 };
        assert_eq!(r.backoff(1), Duration::from_millis(100));
        assert_eq!(r.backoff(3), Duration::from_millis(400));
    }

    #[test]
    fn fan_out_keeps_results_keyed_by_id() {
        let system = Arc::new(ValueSystem::schwartz());
        let specs: Vec<BackendSpec> = (0..16)
            .map(|i| BackendSpec::mock(&format!("m{i:02}"), PersonaSpec::uniform(0.3, i)))
            .collect();
        let reg = Registry::from_specs(&specs, &system).unwrap();
        let ids: Vec<String> = reg.ids().map(String::from).collect();
        for round in 0..20 {
            let out = reg.fan_out(&ids, &CompletionRequest::prompt(format!("echo {round}")));
            assert_eq!(out.len(), 16);
            for (id, reply) in out {
                assert!(reply.unwrap().starts_with(&format!("[{id}]")));
            }
        }
    }
}
