//! Uniform chat-completion interface with three interchangeable backends:
//! a live OpenAI-compatible HTTP endpoint, a replay cache for bit-exact
//! offline reruns, and scripted responders for tests and demos.

mod http;
mod replay;
mod scripted;

pub use http::HttpBackend;
pub use replay::{ReplayBackend, ReplayCache};
pub use scripted::{ResponderPolicy, ScriptedBackend};

use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::protocol::{PromptText, SamplingParams};

/// One chat-completion call: target model, rendered prompt, repetition seed,
/// and sampling parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub model_name: String,
    pub prompt: PromptText,
    pub seed: u64,
    pub sampling: SamplingParams,
}

/// Which backend produced a response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Http,
    Replay,
    Scripted,
}

/// The raw model output plus transport bookkeeping. `raw_text` is recorded
/// verbatim, including when the backend returned empty content.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatResponse {
    pub raw_text: String,
    pub backend: BackendKind,
    pub latency: Duration,
    pub attempt_count: u32,
}

/// Retry policy for transient HTTP failures (timeouts, 5xx, 429).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_backoff: Duration,
    pub backoff_factor: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            initial_backoff: Duration::from_secs(1),
            backoff_factor: 2.0,
        }
    }
}

impl RetryPolicy {
    pub fn backoff_before(&self, attempt: u32) -> Duration {
        let factor = self.backoff_factor.powi(attempt.saturating_sub(1) as i32);
        self.initial_backoff.mul_f64(factor)
    }
}

/// Connection settings for the live HTTP backend.
#[derive(Debug, Clone)]
pub struct EndpointConfig {
    pub base_url: String,
    pub api_key: Option<String>,
    pub timeout: Duration,
    pub max_in_flight: usize,
    pub retry: RetryPolicy,
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            api_key: None,
            timeout: Duration::from_secs(60),
            max_in_flight: 4,
            retry: RetryPolicy::default(),
        }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.max_in_flight < 1 {
            return Err(GatewayError::InvalidEndpoint(
                "max_in_flight must be at least 1".into(),
            ));
        }
        if self.base_url.is_empty() {
            return Err(GatewayError::InvalidEndpoint("base_url is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("transport failure after {attempts} attempt(s): {message}")]
    TransportError { attempts: u32, message: String },
    #[error("endpoint rejected credentials (HTTP {status})")]
    AuthError { status: u16 },
    #[error("replay cache has no entry for key {key}")]
    CacheMiss { key: String },
    #[error("invalid responder policy: {0}")]
    InvalidPolicy(String),
    #[error("invalid endpoint configuration: {0}")]
    InvalidEndpoint(String),
    #[error("replay cache i/o: {0}")]
    CacheIo(#[from] std::io::Error),
}

/// A chat-completion backend. Implementations must be reentrant: `complete`
/// takes `&self` and may be called from several worker threads at once.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, GatewayError>;

    /// Short name recorded in run manifests.
    fn name(&self) -> &str;
}

/// Content-address of a request: a SHA-256 digest over the model name, the
/// exact prompt bytes, the seed, and the sampling parameters, each framed so
/// field boundaries cannot collide. Stable across platforms and runs.
pub fn cache_key(request: &ChatRequest) -> String {
    let mut hasher = Sha256::new();
    for part in [
        request.model_name.as_bytes(),
        request.prompt.text.as_bytes(),
    ] {
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part);
    }
    hasher.update(request.seed.to_le_bytes());
    hasher.update(request.sampling.temperature.to_le_bytes());
    hasher.update(request.sampling.top_p.to_le_bytes());
    hasher.update(request.sampling.max_tokens.to_le_bytes());
    hex::encode(hasher.finalize())
}
