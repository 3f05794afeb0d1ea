//! Live backend speaking the OpenAI-compatible chat-completions protocol:
//! a single user message per request, bearer-token auth, and the repetition
//! seed passed through the endpoint's `seed` parameter.

use std::time::Instant;

use serde::Deserialize;
use serde_json::json;

use super::{BackendKind, ChatBackend, ChatRequest, ChatResponse, EndpointConfig, GatewayError};

pub struct HttpBackend {
    config: EndpointConfig,
    client: reqwest::blocking::Client,
    url: String,
}

#[derive(Deserialize)]
struct CompletionsResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    #[serde(default)]
    content: Option<String>,
}

impl HttpBackend {
    pub fn new(config: EndpointConfig) -> Result<Self, GatewayError> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| GatewayError::InvalidEndpoint(e.to_string()))?;
        let url = format!(
            "{}/v1/chat/completions",
            config.base_url.trim_end_matches('/')
        );
        Ok(Self {
            config,
            client,
            url,
        })
    }

    fn try_once(&self, request: &ChatRequest) -> Result<String, AttemptError> {
        let body = json!({
            "model": request.model_name,
            "messages": [{"role": "user", "content": request.prompt.text}],
            "temperature": request.sampling.temperature,
            "top_p": request.sampling.top_p,
            "max_tokens": request.sampling.max_tokens,
            "seed": request.seed,
        });
        let mut builder = self.client.post(&self.url).json(&body);
        if let Some(key) = &self.config.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().map_err(|e| {
            if e.is_timeout() {
                AttemptError::Transient(format!("timeout: {e}"))
            } else {
                AttemptError::Transient(e.to_string())
            }
        })?;

        let status = response.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(AttemptError::Auth(status.as_u16()));
        }
        if status.is_server_error() || status.as_u16() == 429 {
            return Err(AttemptError::Transient(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(AttemptError::Fatal(format!("HTTP {status}")));
        }

        let parsed: CompletionsResponse = response
            .json()
            .map_err(|e| AttemptError::Fatal(format!("malformed completions payload: {e}")))?;
        let content = parsed
            .choices
            .first()
            .and_then(|c| c.message.content.clone())
            .unwrap_or_default();
        Ok(content)
    }
}

enum AttemptError {
    /// Retry per policy: timeout, 5xx, 429.
    Transient(String),
    /// Stop immediately: bad credentials.
    Auth(u16),
    /// Stop immediately: anything else.
    Fatal(String),
}

impl ChatBackend for HttpBackend {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let started = Instant::now();
        let policy = &self.config.retry;
        let mut last_message = String::new();
        for attempt in 1..=policy.max_attempts {
            if attempt > 1 {
                std::thread::sleep(policy.backoff_before(attempt - 1));
            }
            match self.try_once(request) {
                Ok(raw_text) => {
                    return Ok(ChatResponse {
                        raw_text,
                        backend: BackendKind::Http,
                        latency: started.elapsed(),
                        attempt_count: attempt,
                    });
                }
                Err(AttemptError::Auth(status)) => {
                    return Err(GatewayError::AuthError { status });
                }
                Err(AttemptError::Fatal(message)) => {
                    return Err(GatewayError::TransportError {
                        attempts: attempt,
                        message,
                    });
                }
                Err(AttemptError::Transient(message)) => {
                    last_message = message;
                }
            }
        }
        Err(GatewayError::TransportError {
            attempts: policy.max_attempts,
            message: last_message,
        })
    }

    fn name(&self) -> &str {
        "http"
    }
}
