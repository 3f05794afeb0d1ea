//! Exercises the HTTP backend against a minimal in-process server speaking
//! just enough HTTP/1.1 and chat-completions JSON: request shape, bearer
//! auth, retry on 5xx, and auth failures.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use vsm_probe::gateway::{
    BackendKind, ChatBackend, ChatRequest, EndpointConfig, GatewayError, HttpBackend, RetryPolicy,
};
use vsm_probe::protocol::{
    build_prompt, identity_grid, Locale, SamplingParams,
};
use vsm_probe::questionnaire::{present_options, Questionnaire};

/// One canned HTTP status + body per incoming request, in order; the last
/// entry repeats. Captures request bodies for assertions.
struct StubServer {
    address: String,
    requests: Arc<Mutex<Vec<String>>>,
}

impl StubServer {
    fn start(responses: Vec<(u16, String)>) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind stub server");
        let address = format!("http://{}", listener.local_addr().unwrap());
        let requests = Arc::new(Mutex::new(Vec::new()));
        let captured = Arc::clone(&requests);
        let counter = AtomicUsize::new(0);
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut stream) = stream else { break };
                let mut buffer = Vec::new();
                let mut chunk = [0u8; 4096];
                // Read headers, then the content-length body.
                let body_start = loop {
                    match stream.read(&mut chunk) {
                        Ok(0) => break None,
                        Ok(n) => {
                            buffer.extend_from_slice(&chunk[..n]);
                            if let Some(pos) =
                                buffer.windows(4).position(|w| w == b"\r\n\r\n")
                            {
                                break Some(pos + 4);
                            }
                        }
                        Err(_) => break None,
                    }
                };
                let Some(body_start) = body_start else { continue };
                let headers = String::from_utf8_lossy(&buffer[..body_start]).to_string();
                let content_length = headers
                    .lines()
                    .find_map(|line| {
                        let (name, value) = line.split_once(':')?;
                        name.eq_ignore_ascii_case("content-length")
                            .then(|| value.trim().parse::<usize>().ok())?
                    })
                    .unwrap_or(0);
                while buffer.len() < body_start + content_length {
                    match stream.read(&mut chunk) {
                        Ok(0) => break,
                        Ok(n) => buffer.extend_from_slice(&chunk[..n]),
                        Err(_) => break,
                    }
                }
                let body =
                    String::from_utf8_lossy(&buffer[body_start..]).to_string();
                captured.lock().unwrap().push(format!("{headers}{body}"));

                let index = counter.fetch_add(1, Ordering::SeqCst);
                let (status, payload) = &responses[index.min(responses.len() - 1)];
                let reply = format!(
                    "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{payload}",
                    payload.len()
                );
                let _ = stream.write_all(reply.as_bytes());
            }
        });
        Self { address, requests }
    }
}

fn sample_request() -> ChatRequest {
    let bank = Questionnaire::load(Locale::English).unwrap();
    let question = bank.question(1).unwrap();
    let identity = identity_grid()[0];
    let presentation = present_options(question, false, 1);
    let prompt = build_prompt(
        question,
        &presentation,
        identity,
        Locale::English,
        Locale::English,
        1,
    )
    .unwrap();
    ChatRequest {
        model_name: "stub-model".into(),
        prompt,
        seed: 1,
        sampling: SamplingParams::default(),
    }
}

fn fast_retry_config(address: &str) -> EndpointConfig {
    let mut config = EndpointConfig::new(address);
    config.timeout = Duration::from_secs(5);
    config.retry = RetryPolicy {
        max_attempts: 3,
        initial_backoff: Duration::from_millis(10),
        backoff_factor: 2.0,
    };
    config
}

fn completion_body(content: &str) -> String {
    serde_json::json!({
        "choices": [{"message": {"role": "assistant", "content": content}}]
    })
    .to_string()
}

#[test]
fn happy_path_sends_openai_shape_and_extracts_content() {
    let server = StubServer::start(vec![(200, completion_body(r#"{"option": 2}"#))]);
    let mut config = fast_retry_config(&server.address);
    config.api_key = Some("secret-token".into());
    let backend = HttpBackend::new(config).unwrap();

    let response = backend.complete(&sample_request()).unwrap();
    assert_eq!(response.raw_text, r#"{"option": 2}"#);
    assert_eq!(response.backend, BackendKind::Http);
    assert_eq!(response.attempt_count, 1);

    let requests = server.requests.lock().unwrap();
    assert_eq!(requests.len(), 1);
    let request = &requests[0];
    assert!(request.starts_with("POST /v1/chat/completions"));
    assert!(request.contains("authorization: Bearer secret-token")
        || request.contains("Authorization: Bearer secret-token"));
    let body_start = request.find("\r\n\r\n").unwrap() + 4;
    let body: serde_json::Value = serde_json::from_str(&request[body_start..]).unwrap();
    assert_eq!(body["model"], "stub-model");
    assert_eq!(body["seed"], 1);
    assert_eq!(body["messages"][0]["role"], "user");
    assert!(body["messages"][0]["content"]
        .as_str()
        .unwrap()
        .contains("ideal job"));
    assert_eq!(body["max_tokens"], 512);
}

#[test]
fn transient_failures_are_retried() {
    let server = StubServer::start(vec![
        (500, "{}".into()),
        (429, "{}".into()),
        (200, completion_body("ok")),
    ]);
    let backend = HttpBackend::new(fast_retry_config(&server.address)).unwrap();
    let response = backend.complete(&sample_request()).unwrap();
    assert_eq!(response.raw_text, "ok");
    assert_eq!(response.attempt_count, 3);
}

#[test]
fn retries_exhaust_into_transport_error() {
    let server = StubServer::start(vec![(503, "{}".into())]);
    let backend = HttpBackend::new(fast_retry_config(&server.address)).unwrap();
    let err = backend.complete(&sample_request()).unwrap_err();
    match err {
        GatewayError::TransportError { attempts, .. } => assert_eq!(attempts, 3),
        other => panic!("expected TransportError, got {other:?}"),
    }
}

#[test]
fn auth_failures_are_not_retried() {
    let server = StubServer::start(vec![(401, "{}".into())]);
    let backend = HttpBackend::new(fast_retry_config(&server.address)).unwrap();
    let err = backend.complete(&sample_request()).unwrap_err();
    match err {
        GatewayError::AuthError { status } => assert_eq!(status, 401),
        other => panic!("expected AuthError, got {other:?}"),
    }
    assert_eq!(server.requests.lock().unwrap().len(), 1);
}

#[test]
fn empty_content_is_recorded_verbatim() {
    let server = StubServer::start(vec![(200, completion_body(""))]);
    let backend = HttpBackend::new(fast_retry_config(&server.address)).unwrap();
    let response = backend.complete(&sample_request()).unwrap();
    assert_eq!(response.raw_text, "");
}
