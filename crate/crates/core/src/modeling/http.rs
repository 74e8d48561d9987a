use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use reqwest::blocking::Client;
use serde::{Deserialize, Serialize};

use super::{completion_tokens, BackendError, CompletionBackend, CompletionRequest};

/// Environment variable holding the bearer token.
pub const TOKEN_ENV: &str = "HCP_API_TOKEN";

#[derive(Debug, Clone)]
pub struct HttpConfig {
    pub base_url: String,
    pub model: String,
    pub timeout: Duration,
    pub max_attempts: u32,
    /// Delay before the first retry; doubled for each further attempt.
    pub initial_backoff: Duration,
    pub api_token: Option<String>,
    pub max_in_flight: usize,
    /// Minimum spacing between request starts.
    pub min_interval: Option<Duration>,
}

impl HttpConfig {
    pub fn new(base_url: impl Into<String>) -> Self {
        HttpConfig {
            base_url: base_url.into(),
            model: "default".to_owned(),
            timeout: Duration::from_secs(60),
            max_attempts: 3,
            initial_backoff: Duration::from_millis(500),
            api_token: std::env::var(TOKEN_ENV).ok().filter(|t| !t.is_empty()),
            max_in_flight: 4,
            min_interval: None,
        }
    }
}

#[derive(Serialize)]
struct CompletionBody<'a> {
    model: &'a str,
    prompt: &'a str,
    max_tokens: usize,
    temperature: f64,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    text: String,
}

/// Client for an OpenAI-style `/v1/completions` endpoint.
pub struct HttpBackend {
    name: String,
    config: HttpConfig,
    client: Client,
    next_slot: Mutex<Instant>,
}

enum Attempt {
    Done(String),
    Retry(BackendError),
    Fail(BackendError),
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Result<Self, BackendError> {
        let client = Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(HttpBackend {
            name: format!("http:{}", config.base_url),
            config,
            client,
            next_slot: Mutex::new(Instant::now()),
        })
    }

    fn endpoint(&self) -> String {
        format!("{}/v1/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn throttle(&self) {
        let Some(gap) = self.config.min_interval else { return };
        let wait = {
            let mut slot = self.next_slot.lock().expect("rate limiter lock");
            let now = Instant::now();
            let start = (*slot).max(now);
            *slot = start + gap;
            start - now
        };
        if !wait.is_zero() {
            thread::sleep(wait);
        }
    }

    fn attempt(&self, body: &CompletionBody<'_>) -> Attempt {
        self.throttle();
        let payload = serde_json::to_vec(body).expect("request body serializes");
        let mut req = self
            .client
            .post(self.endpoint())
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(payload);
        if let Some(token) = &self.config.api_token {
            req = req.bearer_auth(token);
        }
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) if e.is_timeout() => return Attempt::Retry(BackendError::Timeout { attempts: 0 }),
            Err(e) => return Attempt::Retry(BackendError::Transport(e.to_string())),
        };
        let status = resp.status();
        let text: String = match resp.text() {
            Ok(t) => t,
            Err(e) if e.is_timeout() => return Attempt::Retry(BackendError::Timeout { attempts: 0 }),
            Err(e) => return Attempt::Retry(BackendError::Transport(e.to_string())),
        };
        if !status.is_success() {
            let err = BackendError::Http { status: status.as_u16(), body: excerpt(&text) };
            return if status.is_server_error() || status.as_u16() == 429 {
                Attempt::Retry(err)
            } else {
                Attempt::Fail(err)
            };
        }
        match serde_json::from_str::<CompletionResponse>(&text) {
            Ok(r) => match r.choices.into_iter().next() {
                Some(c) => Attempt::Done(c.text),
                None => Attempt::Fail(BackendError::MalformedResponse("no choices".into())),
            },
            Err(e) => Attempt::Fail(BackendError::MalformedResponse(format!("{e}: {}", excerpt(&text)))),
        }
    }

    /// Completion text for a text prompt, retrying transient failures.
    pub fn complete_text(&self, prompt: &str, max_tokens: usize, temperature: f64) -> Result<String, BackendError> {
        let body = CompletionBody { model: &self.config.model, prompt, max_tokens, temperature };
        let attempts = self.config.max_attempts.max(1);
        let mut delay = self.config.initial_backoff;
        let mut last = BackendError::Transport("no attempt made".into());
        for i in 1..=attempts {
            match self.attempt(&body) {
                Attempt::Done(text) => return Ok(text),
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(e) => {
                    log::debug!("attempt {i}/{attempts} failed: {e}");
                    last = e;
                }
            }
            if i < attempts {
                thread::sleep(delay);
                delay *= 2;
            }
        }
        Err(match last {
            BackendError::Timeout { .. } => BackendError::Timeout { attempts },
            other => other,
        })
    }
}

fn excerpt(body: &str) -> String {
    const MAX: usize = 200;
    match body.char_indices().nth(MAX) {
        Some((i, _)) => format!("{}...", &body[..i]),
        None => body.to_owned(),
    }
}

impl CompletionBackend for HttpBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, r: &CompletionRequest<'_>) -> Result<Vec<String>, BackendError> {
        let text = self.complete_text(&r.prompt_text(), r.max_new_tokens, r.temperature)?;
        Ok(completion_tokens(&text, r.language))
    }

    fn max_in_flight(&self) -> usize {
        self.config.max_in_flight.max(1)
    }
}
