//! Completion backends: the n-gram baseline, a copy-truth oracle, and
//! adapters for HTTP completion endpoints and line-protocol subprocesses.

mod http;
mod ngram;
mod subprocess;

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::syntax::{detokenize, lex, Language};

pub use http::{HttpBackend, HttpConfig, TOKEN_ENV};
pub use ngram::{train_ngram, NgramConfig, NgramModel, BOS, EOS, UNK};
pub use subprocess::{SubprocessBackend, SubprocessConfig};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("token sequence is empty")]
    EmptySequence,
    #[error("invalid model configuration: {0}")]
    InvalidConfig(String),
    #[error("bad model file: {0}")]
    BadModelFile(String),
    #[error("{0}: {1}")]
    Io(String, #[source] std::io::Error),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackendError {
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("request failed: {0}")]
    Transport(String),
    #[error("request timed out after {attempts} attempts")]
    Timeout { attempts: u32 },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("could not start backend process: {0}")]
    Spawn(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("backend process exited: {0}")]
    ChildExited(String),
    #[error("no completion for task {0}")]
    UnknownTask(String),
}

/// One completion call. Prompts are lexical tokens; text backends receive
/// them detokenized.
#[derive(Debug, Clone, Copy)]
pub struct CompletionRequest<'a> {
    pub task_id: &'a str,
    pub prompt: &'a [String],
    pub language: Language,
    pub max_new_tokens: usize,
    pub temperature: f64,
    pub seed: u64,
}

impl CompletionRequest<'_> {
    pub fn prompt_text(&self) -> String {
        detokenize(self.prompt)
    }
}

pub trait CompletionBackend: Send + Sync {
    fn name(&self) -> &str;

    fn complete(&self, request: &CompletionRequest<'_>) -> Result<Vec<String>, BackendError>;

    /// Per-token natural-log probabilities, when the backend can score text.
    fn logprobs(&self, _tokens: &[String]) -> Option<Vec<f64>> {
        None
    }

    /// Requests the harness may keep in flight at once.
    fn max_in_flight(&self) -> usize {
        1
    }
}

/// Lex a text completion into tokens.
pub fn completion_tokens(text: &str, language: Language) -> Vec<String> {
    lex(text, language).into_iter().map(|t| t.text).collect()
}

pub struct NgramBackend {
    name: String,
    model: Arc<NgramModel>,
}

impl NgramBackend {
    pub fn new(name: impl Into<String>, model: Arc<NgramModel>) -> Self {
        NgramBackend { name: name.into(), model }
    }
}

impl CompletionBackend for NgramBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, r: &CompletionRequest<'_>) -> Result<Vec<String>, BackendError> {
        Ok(self.model.generate(r.prompt, r.max_new_tokens, r.temperature, r.seed))
    }

    fn logprobs(&self, tokens: &[String]) -> Option<Vec<f64>> {
        self.model.logprobs(tokens).ok()
    }

    fn max_in_flight(&self) -> usize {
        rayon::current_num_threads()
    }
}

/// Returns the ground-truth continuation of each task.
pub struct OracleBackend {
    truth: HashMap<String, Vec<String>>,
}

impl OracleBackend {
    pub fn new(truth: impl IntoIterator<Item = (String, Vec<String>)>) -> Self {
        OracleBackend { truth: truth.into_iter().collect() }
    }
}

impl CompletionBackend for OracleBackend {
    fn name(&self) -> &str {
        "oracle"
    }

    fn complete(&self, r: &CompletionRequest<'_>) -> Result<Vec<String>, BackendError> {
        let t = self
            .truth
            .get(r.task_id)
            .ok_or_else(|| BackendError::UnknownTask(r.task_id.to_owned()))?;
        Ok(t.iter().take(r.max_new_tokens).cloned().collect())
    }

    fn max_in_flight(&self) -> usize {
        rayon::current_num_threads()
    }
}
