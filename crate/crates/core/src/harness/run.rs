use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lse::record_seed;
use crate::modeling::{BackendError, CompletionBackend, CompletionRequest};

use super::{EvalTask, HarnessError};

/// A task with its completion, as stored in the journal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskResult {
    #[serde(flatten)]
    pub task: EvalTask,
    pub backend: String,
    pub completion: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub temperature: f64,
    /// Combined with each task id to seed sampling.
    pub seed: u64,
    pub batch_size: usize,
    /// Overrides the backend's own in-flight limit.
    pub max_in_flight: Option<usize>,
    /// Stop after this many new tasks; the journal can be resumed later.
    pub limit: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { temperature: 0.0, seed: 0, batch_size: 64, max_in_flight: None, limit: None }
    }
}

fn parse_lines(path: &Path, text: &str) -> Result<Vec<TaskResult>, HarnessError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(line).map_err(|e| HarnessError::Json {
            path: path.to_owned(),
            line: i + 1,
            source: e,
        })?;
        out.push(r);
    }
    Ok(out)
}

/// Complete entries of a journal. A final line cut short by a crash is
/// ignored.
pub fn read_journal(path: &Path) -> Result<Vec<TaskResult>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let complete = &text[..text.rfind('\n').map_or(0, |i| i + 1)];
    parse_lines(path, complete)
}

/// Load a journal for resumption, cutting off any torn final line.
fn recover_journal(path: &Path) -> Result<Vec<TaskResult>, HarnessError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let keep = text.rfind('\n').map_or(0, |i| i + 1);
    if keep < text.len() {
        log::warn!("{}: dropping torn final entry", path.display());
        let f = OpenOptions::new().write(true).open(path).map_err(|e| HarnessError::io(path, e))?;
        f.set_len(keep as u64).map_err(|e| HarnessError::io(path, e))?;
    }
    parse_lines(path, &text[..keep])
}

fn run_one(task: &EvalTask, backend: &dyn CompletionBackend, config: &RunConfig) -> Result<Vec<String>, BackendError> {
    let want = task.reference_tokens.len();
    let request = CompletionRequest {
        task_id: &task.task_id,
        prompt: &task.prompt_tokens,
        language: task.language,
        max_new_tokens: want,
        temperature: config.temperature,
        seed: record_seed(config.seed, &task.task_id),
    };
    let mut tokens = backend.complete(&request)?;
    tokens.truncate(want);
    Ok(tokens)
}

/// Run `backend` over `tasks`, returning results in task order.
///
/// With a journal, tasks already recorded there are not rerun and new
/// results are appended batch by batch, so an interrupted run continues
/// where it stopped. Per-task failures are recorded; the run aborts only
/// when a whole batch fails.
pub fn run_eval(
    tasks: &[EvalTask],
    backend: &dyn CompletionBackend,
    config: &RunConfig,
    journal: Option<&Path>,
) -> Result<Vec<TaskResult>, HarnessError> {
    let by_id: HashMap<&str, &EvalTask> = tasks.iter().map(|t| (t.task_id.as_str(), t)).collect();
    let mut done: HashMap<String, TaskResult> = HashMap::new();
    if let Some(path) = journal {
        for entry in recover_journal(path)? {
            let matches = by_id.get(entry.task.task_id.as_str()).is_some_and(|t| **t == entry.task)
                && entry.backend == backend.name();
            if !matches {
                return Err(HarnessError::JournalMismatch(entry.task.task_id));
            }
            done.insert(entry.task.task_id.clone(), entry);
        }
    }
    let mut writer = match journal {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
            }
            let f: File = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| HarnessError::io(path, e))?;
            Some((path, f))
        }
        None => None,
    };

    let pending: Vec<&EvalTask> = tasks
        .iter()
        .filter(|t| !done.contains_key(&t.task_id))
        .take(config.limit.unwrap_or(usize::MAX))
        .collect();
    let threads = config.max_in_flight.unwrap_or_else(|| backend.max_in_flight()).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool builds");

    for (b, batch) in pending.chunks(config.batch_size.max(1)).enumerate() {
        let outcomes: Vec<Result<Vec<String>, BackendError>> =
            pool.install(|| batch.par_iter().map(|t| run_one(t, backend, config)).collect());
        if let Some(Err(first)) = outcomes.first() {
            if outcomes.iter().all(|o| o.is_err()) {
                return Err(HarnessError::BackendDown { batch: b, error: first.clone() });
            }
        }
        let mut lines = String::new();
        for (task, outcome) in batch.iter().zip(outcomes) {
            let (completion, error) = match outcome {
                Ok(c) => (c, None),
                Err(e) => {
                    log::warn!("{}: {e}", task.task_id);
                    (Vec::new(), Some(e.to_string()))
                }
            };
            let result = TaskResult { task: (*task).clone(), backend: backend.name().to_owned(), completion, error };
            if writer.is_some() {
                lines.push_str(&serde_json::to_string(&result).expect("result serializes"));
                lines.push('\n');
            }
            done.insert(task.task_id.clone(), result);
        }
        if let Some((path, f)) = writer.as_mut() {
            f.write_all(lines.as_bytes())
                .and_then(|_| f.flush())
                .map_err(|e| HarnessError::io(*path, e))?;
        }
        log::info!("batch {b}: {} tasks done", done.len());
    }

    Ok(tasks.iter().filter_map(|t| done.remove(&t.task_id)).collect())
}
