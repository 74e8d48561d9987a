use std::io::{BufRead, BufReader, Read, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{completion_tokens, BackendError, CompletionBackend, CompletionRequest};

#[derive(Debug, Clone)]
pub struct SubprocessConfig {
    /// Shell command line, run with `sh -c`.
    pub command: String,
    /// How long to wait for each response line.
    pub timeout: Duration,
}

impl SubprocessConfig {
    pub fn new(command: impl Into<String>) -> Self {
        SubprocessConfig { command: command.into(), timeout: Duration::from_secs(300) }
    }
}

#[derive(Serialize)]
struct RequestLine<'a> {
    id: &'a str,
    prompt: &'a str,
    max_tokens: usize,
}

#[derive(Deserialize)]
struct ResponseLine {
    id: String,
    completion: String,
}

struct Running {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<Option<String>>,
    stderr: Arc<Mutex<String>>,
}

impl Running {
    fn spawn(command: &str) -> Result<Self, BackendError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| BackendError::Spawn(format!("{command}: {e}")))?;
        let stdin = child.stdin.take().expect("stdin is piped");
        let stdout = child.stdout.take().expect("stdout is piped");
        let mut stderr_pipe = child.stderr.take().expect("stderr is piped");

        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                match line {
                    Ok(l) => {
                        if tx.send(Some(l)).is_err() {
                            return;
                        }
                    }
                    Err(_) => break,
                }
            }
            let _ = tx.send(None);
        });
        let stderr = Arc::new(Mutex::new(String::new()));
        let sink = Arc::clone(&stderr);
        thread::spawn(move || {
            let mut buf = [0u8; 4096];
            while let Ok(n) = stderr_pipe.read(&mut buf) {
                if n == 0 {
                    break;
                }
                let mut s = sink.lock().expect("stderr buffer lock");
                s.push_str(&String::from_utf8_lossy(&buf[..n]));
                if s.len() > 8192 {
                    let cut = s.len() - 4096;
                    let cut = (cut..s.len()).find(|&i| s.is_char_boundary(i)).unwrap_or(s.len());
                    s.drain(..cut);
                }
            }
        });
        Ok(Running { child, stdin, lines, stderr })
    }

    fn diagnostic(&mut self) -> String {
        // Give the stderr reader a moment to drain after exit.
        thread::sleep(Duration::from_millis(50));
        let status = match self.child.try_wait() {
            Ok(Some(s)) => s.to_string(),
            _ => "still running".to_owned(),
        };
        let tail = self.stderr.lock().expect("stderr buffer lock").trim().to_owned();
        if tail.is_empty() {
            status
        } else {
            format!("{status}; stderr: {tail}")
        }
    }
}

impl Drop for Running {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// Talks a JSON-lines protocol with a long-lived child process, one request
/// at a time. A child that dies is restarted on the next request.
pub struct SubprocessBackend {
    name: String,
    config: SubprocessConfig,
    child: Mutex<Option<Running>>,
}

impl SubprocessBackend {
    pub fn new(config: SubprocessConfig) -> Self {
        SubprocessBackend {
            name: format!("subprocess:{}", config.command),
            config,
            child: Mutex::new(None),
        }
    }

    pub fn complete_text(&self, id: &str, prompt: &str, max_tokens: usize) -> Result<String, BackendError> {
        let mut slot = self.child.lock().expect("subprocess lock");
        if slot.is_none() {
            *slot = Some(Running::spawn(&self.config.command)?);
        }
        let running = slot.as_mut().expect("child just spawned");
        let result = exchange(running, id, prompt, max_tokens, self.config.timeout);
        if matches!(result, Err(BackendError::ChildExited(_)) | Err(BackendError::Protocol(_))) {
            *slot = None;
        }
        result
    }
}

fn exchange(
    running: &mut Running,
    id: &str,
    prompt: &str,
    max_tokens: usize,
    timeout: Duration,
) -> Result<String, BackendError> {
    let line = serde_json::to_string(&RequestLine { id, prompt, max_tokens })
        .expect("request line serializes");
    let write = running
        .stdin
        .write_all(line.as_bytes())
        .and_then(|_| running.stdin.write_all(b"\n"))
        .and_then(|_| running.stdin.flush());
    if write.is_err() {
        return Err(BackendError::ChildExited(running.diagnostic()));
    }
    let reply = match running.lines.recv_timeout(timeout) {
        Ok(Some(l)) => l,
        Ok(None) | Err(RecvTimeoutError::Disconnected) => {
            return Err(BackendError::ChildExited(running.diagnostic()))
        }
        Err(RecvTimeoutError::Timeout) => {
            return Err(BackendError::Protocol(format!("no response within {timeout:?}")))
        }
    };
    let resp: ResponseLine = serde_json::from_str(&reply)
        .map_err(|e| BackendError::Protocol(format!("{e}: {}", reply.chars().take(200).collect::<String>())))?;
    if resp.id != id {
        return Err(BackendError::Protocol(format!("response id {:?} does not match {id:?}", resp.id)));
    }
    Ok(resp.completion)
}

impl CompletionBackend for SubprocessBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn complete(&self, r: &CompletionRequest<'_>) -> Result<Vec<String>, BackendError> {
        let text = self.complete_text(r.task_id, &r.prompt_text(), r.max_new_tokens)?;
        Ok(completion_tokens(&text, r.language))
    }
}
