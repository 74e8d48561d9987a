//! Context-split evaluation: task construction, backend runs with a
//! resumable journal, CodeBLEU scoring and report rendering.

mod report;
mod run;
mod score;
mod tasks;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::CorpusError;
use crate::modeling::BackendError;

pub use report::{parse_report, render_report, ReportFormat};
pub use run::{read_journal, run_eval, RunConfig, TaskResult};
pub use score::{score_results, CellStats, EvalReport, ReportCell, ReportConfig, TaskScore};
pub use tasks::{make_tasks, EvalTask, TaskConfig, TaskSet, DEFAULT_CONTEXT_LENS};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {source}")]
    Json {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("every task in batch {batch} failed, backend presumed down: {error}")]
    BackendDown { batch: usize, error: BackendError },
    #[error("journal entry {0} belongs to a different task set")]
    JournalMismatch(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Raw,
    Lse,
}

/// Evaluation set a task was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dataset {
    General,
    Openmp,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Raw => "raw",
            Variant::Lse => "lse",
        }
    }
}

impl Dataset {
    pub fn as_str(self) -> &'static str {
        match self {
            Dataset::General => "general",
            Dataset::Openmp => "openmp",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Dataset::General => "General",
            Dataset::Openmp => "OpenMP",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Dataset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "raw" => Ok(Variant::Raw),
            "lse" => Ok(Variant::Lse),
            _ => Err(format!("unknown variant {s:?} (expected raw or lse)")),
        }
    }
}

impl FromStr for Dataset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "general" => Ok(Dataset::General),
            "openmp" => Ok(Dataset::Openmp),
            _ => Err(format!("unknown dataset {s:?} (expected general or openmp)")),
        }
    }
}
