//! Function-level corpus: extraction from source trees, size filters,
//! deduplication, OpenMP partitioning, repo-disjoint splits and manifests.

mod extract;
mod filter;
mod manifest;
mod partition;
mod pipeline;
mod split;
mod store;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::syntax::{lex, normalized_text, Language};

pub use extract::{extract_functions, Extraction};
pub use filter::{deduplicate, filter_records, FilterConfig, FilterCounts};
pub use manifest::{compute_manifest, CorpusManifest, FilterCounters, LanguageStats, SplitSizes};
pub use partition::{partition_openmp, strip_openmp_pragmas, Partition, PartitionConfig};
pub use pipeline::{ingest_dir, run_prep, Ingested, PrepConfig, PrepOutput};
pub use split::{split_dataset, Splits};
pub use store::{read_jsonl, read_records, write_jsonl, write_records, SHARD_SIZE};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("split ratios must be nonnegative and sum to 1, got {0:?}")]
    BadRatios([f64; 3]),
    #[error("only {available} OpenMP records available, {requested} requested")]
    InsufficientRecords { available: usize, requested: usize },
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
}

impl CorpusError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CorpusError::Io { path: path.into(), source }
    }
}

/// One extracted function; serialized with the short field names used on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionRecord {
    pub id: String,
    pub repo: String,
    pub path: String,
    #[serde(rename = "lang")]
    pub language: Language,
    pub code: String,
    #[serde(rename = "tokens")]
    pub token_count: usize,
    #[serde(rename = "sha256")]
    pub content_hash: String,
    #[serde(rename = "openmp")]
    pub has_openmp: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lse_code: Option<String>,
}

impl FunctionRecord {
    /// Builds a record, deriving token count and hash from `code`.
    pub fn new(
        id: impl Into<String>,
        repo: impl Into<String>,
        path: impl Into<String>,
        language: Language,
        code: impl Into<String>,
        has_openmp: bool,
    ) -> Self {
        let code = code.into();
        FunctionRecord {
            id: id.into(),
            repo: repo.into(),
            path: path.into(),
            language,
            token_count: lex(&code, language).len(),
            content_hash: content_hash(&code, language),
            code,
            has_openmp,
            lse_code: None,
        }
    }

    /// Replace the code and recompute the derived fields.
    pub fn with_code(mut self, code: String) -> Self {
        self.token_count = lex(&code, self.language).len();
        self.content_hash = content_hash(&code, self.language);
        self.code = code;
        self
    }
}

/// SHA-256 (hex) of the comment-free, whitespace-normalised token text.
pub fn content_hash(code: &str, language: Language) -> String {
    hex::encode(Sha256::digest(normalized_text(code, language).as_bytes()))
}
