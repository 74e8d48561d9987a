use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::FunctionRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterConfig {
    /// Records need strictly more tokens than this.
    pub min_tokens: usize,
    /// Records need strictly fewer code bytes than this.
    pub max_bytes: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig { min_tokens: 100, max_bytes: 1_048_576 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterCounts {
    pub too_small: usize,
    pub too_large: usize,
}

pub fn filter_records(
    records: Vec<FunctionRecord>,
    config: &FilterConfig,
) -> (Vec<FunctionRecord>, FilterCounts) {
    let mut counts = FilterCounts::default();
    let accepted = records
        .into_iter()
        .filter(|r| {
            if r.token_count <= config.min_tokens {
                counts.too_small += 1;
                false
            } else if r.code.len() >= config.max_bytes {
                counts.too_large += 1;
                false
            } else {
                true
            }
        })
        .collect();
    (accepted, counts)
}

/// Keeps the first record of each content hash, preserving order.
pub fn deduplicate(records: Vec<FunctionRecord>) -> (Vec<FunctionRecord>, usize) {
    let mut seen = HashSet::new();
    let before = records.len();
    let unique: Vec<FunctionRecord> = records
        .into_iter()
        .filter(|r| seen.insert(r.content_hash.clone()))
        .collect();
    let dups = before - unique.len();
    (unique, dups)
}
