use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CorpusError, FunctionRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionConfig {
    pub cap: usize,
    pub seed: u64,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        PartitionConfig { cap: 20_000, seed: 0 }
    }
}

/// General (pragmas removed) and OpenMP (pragmas kept) evaluation sets drawn
/// from the same sample of OpenMP-bearing records.
#[derive(Debug, Default)]
pub struct Partition {
    pub general: Vec<FunctionRecord>,
    pub openmp: Vec<FunctionRecord>,
    /// Set when fewer OpenMP records exist than the cap asks for.
    pub shortfall: Option<CorpusError>,
}

fn is_omp_line(line: &str) -> bool {
    let t = line.trim_start();
    let Some(rest) = t.strip_prefix('#') else { return false };
    let Some(rest) = rest.trim_start().strip_prefix("pragma") else { return false };
    let rest = rest.trim_start();
    rest.starts_with("omp") && rest[3..].chars().next().is_none_or(|c| !(c.is_alphanumeric() || c == '_'))
}

/// Remove every `#pragma omp` line together with its continuation lines.
pub fn strip_openmp_pragmas(code: &str) -> String {
    let mut out: Vec<&str> = Vec::new();
    let mut continuing = false;
    for line in code.lines() {
        if continuing {
            continuing = line.trim_end().ends_with('\\');
            continue;
        }
        if is_omp_line(line) {
            continuing = line.trim_end().ends_with('\\');
            continue;
        }
        out.push(line);
    }
    out.join("\n")
}

fn general_copy(record: &FunctionRecord) -> FunctionRecord {
    let mut copy = record.clone().with_code(strip_openmp_pragmas(&record.code));
    copy.lse_code = record.lse_code.as_deref().map(strip_openmp_pragmas);
    copy.has_openmp = false;
    copy
}

pub fn partition_openmp(records: &[FunctionRecord], config: &PartitionConfig) -> Partition {
    let pool: Vec<&FunctionRecord> = records.iter().filter(|r| r.has_openmp).collect();
    let shortfall = if pool.len() < config.cap {
        let err = CorpusError::InsufficientRecords { available: pool.len(), requested: config.cap };
        log::warn!("{err}");
        Some(err)
    } else {
        None
    };
    let mut picked: Vec<usize> = (0..pool.len()).collect();
    if pool.len() > config.cap {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        picked.shuffle(&mut rng);
        picked.truncate(config.cap);
        picked.sort_unstable();
    }
    let openmp: Vec<FunctionRecord> = picked.iter().map(|&i| pool[i].clone()).collect();
    let general = openmp.iter().map(general_copy).collect();
    Partition { general, openmp, shortfall }
}
