use serde::{Deserialize, Serialize};

use crate::corpus::FunctionRecord;
use crate::lse::{apply_lse, record_seed, LseConfig};
use crate::syntax::{lex, Language};

use super::{Dataset, Variant};

pub const DEFAULT_CONTEXT_LENS: [usize; 3] = [100, 300, 600];

/// A prompt of the first `context_len` tokens of a function and the true
/// remainder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalTask {
    pub task_id: String,
    pub record_id: String,
    pub dataset: Dataset,
    pub variant: Variant,
    pub context_len: usize,
    pub language: Language,
    pub prompt_tokens: Vec<String>,
    pub reference_tokens: Vec<String>,
}

impl EvalTask {
    pub fn full_tokens(&self) -> impl Iterator<Item = &String> {
        self.prompt_tokens.iter().chain(&self.reference_tokens)
    }
}

#[derive(Debug, Clone)]
pub struct TaskConfig {
    pub context_lens: Vec<usize>,
    pub variants: Vec<Variant>,
    /// The seed is combined with each record id.
    pub lse: LseConfig,
}

impl Default for TaskConfig {
    fn default() -> Self {
        TaskConfig {
            context_lens: DEFAULT_CONTEXT_LENS.to_vec(),
            variants: vec![Variant::Raw, Variant::Lse],
            lse: LseConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TaskSet {
    pub tasks: Vec<EvalTask>,
    /// Records with no more tokens than the longest context.
    pub skipped_short: usize,
    /// Records the LSE transform rejected; their raw tasks are kept.
    pub skipped_lse: usize,
}

impl TaskSet {
    pub fn extend(&mut self, other: TaskSet) {
        self.tasks.extend(other.tasks);
        self.skipped_short += other.skipped_short;
        self.skipped_lse += other.skipped_lse;
    }
}

fn tokens(code: &str, language: Language) -> Vec<String> {
    lex(code, language).into_iter().map(|t| t.text).collect()
}

/// One task per (record, variant, context length), in record order.
///
/// The LSE variant splits the transformed function, so prompt and reference
/// share one anonymization map. A stored `lse_code` is used when present;
/// otherwise the transform runs with a seed derived from the record id.
pub fn make_tasks(records: &[FunctionRecord], dataset: Dataset, config: &TaskConfig) -> TaskSet {
    let mut lens = config.context_lens.clone();
    lens.sort_unstable();
    lens.dedup();
    let longest = lens.last().copied().unwrap_or(0);
    let mut variants = config.variants.clone();
    variants.sort_unstable();
    variants.dedup();

    let mut set = TaskSet::default();
    for record in records {
        if record.token_count <= longest {
            set.skipped_short += 1;
            continue;
        }
        for &variant in &variants {
            let full = match variant {
                Variant::Raw => tokens(&record.code, record.language),
                Variant::Lse => {
                    let code = match &record.lse_code {
                        Some(c) => Ok(c.clone()),
                        None => {
                            let cfg = config.lse.clone().with_seed(record_seed(config.lse.seed, &record.id));
                            apply_lse(&record.code, record.language, &cfg)
                        }
                    };
                    match code {
                        Ok(c) => tokens(&c, record.language),
                        Err(e) => {
                            log::warn!("{}: LSE failed: {e}", record.id);
                            set.skipped_lse += 1;
                            continue;
                        }
                    }
                }
            };
            if full.len() <= longest {
                set.skipped_short += 1;
                continue;
            }
            for &len in &lens {
                set.tasks.push(EvalTask {
                    task_id: format!("{dataset}/{}/{variant}/{len}", record.id),
                    record_id: record.id.clone(),
                    dataset,
                    variant,
                    context_len: len,
                    language: record.language,
                    prompt_tokens: full[..len].to_vec(),
                    reference_tokens: full[len..].to_vec(),
                });
            }
        }
    }
    set
}
