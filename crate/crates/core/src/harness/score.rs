use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metrics::{codebleu, CodeBleuWeights, ScoreRecord};
use crate::syntax::detokenize;

use super::{Dataset, TaskResult, Variant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub weights: CodeBleuWeights,
}

/// Score of one task, or the reason it has none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskScore {
    pub task_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<ScoreRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    /// Tasks that contributed to the means.
    pub count: usize,
    /// Tasks excluded because generation or scoring failed.
    pub errors: usize,
    /// Component means over scored tasks; `None` for an all-error cell.
    pub mean: Option<ScoreRecord>,
    /// Population standard deviation of the aggregate score.
    pub std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    pub dataset: Dataset,
    pub backend: String,
    pub variant: Variant,
    pub context_len: usize,
    #[serde(flatten)]
    pub stats: CellStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ReportConfig,
    /// Sorted by dataset, backend name, variant (raw first) and context.
    pub cells: Vec<ReportCell>,
    pub tasks: Vec<TaskScore>,
}

impl EvalReport {
    pub fn cell(&self, dataset: Dataset, backend: &str, variant: Variant, context_len: usize) -> Option<&ReportCell> {
        self.cells.iter().find(|c| {
            c.dataset == dataset && c.backend == backend && c.variant == variant && c.context_len == context_len
        })
    }
}

fn score_one(r: &TaskResult, weights: &CodeBleuWeights) -> TaskScore {
    let outcome = match &r.error {
        Some(e) => Err(e.clone()),
        None => {
            let candidate: Vec<&String> = r.task.prompt_tokens.iter().chain(&r.completion).collect();
            let reference: Vec<&String> = r.task.full_tokens().collect();
            codebleu(&detokenize(&candidate), &detokenize(&reference), r.task.language, weights)
                .map(|s| ScoreRecord::from(&s))
                .map_err(|e| format!("scoring failed: {e}"))
        }
    };
    match outcome {
        Ok(score) => TaskScore { task_id: r.task.task_id.clone(), score: Some(score), error: None },
        Err(error) => TaskScore { task_id: r.task.task_id.clone(), score: None, error: Some(error) },
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn cell_stats(scores: &[&ScoreRecord], errors: usize) -> CellStats {
    if scores.is_empty() {
        return CellStats { count: 0, errors, mean: None, std: None };
    }
    let m = ScoreRecord {
        bleu: mean(scores.iter().map(|s| s.bleu)).unwrap_or(0.0),
        weighted: mean(scores.iter().map(|s| s.weighted)).unwrap_or(0.0),
        ast: mean(scores.iter().filter_map(|s| s.ast)),
        dataflow: mean(scores.iter().filter_map(|s| s.dataflow)),
        codebleu: mean(scores.iter().map(|s| s.codebleu)).unwrap_or(0.0),
    };
    let var = mean(scores.iter().map(|s| (s.codebleu - m.codebleu).powi(2))).unwrap_or(0.0);
    CellStats { count: scores.len(), errors, mean: Some(m), std: Some(var.sqrt()) }
}

/// Score every result against its reference and aggregate per cell.
///
/// Both sides are scored with the prompt prepended, so a bare continuation
/// is judged in the context of its function.
pub fn score_results(results: &[TaskResult], weights: &CodeBleuWeights) -> EvalReport {
    let tasks: Vec<TaskScore> = results.par_iter().map(|r| score_one(r, weights)).collect();

    type Key = (Dataset, String, Variant, usize);
    let mut groups: BTreeMap<Key, (Vec<&ScoreRecord>, usize)> = BTreeMap::new();
    for (r, s) in results.iter().zip(&tasks) {
        let key = (r.task.dataset, r.backend.clone(), r.task.variant, r.task.context_len);
        let entry = groups.entry(key).or_default();
        match &s.score {
            Some(score) => entry.0.push(score),
            None => entry.1 += 1,
        }
    }
    let cells = groups
        .into_iter()
        .map(|((dataset, backend, variant, context_len), (scores, errors))| ReportCell {
            dataset,
            backend,
            variant,
            context_len,
            stats: cell_stats(&scores, errors),
        })
        .collect();
    EvalReport { config: ReportConfig { weights: *weights }, cells, tasks }
}
