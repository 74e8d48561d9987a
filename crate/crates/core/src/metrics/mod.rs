//! Perplexity, CodeBLEU and its components, and model-budget estimates.

mod ast;
mod budget;
mod codebleu;
mod dataflow;
mod ngram;
mod perplexity;

use thiserror::Error;

pub use ast::{ast_match, ast_match_trees, subtree_count};
pub use budget::{estimate_params, estimate_ram, format_gb, ModelBudget};
pub use codebleu::{codebleu, CodeBleuScore, CodeBleuWeights, ScoreRecord};
pub use dataflow::{dataflow_edges, dataflow_match, dataflow_match_trees, DefUseEdge};
pub use ngram::{bleu, weighted_ngram_match, KeywordSet, BLEU_EPSILON, KEYWORD_WEIGHT};
pub use perplexity::{normalized_perplexity, perplexity, PerplexityReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("log-probability sequence is empty")]
    EmptySequence,
    #[error("{name} must be positive, got {value}")]
    NonPositiveInput { name: &'static str, value: f64 },
    #[error("reference token sequence is empty")]
    EmptyReference,
    #[error("reference source does not parse")]
    ReferenceUnparseable,
    #[error("weights must be nonnegative and sum to 1, got {0:?}")]
    InvalidWeights([f64; 4]),
}
