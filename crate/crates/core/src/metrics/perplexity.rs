use serde::{Deserialize, Serialize};

use super::MetricError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerplexityReport {
    pub token_count: usize,
    /// Mean negative natural-log likelihood per token.
    pub mean_nll: f64,
    pub perplexity: f64,
    pub params_billions: Option<f64>,
    pub normalized_perplexity: Option<f64>,
}

/// Perplexity of a sequence of natural-log token probabilities.
pub fn perplexity(
    token_logprobs: &[f64],
    params_billions: Option<f64>,
) -> Result<PerplexityReport, MetricError> {
    if token_logprobs.is_empty() {
        return Err(MetricError::EmptySequence);
    }
    let positive = token_logprobs.iter().filter(|&&lp| lp > 0.0).count();
    if positive > 0 {
        log::warn!("{positive} log-probabilities are positive");
    }
    let mean_nll = -neumaier_sum(token_logprobs) / token_logprobs.len() as f64;
    let ppl = mean_nll.exp();
    let normalized = params_billions
        .map(|b| normalized_perplexity(ppl, b))
        .transpose()?;
    Ok(PerplexityReport {
        token_count: token_logprobs.len(),
        mean_nll,
        perplexity: ppl,
        params_billions,
        normalized_perplexity: normalized,
    })
}

/// Perplexity scaled by model size in billions of parameters.
pub fn normalized_perplexity(ppl: f64, params_billions: f64) -> Result<f64, MetricError> {
    if ppl.is_nan() || ppl <= 0.0 {
        return Err(MetricError::NonPositiveInput { name: "perplexity", value: ppl });
    }
    if params_billions.is_nan() || params_billions <= 0.0 {
        return Err(MetricError::NonPositiveInput {
            name: "params_billions",
            value: params_billions,
        });
    }
    Ok(ppl * params_billions)
}

fn neumaier_sum(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
