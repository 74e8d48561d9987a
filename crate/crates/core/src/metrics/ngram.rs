use std::collections::{HashMap, HashSet};

use super::MetricError;
use crate::syntax::{keywords, Language, OPENMP_WORDS};

/// Floor for higher-order precisions with no matches.
pub const BLEU_EPSILON: f64 = 1e-9;
/// Unigram weight of a keyword in the weighted n-gram match.
pub const KEYWORD_WEIGHT: f64 = 5.0;

/// Tokens that carry keyword weight.
#[derive(Debug, Clone, Default)]
pub struct KeywordSet {
    words: HashSet<String>,
}

impl KeywordSet {
    /// C and C++ reserved words, `#pragma`, and the OpenMP directive and
    /// clause vocabulary.
    pub fn hpc() -> Self {
        let words = keywords(Language::Cpp)
            .chain(["#pragma"])
            .chain(OPENMP_WORDS.iter().copied())
            .map(str::to_owned)
            .collect();
        KeywordSet { words }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    fn weight(&self, token: &str) -> f64 {
        if self.contains(token) {
            KEYWORD_WEIGHT
        } else {
            1.0
        }
    }
}

impl<S: Into<String>> FromIterator<S> for KeywordSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        KeywordSet { words: iter.into_iter().map(Into::into).collect() }
    }
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            let key: Vec<&str> = w.iter().map(AsRef::as_ref).collect();
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped matches and total candidate n-grams, each n-gram weighted by `weight`.
fn clipped<S: AsRef<str>>(
    candidate: &[S],
    reference: &[S],
    n: usize,
    weight: impl Fn(&[&str]) -> f64,
) -> (f64, f64) {
    let cand = ngram_counts(candidate, n);
    let refs = ngram_counts(reference, n);
    let mut matched = 0.0;
    let mut total = 0.0;
    for (gram, &count) in &cand {
        let w = weight(gram);
        total += w * count as f64;
        let hit = refs.get(gram).copied().unwrap_or(0).min(count);
        matched += w * hit as f64;
    }
    (matched, total)
}

fn precision(n: usize, matched: f64, total: f64) -> f64 {
    if matched > 0.0 {
        matched / total
    } else if n == 1 {
        0.0
    } else {
        // A candidate too short to hold an n-gram counts as one miss.
        BLEU_EPSILON / (total.max(1.0) + BLEU_EPSILON)
    }
}

fn combine(precisions: &[f64], cand_len: usize, ref_len: usize) -> f64 {
    if cand_len == 0 || precisions.iter().any(|&p| p <= 0.0) {
        return 0.0;
    }
    let log_mean = precisions.iter().map(|p| p.ln()).sum::<f64>() / precisions.len() as f64;
    let bp = if cand_len < ref_len {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    } else {
        1.0
    };
    (bp * log_mean.exp()).clamp(0.0, 1.0)
}

/// Sentence BLEU with uniform weights over n = 1..=max_n.
pub fn bleu<S: AsRef<str>>(candidate: &[S], reference: &[S], max_n: usize) -> Result<f64, MetricError> {
    if reference.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    let precisions: Vec<f64> = (1..=max_n.max(1))
        .map(|n| {
            let (m, t) = clipped(candidate, reference, n, |_| 1.0);
            precision(n, m, t)
        })
        .collect();
    Ok(combine(&precisions, candidate.len(), reference.len()))
}

/// BLEU-4 whose unigram precision weights keywords by [`KEYWORD_WEIGHT`].
pub fn weighted_ngram_match<S: AsRef<str>>(
    candidate: &[S],
    reference: &[S],
    keyword_set: &KeywordSet,
) -> Result<f64, MetricError> {
    if reference.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    let precisions: Vec<f64> = (1..=4)
        .map(|n| {
            let (m, t) = if n == 1 {
                clipped(candidate, reference, 1, |g| keyword_set.weight(g[0]))
            } else {
                clipped(candidate, reference, n, |_| 1.0)
            };
            precision(n, m, t)
        })
        .collect();
    Ok(combine(&precisions, candidate.len(), reference.len()))
}
