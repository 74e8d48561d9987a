use serde::{Deserialize, Serialize};

use super::ast::ast_match_trees;
use super::dataflow::dataflow_match_trees;
use super::ngram::{bleu, weighted_ngram_match, KeywordSet};
use super::MetricError;
use crate::syntax::{lex, parse, Language};

/// Component weights (α, β, γ, δ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuWeights {
    pub bleu: f64,
    pub weighted: f64,
    pub ast: f64,
    pub dataflow: f64,
}

impl Default for CodeBleuWeights {
    fn default() -> Self {
        CodeBleuWeights { bleu: 0.25, weighted: 0.25, ast: 0.25, dataflow: 0.25 }
    }
}

impl CodeBleuWeights {
    fn as_array(&self) -> [f64; 4] {
        [self.bleu, self.weighted, self.ast, self.dataflow]
    }

    pub fn validate(&self) -> Result<(), MetricError> {
        let w = self.as_array();
        let ok = w.iter().all(|&x| x >= 0.0 && x.is_finite()) && (w.iter().sum::<f64>() - 1.0).abs() < 1e-9;
        if ok {
            Ok(())
        } else {
            Err(MetricError::InvalidWeights(w))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeBleuScore {
    pub bleu: f64,
    pub weighted_ngram: f64,
    pub ast_match: f64,
    pub dataflow_match: Option<f64>,
    pub weights: CodeBleuWeights,
    pub aggregate: f64,
}

/// Serialized form of a score: `{"bleu","weighted","ast","dataflow","codebleu"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub bleu: f64,
    pub weighted: f64,
    pub ast: Option<f64>,
    pub dataflow: Option<f64>,
    pub codebleu: f64,
}

impl From<&CodeBleuScore> for ScoreRecord {
    fn from(s: &CodeBleuScore) -> Self {
        ScoreRecord {
            bleu: s.bleu,
            weighted: s.weighted_ngram,
            ast: Some(s.ast_match),
            dataflow: s.dataflow_match,
            codebleu: s.aggregate,
        }
    }
}

pub fn codebleu(
    candidate: &str,
    reference: &str,
    language: Language,
    weights: &CodeBleuWeights,
) -> Result<CodeBleuScore, MetricError> {
    weights.validate()?;
    let ref_tokens: Vec<String> = lex(reference, language).into_iter().map(|t| t.text).collect();
    let cand_tokens: Vec<String> = lex(candidate, language).into_iter().map(|t| t.text).collect();
    let b = bleu(&cand_tokens, &ref_tokens, 4)?;
    let w = weighted_ngram_match(&cand_tokens, &ref_tokens, &KeywordSet::hpc())?;

    let ref_tree = parse(reference, language).map_err(|_| MetricError::ReferenceUnparseable)?;
    let cand_tree = parse(candidate, language).ok();
    let (a, d) = match &cand_tree {
        Some(c) => (ast_match_trees(c, &ref_tree)?, dataflow_match_trees(c, &ref_tree)?),
        None => {
            // Keeps the reference checks while scoring the candidate at zero.
            let empty = parse("", language).map_err(|_| MetricError::ReferenceUnparseable)?;
            (ast_match_trees(&empty, &ref_tree)?, dataflow_match_trees(&empty, &ref_tree)?)
        }
    };

    let aggregate = match d {
        Some(d) => weights.bleu * b + weights.weighted * w + weights.ast * a + weights.dataflow * d,
        None => {
            let mass = weights.bleu + weights.weighted + weights.ast;
            if mass > 0.0 {
                (weights.bleu * b + weights.weighted * w + weights.ast * a) / mass
            } else {
                0.0
            }
        }
    };
    Ok(CodeBleuScore {
        bleu: b,
        weighted_ngram: w,
        ast_match: a,
        dataflow_match: d,
        weights: *weights,
        aggregate: aggregate.clamp(0.0, 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SRC: &str = "double dot(const double *x, const double *y, int n) {\n  double s = 0.0;\n#pragma omp parallel for reduction(+:s)\n  for (int i = 0; i < n; i++) s += x[i] * y[i];\n  return s;\n}";

    #[test]
    fn identity() {
        let s = codebleu(SRC, SRC, Language::C, &CodeBleuWeights::default()).unwrap();
        assert!((s.aggregate - 1.0).abs() < 1e-12, "{s:?}");
    }

    #[test]
    fn empty_candidate() {
        let s = codebleu("", SRC, Language::C, &CodeBleuWeights::default()).unwrap();
        assert!(s.aggregate < 1e-6, "{s:?}");
    }

    #[test]
    fn renormalizes_without_dataflow() {
        let s = codebleu("void f(){}", "void f(){}", Language::C, &CodeBleuWeights::default()).unwrap();
        assert_eq!(s.dataflow_match, None);
        assert!((s.aggregate - 1.0).abs() < 1e-12);
        let rec = ScoreRecord::from(&s);
        let json = serde_json::to_string(&rec).unwrap();
        assert!(json.starts_with("{\"bleu\":") && json.contains("\"dataflow\":null"), "{json}");
    }

    #[test]
    fn rejects_bad_weights() {
        let w = CodeBleuWeights { bleu: 0.5, weighted: 0.5, ast: 0.5, dataflow: -0.5 };
        assert!(matches!(codebleu(SRC, SRC, Language::C, &w), Err(MetricError::InvalidWeights(_))));
    }

    #[test]
    fn aggregate_is_weighted_sum() {
        let cand = SRC.replace("s += x[i] * y[i]", "s = x[i]");
        let w = CodeBleuWeights { bleu: 0.1, weighted: 0.2, ast: 0.3, dataflow: 0.4 };
        let s = codebleu(&cand, SRC, Language::C, &w).unwrap();
        let d = s.dataflow_match.unwrap();
        let want = 0.1 * s.bleu + 0.2 * s.weighted_ngram + 0.3 * s.ast_match + 0.4 * d;
        assert!((s.aggregate - want).abs() < 1e-12);
        assert!(s.aggregate < 1.0);
    }
}
