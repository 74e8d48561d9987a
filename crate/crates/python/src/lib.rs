//! Python bindings. Records, tasks and manifests cross the boundary as JSON
//! text, which the Python side decodes with `json.loads`.

use std::path::PathBuf;

use hpclm_core::corpus::{read_records, run_prep, PrepConfig};
use hpclm_core::harness::{make_tasks as build_tasks, Dataset, TaskConfig, Variant};
use hpclm_core::lse::LseConfig;
use hpclm_core::metrics::{self, CodeBleuWeights};
use hpclm_core::modeling::{train_ngram, NgramConfig, NgramModel as CoreModel};
use hpclm_core::syntax::{self, Language};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn language(name: &str) -> PyResult<Language> {
    name.parse().map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (code, lang = "c"))]
fn lex(code: &str, lang: &str) -> PyResult<Vec<String>> {
    Ok(syntax::lex(code, language(lang)?).into_iter().map(|t| t.text).collect())
}

#[pyfunction]
fn detokenize(tokens: Vec<String>) -> String {
    syntax::detokenize(&tokens)
}

#[pyfunction]
#[pyo3(signature = (code, lang = "c", seed = 0, suffix_min = 1, suffix_max = 1000, compilable = false))]
fn apply_lse(code: &str, lang: &str, seed: u64, suffix_min: u64, suffix_max: u64, compilable: bool) -> PyResult<String> {
    let cfg = LseConfig { suffix_min, suffix_max, compilable_mode: compilable, ..LseConfig::default().with_seed(seed) };
    hpclm_core::lse::apply_lse(code, language(lang)?, &cfg).map_err(value_err)
}

#[pyfunction]
fn alpha_equivalent(a: &str, b: &str) -> bool {
    hpclm_core::lse::alpha_equivalent(a, b)
}

/// CodeBLEU and its components as a dict. `weights` is
/// (bleu, weighted, ast, dataflow).
#[pyfunction]
#[pyo3(signature = (candidate, reference, lang = "c", weights = None))]
fn codebleu<'py>(
    py: Python<'py>,
    candidate: &str,
    reference: &str,
    lang: &str,
    weights: Option<(f64, f64, f64, f64)>,
) -> PyResult<Bound<'py, PyDict>> {
    let weights = weights
        .map(|(bleu, weighted, ast, dataflow)| CodeBleuWeights { bleu, weighted, ast, dataflow })
        .unwrap_or_default();
    let s = metrics::codebleu(candidate, reference, language(lang)?, &weights).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("bleu", s.bleu)?;
    d.set_item("weighted", s.weighted_ngram)?;
    d.set_item("ast", s.ast_match)?;
    d.set_item("dataflow", s.dataflow_match)?;
    d.set_item("codebleu", s.aggregate)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (candidate, reference, lang = "c"))]
fn ast_match(candidate: &str, reference: &str, lang: &str) -> PyResult<f64> {
    metrics::ast_match(candidate, reference, language(lang)?).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (candidate, reference, lang = "c"))]
fn dataflow_match(candidate: &str, reference: &str, lang: &str) -> PyResult<Option<f64>> {
    metrics::dataflow_match(candidate, reference, language(lang)?).map_err(value_err)
}

/// Perplexity from per-token natural-log probabilities.
#[pyfunction]
fn perplexity(logprobs: Vec<f64>) -> PyResult<f64> {
    Ok(metrics::perplexity(&logprobs, None).map_err(value_err)?.perplexity)
}

#[pyfunction]
fn normalized_perplexity(ppl: f64, params_billions: f64) -> PyResult<f64> {
    metrics::normalized_perplexity(ppl, params_billions).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (layers, hidden_dim, heads, vocab, context, tied = false))]
fn estimate_params(layers: u64, hidden_dim: u64, heads: u64, vocab: u64, context: u64, tied: bool) -> u64 {
    metrics::estimate_params(layers, hidden_dim, heads, vocab, context, tied)
}

#[pyfunction]
#[pyo3(signature = (param_count, bytes_per_param = 4))]
fn estimate_ram(param_count: u64, bytes_per_param: u64) -> u64 {
    metrics::estimate_ram(param_count, bytes_per_param)
}

/// Token n-gram baseline.
#[pyclass(frozen)]
struct NgramModel {
    inner: CoreModel,
}

#[pymethods]
impl NgramModel {
    #[staticmethod]
    #[pyo3(signature = (sequences, order = 4, smoothing_k = 0.01, backoff = 0.4, seed = 0))]
    fn train(sequences: Vec<Vec<String>>, order: usize, smoothing_k: f64, backoff: f64, seed: u64) -> PyResult<Self> {
        let cfg = NgramConfig { order, smoothing_k, backoff_factor: backoff, seed };
        Ok(NgramModel { inner: train_ngram(&sequences, cfg).map_err(value_err)? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(NgramModel { inner: CoreModel::load(&path).map_err(value_err)? })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(value_err)
    }

    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn vocab_size(&self) -> usize {
        self.inner.vocab_size()
    }

    /// Natural-log probability of each token given the ones before it.
    fn logprobs(&self, tokens: Vec<String>) -> PyResult<Vec<f64>> {
        self.inner.logprobs(&tokens).map_err(value_err)
    }

    #[pyo3(signature = (prompt, max_new_tokens, temperature = 0.0, seed = 0))]
    fn generate(&self, prompt: Vec<String>, max_new_tokens: usize, temperature: f64, seed: u64) -> Vec<String> {
        self.inner.generate(&prompt, max_new_tokens, temperature, seed)
    }
}

/// Run corpus preparation on `input`, write the outputs under `out` and
/// return the manifest as JSON.
#[pyfunction]
#[pyo3(signature = (input, out, seed = 0, min_tokens = 100, max_bytes = 1_048_576))]
fn prep(input: PathBuf, out: PathBuf, seed: u64, min_tokens: usize, max_bytes: usize) -> PyResult<String> {
    let mut cfg = PrepConfig { input, seed, ..PrepConfig::default() };
    cfg.filter.min_tokens = min_tokens;
    cfg.filter.max_bytes = max_bytes;
    let output = run_prep(&cfg).map_err(|e| PyIOError::new_err(e.to_string()))?;
    output.write(&out).map_err(|e| PyIOError::new_err(e.to_string()))?;
    serde_json::to_string(&output.manifest).map_err(value_err)
}

/// Evaluation tasks for the records in a JSONL file, one JSON object each.
#[pyfunction]
#[pyo3(signature = (records_path, dataset, context_lens = vec![100, 300, 600], variants = vec!["raw".to_owned(), "lse".to_owned()], seed = 0))]
fn make_tasks(
    records_path: PathBuf,
    dataset: &str,
    context_lens: Vec<usize>,
    variants: Vec<String>,
    seed: u64,
) -> PyResult<Vec<String>> {
    let records = read_records(&records_path).map_err(|e| PyIOError::new_err(e.to_string()))?;
    let dataset: Dataset = dataset.parse().map_err(value_err)?;
    let variants = variants.iter().map(|v| v.parse::<Variant>()).collect::<Result<_, _>>().map_err(value_err)?;
    let cfg = TaskConfig { context_lens, variants, lse: LseConfig::default().with_seed(seed) };
    build_tasks(&records, dataset, &cfg)
        .tasks
        .iter()
        .map(|t| serde_json::to_string(t).map_err(value_err))
        .collect()
}

#[pymodule]
fn hpclm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(lex, m)?)?;
    m.add_function(wrap_pyfunction!(detokenize, m)?)?;
    m.add_function(wrap_pyfunction!(apply_lse, m)?)?;
    m.add_function(wrap_pyfunction!(alpha_equivalent, m)?)?;
    m.add_function(wrap_pyfunction!(codebleu, m)?)?;
    m.add_function(wrap_pyfunction!(ast_match, m)?)?;
    m.add_function(wrap_pyfunction!(dataflow_match, m)?)?;
    m.add_function(wrap_pyfunction!(perplexity, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_perplexity, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_params, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_ram, m)?)?;
    m.add_function(wrap_pyfunction!(prep, m)?)?;
    m.add_function(wrap_pyfunction!(make_tasks, m)?)?;
    m.add_class::<NgramModel>()?;
    Ok(())
}
