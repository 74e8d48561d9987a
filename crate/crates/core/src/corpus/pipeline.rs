use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use super::extract::{extract_from_tree, Extraction};
use super::filter::{deduplicate, filter_records, FilterConfig};
use super::manifest::{compute_manifest, CorpusManifest, FilterCounters, LanguageStats};
use super::split::{split_dataset, Splits};
use super::store::write_records;
use super::{CorpusError, FunctionRecord};
use crate::syntax::{parse_bytes, Language};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrepConfig {
    pub input: PathBuf,
    pub languages: Vec<Language>,
    pub filter: FilterConfig,
    pub seed: u64,
    /// Train, validation and test fractions of the repositories.
    pub split: [f64; 3],
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            input: PathBuf::new(),
            languages: vec![Language::C, Language::Cpp],
            filter: FilterConfig::default(),
            seed: 0,
            split: [0.8, 0.1, 0.1],
        }
    }
}

/// Everything extracted from a source tree, in (repo, path, offset) order.
#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub records: Vec<FunctionRecord>,
    pub rejected_parse: usize,
    pub languages: BTreeMap<Language, LanguageStats>,
}

struct SourceFile {
    abs: PathBuf,
    repo: String,
    path: String,
    language: Language,
}

/// Source files under `root`; the first path component names the repository.
fn list_sources(root: &Path, languages: &[Language]) -> Result<Vec<SourceFile>, CorpusError> {
    let root_name = root
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "root".to_owned());
    let mut files = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(root).to_owned();
            CorpusError::io(path, e.into())
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let Some(language) = Language::from_path(entry.path()).filter(|l| languages.contains(l)) else {
            continue;
        };
        let rel = entry.path().strip_prefix(root).unwrap_or(entry.path());
        let parts: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
        let (repo, path) = match parts.as_slice() {
            [file] => (root_name.clone(), file.clone()),
            [repo, rest @ ..] => (repo.clone(), rest.join("/")),
            [] => continue,
        };
        files.push(SourceFile { abs: entry.path().to_owned(), repo, path, language });
    }
    Ok(files)
}

pub fn ingest_dir(root: &Path, languages: &[Language]) -> Result<Ingested, CorpusError> {
    let files = list_sources(root, languages)?;
    let per_file: Vec<(u64, Extraction)> = files
        .par_iter()
        .map(|f| {
            let bytes = std::fs::read(&f.abs).map_err(|e| CorpusError::io(&f.abs, e))?;
            let extraction = match parse_bytes(&bytes, f.language) {
                Ok(tree) => extract_from_tree(&tree, &f.repo, &f.path),
                Err(_) => Extraction::default(),
            };
            Ok((bytes.len() as u64, extraction))
        })
        .collect::<Result<_, CorpusError>>()?;

    let mut out = Ingested::default();
    let mut repos: BTreeMap<Language, BTreeSet<&str>> = BTreeMap::new();
    for (f, (size, ex)) in files.iter().zip(per_file) {
        let stats = out.languages.entry(f.language).or_default();
        stats.files += 1;
        stats.bytes += size;
        stats.functions += ex.records.len() + ex.rejected_parse;
        repos.entry(f.language).or_default().insert(&f.repo);
        out.rejected_parse += ex.rejected_parse;
        out.records.extend(ex.records);
    }
    for (lang, set) in repos {
        out.languages.entry(lang).or_default().repos = set.len();
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct PrepOutput {
    pub accepted: Vec<FunctionRecord>,
    pub splits: Splits,
    pub manifest: CorpusManifest,
}

/// Ingest, deduplicate, filter and split a source tree.
pub fn run_prep(config: &PrepConfig) -> Result<PrepOutput, CorpusError> {
    let ingested = ingest_dir(&config.input, &config.languages)?;
    let (unique, dups) = deduplicate(ingested.records.clone());
    let (accepted, counts) = filter_records(unique, &config.filter);
    let splits = split_dataset(accepted.clone(), config.split, config.seed)?;
    let counters = FilterCounters {
        rejected_too_small: counts.too_small,
        rejected_too_large: counts.too_large,
        rejected_duplicates: dups,
        rejected_parse: ingested.rejected_parse,
    };
    let manifest = compute_manifest(&ingested, counters, &splits, config);
    debug_assert!(manifest.balances());
    Ok(PrepOutput { accepted, splits, manifest })
}

impl PrepOutput {
    /// `records.jsonl`, `train.jsonl`, `validation.jsonl`, `test.jsonl` and
    /// `manifest.json` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), CorpusError> {
        std::fs::create_dir_all(dir).map_err(|e| CorpusError::io(dir, e))?;
        write_records(&dir.join("records.jsonl"), &self.accepted)?;
        write_records(&dir.join("train.jsonl"), &self.splits.train)?;
        write_records(&dir.join("validation.jsonl"), &self.splits.validation)?;
        write_records(&dir.join("test.jsonl"), &self.splits.test)?;
        let path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(&self.manifest).map_err(|e| CorpusError::Json {
            path: path.clone(),
            line: 0,
            source: e,
        })?;
        std::fs::write(&path, json + "\n").map_err(|e| CorpusError::io(&path, e))?;
        Ok(())
    }
}

