use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::pipeline::{Ingested, PrepConfig};
use super::split::Splits;
use crate::syntax::Language;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanguageStats {
    pub repos: usize,
    pub bytes: u64,
    pub files: usize,
    /// Functions extracted, before filtering.
    pub functions: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterCounters {
    pub rejected_too_small: usize,
    pub rejected_too_large: usize,
    pub rejected_duplicates: usize,
    pub rejected_parse: usize,
}

impl FilterCounters {
    pub fn total(&self) -> usize {
        self.rejected_too_small + self.rejected_too_large + self.rejected_duplicates + self.rejected_parse
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub languages: BTreeMap<Language, LanguageStats>,
    /// Function definitions seen, including those rejected for parse errors.
    pub extracted: usize,
    pub accepted: usize,
    pub counters: FilterCounters,
    pub splits: SplitSizes,
    pub config: PrepConfig,
}

impl CorpusManifest {
    /// accepted + every rejection counter == extracted.
    pub fn balances(&self) -> bool {
        self.accepted + self.counters.total() == self.extracted
    }

    /// Per-language statistics as a markdown table.
    pub fn render_table(&self) -> String {
        let mut out = String::from("| Language | Repos | Size (GB) | Files | Functions |\n|---|---:|---:|---:|---:|\n");
        for (lang, s) in &self.languages {
            let name = match lang {
                Language::C => "C",
                Language::Cpp => "C++",
            };
            let _ = writeln!(
                out,
                "| {name} | {} | {:.2} | {} | {} |",
                thousands(s.repos as u64),
                s.bytes as f64 / 1e9,
                thousands(s.files as u64),
                thousands(s.functions as u64)
            );
        }
        out
    }
}

fn thousands(n: u64) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

pub fn compute_manifest(
    ingested: &Ingested,
    counters: FilterCounters,
    splits: &Splits,
    config: &PrepConfig,
) -> CorpusManifest {
    let accepted = splits.train.len() + splits.validation.len() + splits.test.len();
    CorpusManifest {
        languages: ingested.languages.clone(),
        extracted: ingested.records.len() + ingested.rejected_parse,
        accepted,
        counters,
        splits: SplitSizes {
            train: splits.train.len(),
            validation: splits.validation.len(),
            test: splits.test.len(),
        },
        config: config.clone(),
    }
}
