use std::collections::BTreeSet;
use std::fmt::Write;
use std::str::FromStr;

use super::{Dataset, EvalReport, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            _ => Err(format!("unknown report format {s:?} (expected json or markdown)")),
        }
    }
}

pub fn render_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Markdown => markdown(report),
    }
}

pub fn parse_report(text: &str) -> Result<EvalReport, serde_json::Error> {
    serde_json::from_str(text)
}

/// One table per dataset: rows are backend and variant, columns are context
/// lengths, entries are mean CodeBLEU.
fn markdown(report: &EvalReport) -> String {
    let mut out = String::new();
    for dataset in [Dataset::General, Dataset::Openmp] {
        let cells: Vec<_> = report.cells.iter().filter(|c| c.dataset == dataset).collect();
        if cells.is_empty() {
            continue;
        }
        let contexts: BTreeSet<usize> = cells.iter().map(|c| c.context_len).collect();
        let rows: BTreeSet<(&str, Variant)> = cells.iter().map(|c| (c.backend.as_str(), c.variant)).collect();

        if !out.is_empty() {
            out.push('\n');
        }
        let _ = writeln!(out, "### {}\n", dataset.title());
        out.push_str("| Backend | Variant |");
        for c in &contexts {
            let _ = write!(out, " Context {c} |");
        }
        out.push_str("\n|---|---|");
        for _ in &contexts {
            out.push_str("---:|");
        }
        out.push('\n');
        for (backend, variant) in rows {
            let label = match variant {
                Variant::Raw => "raw",
                Variant::Lse => "+ LSE",
            };
            let _ = write!(out, "| {backend} | {label} |");
            for &ctx in &contexts {
                let value = report
                    .cell(dataset, backend, variant, ctx)
                    .and_then(|c| c.stats.mean.as_ref())
                    .map_or_else(|| "n/a".to_owned(), |m| format!("{:.3}", m.codebleu));
                let _ = write!(out, " {value} |");
            }
            out.push('\n');
        }
    }
    out
}
