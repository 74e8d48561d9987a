use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use hpclm::corpus::{
    partition_openmp, read_records, run_prep, write_records, FilterConfig, FunctionRecord, PartitionConfig,
    PrepConfig,
};
use hpclm::harness::{
    make_tasks, read_journal, render_report, run_eval, score_results, Dataset, EvalTask, ReportFormat, RunConfig,
    TaskConfig, TaskSet, Variant,
};
use hpclm::lse::{apply_lse, record_seed, LseConfig};
use hpclm::metrics::CodeBleuWeights;
use hpclm::modeling::{
    train_ngram, CompletionBackend, HttpBackend, HttpConfig, NgramBackend, NgramConfig, NgramModel, OracleBackend,
    SubprocessBackend, SubprocessConfig,
};
use hpclm::syntax::{lex, Language};

/// HPC code corpus preparation, local semantics elimination and
/// context-split CodeBLEU evaluation.
#[derive(Parser)]
#[command(name = "hpclm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract, filter, deduplicate and split functions from a source tree.
    Prep {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "c,cpp")]
        lang: Vec<Language>,
        #[arg(long, default_value_t = 100)]
        min_tokens: usize,
        #[arg(long, default_value_t = 1_048_576)]
        max_bytes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Add an `lse_code` field holding the anonymized function.
    Lse {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Inclusive suffix range, `lo:hi`.
        #[arg(long, default_value = "1:1000", value_parser = parse_range)]
        range: (u64, u64),
        #[arg(long)]
        compilable: bool,
    },
    /// Split OpenMP functions into pragma-free General and OpenMP sets.
    Partition {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        general: PathBuf,
        #[arg(long)]
        openmp: PathBuf,
        #[arg(long, default_value_t = 20_000)]
        cap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Train the n-gram baseline on the `code` of JSONL records.
    TrainBaseline {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 4)]
        order: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        smoothing_k: f64,
        #[arg(long, default_value_t = 0.4)]
        backoff: f64,
    },
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Build context-split tasks from General and OpenMP record files.
    Tasks {
        #[arg(long)]
        general: Option<PathBuf>,
        #[arg(long)]
        openmp: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "100,300,600")]
        contexts: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "raw,lse")]
        variants: Vec<Variant>,
        /// Seed for the LSE variant.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Complete every task with a backend, appending to a resumable journal.
    Run {
        #[arg(long)]
        tasks: PathBuf,
        /// `ngram:<model-file>`, `http:<url>`, `subprocess:<cmd>` or `oracle`.
        #[arg(long)]
        backend: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Score a journal and write a report.
    Score {
        #[arg(long)]
        journal: Vec<PathBuf>,
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value = "markdown")]
        format: ReportFormat,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 0.0)]
    temperature: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    batch_size: usize,
    #[arg(long)]
    max_in_flight: Option<usize>,
    /// Stop after this many new tasks.
    #[arg(long)]
    limit: Option<usize>,
    /// Model name sent to an HTTP endpoint.
    #[arg(long, default_value = "default")]
    model: String,
    /// Maximum HTTP requests started per second.
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long, default_value_t = 3)]
    attempts: u32,
    #[arg(long, default_value_t = 60)]
    timeout_secs: u64,
}

fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: u64 = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: u64 = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
    if lo > hi {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok((lo, hi))
}

fn tokens(code: &str, language: Language) -> Vec<String> {
    lex(code, language).into_iter().map(|t| t.text).collect()
}

fn prep(input: PathBuf, out: &Path, lang: Vec<Language>, min_tokens: usize, max_bytes: usize, seed: u64) -> Result<()> {
    let config = PrepConfig {
        input,
        languages: lang,
        filter: FilterConfig { min_tokens, max_bytes },
        seed,
        ..PrepConfig::default()
    };
    let output = run_prep(&config)?;
    output.write(out)?;
    print!("{}", output.manifest.render_table());
    Ok(())
}

fn lse(input: &Path, out: &Path, seed: u64, range: (u64, u64), compilable: bool) -> Result<()> {
    let records = read_records(input)?;
    let base = LseConfig { suffix_min: range.0, suffix_max: range.1, seed, compilable_mode: compilable, ..LseConfig::default() };
    let results: Vec<(FunctionRecord, bool)> = records
        .into_par_iter()
        .map(|mut r| {
            let cfg = base.clone().with_seed(record_seed(seed, &r.id));
            match apply_lse(&r.code, r.language, &cfg) {
                Ok(code) => {
                    r.lse_code = Some(code);
                    (r, true)
                }
                Err(e) => {
                    log::warn!("{}: {e}", r.id);
                    (r, false)
                }
            }
        })
        .collect();
    let failed = results.iter().filter(|(_, ok)| !ok).count();
    let records: Vec<FunctionRecord> = results.into_iter().map(|(r, _)| r).collect();
    write_records(out, &records)?;
    eprintln!("{} records, {failed} left without lse_code", records.len());
    Ok(())
}

fn partition(input: &Path, general: &Path, openmp: &Path, cap: usize, seed: u64) -> Result<()> {
    let records = read_records(input)?;
    let p = partition_openmp(&records, &PartitionConfig { cap, seed });
    write_records(general, &p.general)?;
    write_records(openmp, &p.openmp)?;
    eprintln!("{} general, {} openmp", p.general.len(), p.openmp.len());
    Ok(())
}

fn train_baseline(input: &Path, order: usize, out: &Path, smoothing_k: f64, backoff: f64) -> Result<()> {
    let records = read_records(input)?;
    let seqs: Vec<Vec<String>> = records.iter().map(|r| tokens(&r.code, r.language)).collect();
    let config = NgramConfig { order, smoothing_k, backoff_factor: backoff, ..NgramConfig::default() };
    let model = train_ngram(&seqs, config)?;
    model.save(out)?;
    eprintln!("trained order-{order} model, vocabulary {}", model.vocab_size());
    Ok(())
}

fn eval_tasks(
    general: Option<PathBuf>,
    openmp: Option<PathBuf>,
    out: &Path,
    contexts: Vec<usize>,
    variants: Vec<Variant>,
    seed: u64,
) -> Result<()> {
    if general.is_none() && openmp.is_none() {
        bail!("give --general, --openmp or both");
    }
    let config = TaskConfig { context_lens: contexts, variants, lse: LseConfig::default().with_seed(seed) };
    let mut set = TaskSet::default();
    for (dataset, path) in [(Dataset::General, general), (Dataset::Openmp, openmp)] {
        if let Some(path) = path {
            set.extend(make_tasks(&read_records(&path)?, dataset, &config));
        }
    }
    hpclm::corpus::write_jsonl(out, &set.tasks)?;
    eprintln!("{} tasks, {} short records skipped, {} LSE failures", set.tasks.len(), set.skipped_short, set.skipped_lse);
    Ok(())
}

fn backend(selector: &str, tasks: &[EvalTask], args: &RunArgs) -> Result<Box<dyn CompletionBackend>> {
    if selector == "oracle" {
        let truth = tasks.iter().map(|t| (t.task_id.clone(), t.reference_tokens.clone()));
        return Ok(Box::new(OracleBackend::new(truth)));
    }
    let Some((kind, arg)) = selector.split_once(':') else {
        bail!("unknown backend {selector:?}");
    };
    Ok(match kind {
        "ngram" => {
            let model = NgramModel::load(Path::new(arg))?;
            let name = Path::new(arg).file_name().map_or(arg.into(), |n| n.to_string_lossy());
            Box::new(NgramBackend::new(format!("ngram:{name}"), Arc::new(model)))
        }
        "http" => {
            let mut cfg = HttpConfig::new(arg);
            cfg.model = args.model.clone();
            cfg.max_attempts = args.attempts;
            cfg.timeout = Duration::from_secs(args.timeout_secs);
            if let Some(n) = args.max_in_flight {
                cfg.max_in_flight = n;
            }
            if let Some(rate) = args.rate.filter(|r| *r > 0.0) {
                cfg.min_interval = Some(Duration::from_secs_f64(1.0 / rate));
            }
            Box::new(HttpBackend::new(cfg)?)
        }
        "subprocess" => Box::new(SubprocessBackend::new(SubprocessConfig::new(arg))),
        _ => bail!("unknown backend kind {kind:?}"),
    })
}

fn eval_run(tasks_path: &Path, selector: &str, out: &Path, args: &RunArgs) -> Result<()> {
    let tasks: Vec<EvalTask> = hpclm::corpus::read_jsonl(tasks_path)?;
    let backend = backend(selector, &tasks, args)?;
    let config = RunConfig {
        temperature: args.temperature,
        seed: args.seed,
        batch_size: args.batch_size,
        max_in_flight: args.max_in_flight,
        limit: args.limit,
    };
    let results = run_eval(&tasks, backend.as_ref(), &config, Some(out))?;
    let errors = results.iter().filter(|r| r.error.is_some()).count();
    eprintln!("{} of {} tasks journaled, {errors} with errors", results.len(), tasks.len());
    Ok(())
}

fn eval_score(journals: &[PathBuf], report: &Path, format: ReportFormat) -> Result<()> {
    if journals.is_empty() {
        bail!("give at least one --journal");
    }
    let mut results = Vec::new();
    for j in journals {
        results.extend(read_journal(j)?);
    }
    let scored = score_results(&results, &CodeBleuWeights::default());
    let text = render_report(&scored, format);
    std::fs::write(report, &text).with_context(|| format!("writing {}", report.display()))?;
    if format == ReportFormat::Markdown {
        print!("{text}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Prep { input, out, lang, min_tokens, max_bytes, seed } => {
            prep(input, &out, lang, min_tokens, max_bytes, seed)
        }
        Command::Lse { input, out, seed, range, compilable } => lse(&input, &out, seed, range, compilable),
        Command::Partition { input, general, openmp, cap, seed } => partition(&input, &general, &openmp, cap, seed),
        Command::TrainBaseline { input, order, out, smoothing_k, backoff } => {
            train_baseline(&input, order, &out, smoothing_k, backoff)
        }
        Command::Eval(EvalCommand::Tasks { general, openmp, out, contexts, variants, seed }) => {
            eval_tasks(general, openmp, &out, contexts, variants, seed)
        }
        Command::Eval(EvalCommand::Run { tasks, backend, out, run }) => eval_run(&tasks, &backend, &out, &run),
        Command::Eval(EvalCommand::Score { journal, report, format }) => eval_score(&journal, &report, format),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
