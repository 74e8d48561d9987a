//! Fixtures and independent oracles shared by the integration tests and the
//! acceptance suite.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use hpclm::corpus::{
    ingest_dir, partition_openmp, run_prep, FunctionRecord, PartitionConfig, PrepConfig, PrepOutput,
};
use hpclm::harness::{make_tasks, Dataset, EvalTask, TaskConfig};
use hpclm::modeling::{train_ngram, NgramConfig, NgramModel, OracleBackend};
use hpclm::syntax::{lex, Language};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn fixture_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus")
}

/// Every function extracted from the fixture tree, before filtering.
pub fn fixture_functions() -> Vec<FunctionRecord> {
    ingest_dir(&fixture_root(), &[Language::C, Language::Cpp])
        .expect("fixture corpus readable")
        .records
}

pub fn tokens(code: &str, language: Language) -> Vec<String> {
    lex(code, language).into_iter().map(|t| t.text).collect()
}

pub fn strings(words: &str) -> Vec<String> {
    words.split_whitespace().map(str::to_owned).collect()
}

/// A C function of exactly `n` lexical tokens (n >= 10).
pub fn function_with_tokens(name: &str, n: usize) -> String {
    assert!(n >= 10);
    format!("int {name}(void) {{ {} return 0; }}", ";".repeat(n - 10))
}

/// Replace a seeded random `fraction` of the tokens. Larger fractions
/// corrupt a superset of the positions of smaller ones.
pub fn corrupt(tokens: &[String], fraction: f64, seed: u64) -> Vec<String> {
    let mut order: Vec<usize> = (0..tokens.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let k = (fraction * tokens.len() as f64).round() as usize;
    let mut out = tokens.to_vec();
    for &i in &order[..k] {
        out[i] = "@".to_owned();
    }
    out
}

/// Perplexity of `test` under the smoothed n-gram definition, by scanning the
/// raw training sentences for every count and multiplying the chain of
/// conditional probabilities.
pub fn chain_perplexity(train: &[Vec<String>], test: &[Vec<String>], order: usize, k: f64) -> f64 {
    let bos = "<s>".to_owned();
    let padded: Vec<Vec<String>> = train
        .iter()
        .map(|s| {
            let mut v = vec![bos.clone(); order - 1];
            v.extend(s.iter().cloned());
            v.push("</s>".to_owned());
            v
        })
        .collect();
    let mut vocab: BTreeSet<String> = train.iter().flatten().cloned().collect();
    vocab.insert("</s>".to_owned());
    vocab.insert("<unk>".to_owned());
    let v = vocab.len() as f64;

    let mut prob = 1.0f64;
    let mut n = 0usize;
    for sentence in test {
        let mut hist = vec![bos.clone(); order - 1];
        for w in sentence {
            let w = if vocab.contains(w) { w.clone() } else { "<unk>".to_owned() };
            for len in (0..order).rev() {
                let ctx = &hist[hist.len() - len..];
                let (mut c_ctx, mut c_w) = (0u64, 0u64);
                for s in &padded {
                    for i in (order - 1)..s.len() {
                        if s[i - len..i] == *ctx {
                            c_ctx += 1;
                            if s[i] == w {
                                c_w += 1;
                            }
                        }
                    }
                }
                if c_ctx > 0 {
                    prob *= (c_w as f64 + k) / (c_ctx as f64 + k * v);
                    break;
                }
            }
            hist.push(w);
            n += 1;
        }
    }
    prob.powf(-1.0 / n as f64)
}

/// Ten short sentences with repeated structure.
pub fn hand_corpus() -> Vec<Vec<String>> {
    [
        "for i in range n do sum += a [ i ] ;",
        "for j in range m do sum += b [ j ] ;",
        "if x > 0 then y = x ; else y = 0 ;",
        "if y > 0 then x = y ;",
        "while x > 0 do x -= 1 ;",
        "sum = 0 ; for i in range n do sum += i ;",
        "return sum ;",
        "return x ;",
        "a [ i ] = b [ i ] + c [ i ] ;",
        "c [ j ] = a [ j ] * b [ j ] ;",
    ]
    .iter()
    .map(|s| strings(s))
    .collect()
}

// Published (size in billions, perplexity, size-normalized perplexity) triples.
pub const PUBLISHED_PPL_C: [(f64, f64, f64); 7] = [
    (0.9, 3.51, 3.16),
    (2.7, 2.33, 6.29),
    (2.7, 3.69, 9.96),
    (6.0, 2.82, 16.92),
    (12.0, 2.55, 30.6),
    (15.5, 1.71, 26.51),
    (20.0, 2.37, 47.4),
];
pub const PUBLISHED_PPL_CPP: [(f64, f64, f64); 7] = [
    (0.9, 3.69, 3.32),
    (2.7, 2.99, 8.07),
    (2.7, 2.87, 7.75),
    (6.0, 2.47, 14.82),
    (12.0, 1.95, 23.4),
    (15.5, 2.01, 31.16),
    (20.0, 2.32, 46.4),
];

// Small source tree with known accounting.

pub struct SmallCorpus {
    pub files: usize,
    pub functions: usize,
    pub accepted: usize,
    pub too_small: usize,
    pub duplicates: usize,
}

fn long_function(i: usize) -> String {
    let body: String = (0..12).map(|j| format!("    a[{j}] = a[{j}] * {i}.5 + {j};\n")).collect();
    format!("void kernel_{i}(double *a) {{\n{body}}}\n")
}

fn long_variant(i: usize) -> String {
    long_function(i)
        .replace(";\n", "; /* unrolled */\n")
        .replace("    ", "\t\t")
        .replace("(double *a)", "( double * a )")
}

/// Twelve files in four repositories: 15 distinct long functions, 10 tiny
/// ones and 5 whitespace or comment variants of long functions.
pub fn write_small_corpus(root: &Path) -> SmallCorpus {
    let mut units: Vec<String> = Vec::new();
    for i in 0..15 {
        units.push(long_function(i));
        if i < 10 {
            units.push(format!("int small_{i}(int x) {{ return x + {i}; }}\n"));
        }
    }
    for i in 0..5 {
        units.push(format!("// copied from kernel_{}\n{}", i * 3, long_variant(i * 3)));
    }
    for f in 0..12 {
        let repo = format!("repo{}", f / 3);
        let dir = root.join(&repo).join("src");
        std::fs::create_dir_all(&dir).unwrap();
        let text: String = units
            .iter()
            .enumerate()
            .filter(|(u, _)| u % 12 == f)
            .map(|(_, s)| s.as_str())
            .collect::<Vec<_>>()
            .join("\n");
        std::fs::write(dir.join(format!("file{f}.c")), format!("#include <math.h>\n\n{text}")).unwrap();
    }
    SmallCorpus { files: 12, functions: units.len(), accepted: 15, too_small: 10, duplicates: 5 }
}

// Scripted HTTP stub for the completion adapter.

#[derive(Clone)]
pub enum Reply {
    /// Status code and raw body.
    Raw(u16, String),
    /// 200 with the request's prompt as the completion text.
    Echo,
    /// Wait before answering with an echo.
    Slow(Duration),
}

#[derive(Debug, Clone)]
pub struct Recorded {
    pub path: String,
    pub authorization: Option<String>,
    pub body: serde_json::Value,
}

pub struct StubServer {
    pub url: String,
    pub hits: Arc<AtomicUsize>,
    pub requests: Arc<Mutex<Vec<Recorded>>>,
}

/// Serves `script` in order, repeating the last reply once it runs out.
pub fn stub_server(script: Vec<Reply>) -> StubServer {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let hits = Arc::new(AtomicUsize::new(0));
    let requests = Arc::new(Mutex::new(Vec::new()));
    let (h, r) = (Arc::clone(&hits), Arc::clone(&requests));
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(stream) = stream else { break };
            let n = h.fetch_add(1, Ordering::SeqCst);
            let reply = script[n.min(script.len() - 1)].clone();
            let r = Arc::clone(&r);
            thread::spawn(move || serve(stream, reply, &r));
        }
    });
    StubServer { url, hits, requests }
}

fn serve(stream: TcpStream, reply: Reply, log: &Mutex<Vec<Recorded>>) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut request_line = String::new();
    if reader.read_line(&mut request_line).is_err() {
        return;
    }
    let path = request_line.split_whitespace().nth(1).unwrap_or("").to_owned();
    let mut length = 0usize;
    let mut authorization = None;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 {
            return;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            match name.to_ascii_lowercase().as_str() {
                "content-length" => length = value.trim().parse().unwrap_or(0),
                "authorization" => authorization = Some(value.trim().to_owned()),
                _ => {}
            }
        }
    }
    let mut body = vec![0u8; length];
    if reader.read_exact(&mut body).is_err() {
        return;
    }
    let body: serde_json::Value = serde_json::from_slice(&body).unwrap_or(serde_json::Value::Null);
    log.lock().unwrap().push(Recorded { path, authorization, body: body.clone() });

    let echo = || {
        let prompt = body["prompt"].as_str().unwrap_or("").to_owned();
        (200, serde_json::json!({ "choices": [{ "text": prompt }] }).to_string())
    };
    let (status, text) = match reply {
        Reply::Raw(s, t) => (s, t),
        Reply::Echo => echo(),
        Reply::Slow(d) => {
            thread::sleep(d);
            echo()
        }
    };
    let mut stream = stream;
    let _ = write!(
        stream,
        "HTTP/1.1 {status} Stub\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
        text.len()
    );
    let _ = stream.flush();
}

/// Child speaking the line protocol: echoes each prompt, numbering replies
/// so reuse of one process is observable.
pub const ECHO_CHILD: &str = r#"python3 -u -c '
import sys, json
n = 0
for line in sys.stdin:
    r = json.loads(line)
    n += 1
    sys.stdout.write(json.dumps({"id": r["id"], "completion": r["prompt"] + " /*" + str(n) + "*/"}) + "\n")
'"#;

/// Match `text` against `pattern`, where each `\d+` in the pattern stands for
/// one or more ASCII digits and everything else is literal. Returns the digit
/// runs.
pub fn match_digits_pattern(pattern: &str, text: &str) -> Option<Vec<u64>> {
    let pieces: Vec<&str> = pattern.split(r"\d+").collect();
    let mut rest = text.strip_prefix(pieces[0])?;
    let mut found = Vec::new();
    for piece in &pieces[1..] {
        let digits = rest.bytes().take_while(u8::is_ascii_digit).count();
        if digits == 0 {
            return None;
        }
        found.push(rest[..digits].parse().ok()?);
        rest = rest[digits..].strip_prefix(piece)?;
    }
    rest.is_empty().then_some(found)
}

pub fn collapse_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Every `func_/var_/arr_/num_/str_` suffix in `text`.
pub fn placeholder_suffixes(text: &str) -> Vec<(String, u64)> {
    text.split(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .filter_map(|w| {
            let (prefix, digits) = w.split_once('_')?;
            let ok = ["func", "var", "arr", "num", "str"].contains(&prefix)
                && !digits.is_empty()
                && digits.bytes().all(|b| b.is_ascii_digit());
            if !ok {
                return None;
            }
            Some((prefix.to_owned(), digits.parse().ok()?))
        })
        .collect()
}

// End-to-end evaluation inputs built from the fixture tree.

pub struct FixtureEval {
    pub prep: PrepOutput,
    pub tasks: Vec<EvalTask>,
}

/// Prep the fixture tree, partition its test split and build tasks for both
/// datasets and both variants at the default context lengths.
pub fn fixture_eval() -> FixtureEval {
    let prep = run_prep(&PrepConfig { input: fixture_root(), seed: 7, ..Default::default() }).unwrap();
    let part = partition_openmp(&prep.splits.test, &PartitionConfig::default());
    let config = TaskConfig::default();
    let mut set = make_tasks(&part.general, Dataset::General, &config);
    set.extend(make_tasks(&part.openmp, Dataset::Openmp, &config));
    FixtureEval { prep, tasks: set.tasks }
}

pub fn oracle_for(tasks: &[EvalTask]) -> OracleBackend {
    OracleBackend::new(tasks.iter().map(|t| (t.task_id.clone(), t.reference_tokens.clone())))
}

/// Order-4 baseline trained on the lexed training split.
pub fn train_baseline(prep: &PrepOutput) -> NgramModel {
    let seqs: Vec<Vec<String>> = prep.splits.train.iter().map(|r| tokens(&r.code, r.language)).collect();
    train_ngram(&seqs, NgramConfig::default()).unwrap()
}
