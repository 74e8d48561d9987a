use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{CorpusError, FunctionRecord};

/// Records per JSONL shard.
pub const SHARD_SIZE: usize = 100_000;

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CorpusError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CorpusError::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| CorpusError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        serde_json::to_writer(&mut w, item).map_err(|e| CorpusError::Json {
            path: path.to_owned(),
            line: 0,
            source: e,
        })?;
        w.write_all(b"\n").map_err(|e| CorpusError::io(path, e))?;
    }
    w.flush().map_err(|e| CorpusError::io(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CorpusError> {
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CorpusError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(&line).map_err(|e| CorpusError::Json {
            path: path.to_owned(),
            line: i + 1,
            source: e,
        })?;
        out.push(item);
    }
    Ok(out)
}

fn shard_path(path: &Path, index: usize) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("records");
    path.with_file_name(format!("{stem}-{index:05}.jsonl"))
}

/// Writes `path` directly, or `stem-00000.jsonl`, `stem-00001.jsonl`, ... when
/// there are more than [`SHARD_SIZE`] records. Returns the files written.
pub fn write_records(path: &Path, records: &[FunctionRecord]) -> Result<Vec<PathBuf>, CorpusError> {
    if records.len() <= SHARD_SIZE {
        write_jsonl(path, records)?;
        return Ok(vec![path.to_owned()]);
    }
    let mut written = Vec::new();
    for (i, chunk) in records.chunks(SHARD_SIZE).enumerate() {
        let p = shard_path(path, i);
        write_jsonl(&p, chunk)?;
        written.push(p);
    }
    Ok(written)
}

/// Reads `path`, or its shards when only those exist.
pub fn read_records(path: &Path) -> Result<Vec<FunctionRecord>, CorpusError> {
    if path.exists() || !shard_path(path, 0).exists() {
        return read_jsonl(path);
    }
    let mut out = Vec::new();
    for i in 0.. {
        let p = shard_path(path, i);
        if !p.exists() {
            break;
        }
        out.extend(read_jsonl::<FunctionRecord>(&p)?);
    }
    Ok(out)
}
