//! Persistence: record CSVs, run summaries and the Weingarten cache file.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::experiments::ExperimentRecord;
use crate::run::RunConfig;
use crate::weingarten::{CacheRecord, WeingartenCache};

/// Environment variable naming the default cache directory.
pub const CACHE_DIR_ENV: &str = "RMPS_CACHE_DIR";
/// File name of the cache inside that directory.
pub const CACHE_FILE: &str = "weingarten.cache";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}:{line}: {msg}")]
    CacheParse { path: PathBuf, line: usize, msg: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> IoError + '_ {
    move |source| IoError::Csv { path: path.to_path_buf(), source }
}

/// Writes `rows` under an explicit header, so an empty table still has one.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<(), IoError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(BufWriter::new(file));
    writer.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        writer.serialize(row).map_err(csv_err(path))?;
    }
    writer.flush().map_err(io_err(path))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, IoError> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(path))?;
    reader.deserialize().collect::<Result<_, _>>().map_err(csv_err(path))
}

pub fn persist_records(records: &[ExperimentRecord], path: &Path) -> Result<(), IoError> {
    write_csv(path, &ExperimentRecord::HEADER, records)
}

pub fn load_records(path: &Path) -> Result<Vec<ExperimentRecord>, IoError> {
    read_csv(path)
}

/// Output summary of a run; `config` is enough to reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub version: String,
    pub seed: u64,
    pub config: RunConfig,
    pub passed: bool,
    pub result: serde_json::Value,
}

impl RunSummary {
    pub fn new(config: RunConfig, passed: bool, result: serde_json::Value) -> Self {
        Self { version: env!("CARGO_PKG_VERSION").to_string(), seed: config.seed(), config, passed, result }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("summary serializes");
        text.push('\n');
        text
    }
}

pub fn write_summary(summary: &RunSummary, path: &Path) -> Result<(), IoError> {
    std::fs::write(path, summary.to_json()).map_err(io_err(path))
}

pub fn read_summary(path: &Path) -> Result<RunSummary, IoError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|source| IoError::Json { path: path.to_path_buf(), source })
}

/// Reads a cache file, one `p;cycle_type;n;num/den` record per line. Blank
/// lines and lines starting with `#` are ignored.
pub fn load_cache(path: &Path) -> Result<WeingartenCache, IoError> {
    let file = File::open(path).map_err(io_err(path))?;
    let cache = WeingartenCache::new();
    for (k, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let record: CacheRecord = trimmed
            .parse()
            .map_err(|msg| IoError::CacheParse { path: path.to_path_buf(), line: k + 1, msg })?;
        cache.insert(record);
    }
    Ok(cache)
}

/// Writes every record of `cache`, sorted, creating parent directories.
pub fn save_cache(cache: &WeingartenCache, path: &Path) -> Result<(), IoError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let file = File::create(path).map_err(io_err(path))?;
    let mut out = BufWriter::new(file);
    for record in cache.records() {
        writeln!(out, "{record}").map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))
}

/// `$RMPS_CACHE_DIR/weingarten.cache`, if the variable is set.
pub fn default_cache_path() -> Option<PathBuf> {
    std::env::var_os(CACHE_DIR_ENV).filter(|v| !v.is_empty()).map(|dir| PathBuf::from(dir).join(CACHE_FILE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symgroup::Permutation;
    use crate::weingarten::wg;

    #[test]
    fn empty_records_write_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        persist_records(&[], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "d,D,n,l,seed,sample,trace,purity_unnorm,purity_norm,sup_dist,renyi2,degenerate\n");
        assert!(load_records(&path).unwrap().is_empty());
    }

    #[test]
    fn records_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let records = vec![
            ExperimentRecord {
                d: 2,
                bond_dim: 4,
                n: 6,
                l: 2,
                seed: 9,
                sample: 0,
                trace: 0.1 + 0.2,
                purity_unnorm: 1e-300,
                purity_norm: Some(0.25000000000000006),
                sup_dist: Some(0.0),
                renyi2: Some(1.3862943611198906),
                degenerate: false,
            },
            ExperimentRecord {
                sample: 1,
                trace: 0.0,
                purity_unnorm: 0.0,
                purity_norm: None,
                sup_dist: None,
                renyi2: None,
                degenerate: true,
                ..Default::default()
            },
        ];
        persist_records(&records, &path).unwrap();
        assert_eq!(load_records(&path).unwrap(), records);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.lines().nth(2).unwrap().ends_with(",,,,true"));
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join(CACHE_FILE);
        let cache = WeingartenCache::new();
        for n in [3u64, 5, 8] {
            for sigma in ["()", "(1 2)", "(1 2 3)"] {
                let perm = Permutation::parse_cycles(sigma, Some(3)).unwrap();
                cache.insert(CacheRecord { n, cycle_type: perm.cycle_type(), value: wg(n, &perm).unwrap() });
            }
        }
        save_cache(&cache, &path).unwrap();
        let loaded = load_cache(&path).unwrap();
        assert_eq!(loaded.records(), cache.records());
        assert_eq!(loaded.len(), 9);
    }

    #[test]
    fn malformed_cache_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.cache");
        std::fs::write(&path, "2;1,1;4;1/15\n\n2;2;4;oops\n").unwrap();
        match load_cache(&path) {
            Err(IoError::CacheParse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let missing = dir.path().join("missing.cache");
        let err = load_cache(&missing).unwrap_err();
        assert!(err.to_string().contains("missing.cache"));
    }
}
