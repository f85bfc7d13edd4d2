use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use super::{parse_csv, serialize_csv, DateRange, PriceSeries, Result};

/// On-disk cache of fetched histories, one CSV file per `(ticker, start, end)`.
///
/// Entries never expire. Writes to the same key are serialized; readers only ever
/// see complete files because entries are written to a temporary name and renamed.
#[derive(Debug)]
pub struct HistoryCache {
    dir: PathBuf,
    locks: Mutex<HashMap<PathBuf, Arc<Mutex<()>>>>,
}

impl HistoryCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            locks: Mutex::new(HashMap::new()),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// File backing the given key.
    pub fn path_for(&self, ticker: &str, range: DateRange) -> PathBuf {
        let safe: String = ticker
            .chars()
            .map(|c| {
                if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '^' | '=') {
                    c
                } else {
                    '_'
                }
            })
            .collect();
        self.dir.join(format!(
            "{}_{}_{}.csv",
            safe,
            range.start().format("%Y-%m-%d"),
            range.end().format("%Y-%m-%d")
        ))
    }

    pub fn load(&self, ticker: &str, range: DateRange) -> Result<Option<PriceSeries>> {
        let path = self.path_for(ticker, range);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path)?;
        Ok(Some(parse_csv(ticker, &text)?.series))
    }

    pub fn store(&self, series: &PriceSeries, range: DateRange) -> Result<PathBuf> {
        let path = self.path_for(series.ticker(), range);
        let lock = self.key_lock(&path);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());
        fs::create_dir_all(&self.dir)?;
        let tmp = path.with_extension(format!("csv.tmp{}", std::process::id()));
        fs::write(&tmp, serialize_csv(series))?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    fn key_lock(&self, path: &Path) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(path.to_path_buf()).or_default().clone()
    }
}
