//! Append-only text cache of trapezoid sums.
//!
//! One record per line, `key<TAB>value`, values rendered with 17 significant
//! digits so that re-reading reproduces the stored `f64` bit for bit. When a
//! key occurs twice the first record wins.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::error::{ImsError, Result};

/// Environment variable naming the default cache file.
pub const CACHE_ENV: &str = "IMS_CACHE";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct CacheStats {
    pub records: usize,
    pub duplicate_lines: usize,
    pub malformed_lines: usize,
    pub file_bytes: u64,
}

#[derive(Debug)]
pub struct ResultCache {
    path: PathBuf,
    records: Mutex<HashMap<String, String>>,
    writer: Mutex<Option<BufWriter<File>>>,
    stats: Mutex<CacheStats>,
}

fn io_err(path: &Path, e: std::io::Error) -> ImsError {
    ImsError::Cache(format!("{}: {e}", path.display()))
}

pub fn render(value: f64) -> String {
    format!("{value:.16e}")
}

/// Canonical record key for a trapezoid sum.
pub fn record_key(map_id: &str, t: f64, r: f64, n: usize) -> String {
    format!("{map_id}|t={}|r={}|n={n}", render(t), render(r))
}

impl ResultCache {
    /// Opens (creating if needed) the cache file at `path`.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut records = HashMap::new();
        let mut stats = CacheStats::default();
        if path.exists() {
            let file = File::open(&path).map_err(|e| io_err(&path, e))?;
            for line in BufReader::new(file).lines() {
                let line = line.map_err(|e| io_err(&path, e))?;
                if line.is_empty() {
                    continue;
                }
                match line.split_once('\t') {
                    Some((k, v)) if !k.is_empty() && v.parse::<f64>().is_ok() => {
                        if records.contains_key(k) {
                            stats.duplicate_lines += 1;
                        } else {
                            records.insert(k.to_string(), v.to_string());
                        }
                    }
                    _ => stats.malformed_lines += 1,
                }
            }
        }
        stats.records = records.len();
        Ok(ResultCache {
            path,
            records: Mutex::new(records),
            writer: Mutex::new(None),
            stats: Mutex::new(stats),
        })
    }

    /// Opens the file named by `IMS_CACHE`, if set.
    pub fn from_env() -> Result<Option<Self>> {
        match std::env::var_os(CACHE_ENV) {
            Some(p) if !p.is_empty() => Ok(Some(Self::open(p)?)),
            _ => Ok(None),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        let records = self.records.lock().expect("cache lock poisoned");
        records.get(key).and_then(|v| v.parse().ok())
    }

    /// Appends a record unless the key is already present.
    pub fn put(&self, key: &str, value: f64) -> Result<()> {
        let text = render(value);
        let mut records = self.records.lock().expect("cache lock poisoned");
        if records.contains_key(key) {
            return Ok(());
        }
        let mut writer = self.writer.lock().expect("cache lock poisoned");
        if writer.is_none() {
            if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| io_err(&self.path, e))?;
            }
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&self.path)
                .map_err(|e| io_err(&self.path, e))?;
            *writer = Some(BufWriter::new(file));
        }
        let w = writer.as_mut().expect("writer just opened");
        writeln!(w, "{key}\t{text}").map_err(|e| io_err(&self.path, e))?;
        records.insert(key.to_string(), text);
        self.stats.lock().expect("cache lock poisoned").records = records.len();
        Ok(())
    }

    pub fn flush(&self) -> Result<()> {
        if let Some(w) = self.writer.lock().expect("cache lock poisoned").as_mut() {
            w.flush().map_err(|e| io_err(&self.path, e))?;
        }
        Ok(())
    }

    pub fn stats(&self) -> Result<CacheStats> {
        self.flush()?;
        let mut s = *self.stats.lock().expect("cache lock poisoned");
        s.file_bytes = std::fs::metadata(&self.path).map(|m| m.len()).unwrap_or(0);
        Ok(s)
    }

    /// Rewrites the file with one line per key (sorted), atomically.
    pub fn gc(&self) -> Result<CacheStats> {
        self.flush()?;
        let mut writer = self.writer.lock().expect("cache lock poisoned");
        *writer = None;
        let records = self.records.lock().expect("cache lock poisoned");
        let mut keys: Vec<&String> = records.keys().collect();
        keys.sort();
        let tmp = self.path.with_extension("gc-tmp");
        {
            let file = File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
            let mut w = BufWriter::new(file);
            for k in keys {
                writeln!(w, "{k}\t{}", records[k]).map_err(|e| io_err(&tmp, e))?;
            }
            w.flush().map_err(|e| io_err(&tmp, e))?;
        }
        std::fs::rename(&tmp, &self.path).map_err(|e| io_err(&self.path, e))?;
        let mut stats = self.stats.lock().expect("cache lock poisoned");
        *stats = CacheStats { records: records.len(), ..CacheStats::default() };
        stats.file_bytes = std::fs::metadata(&self.path).map(|m| m.len()).unwrap_or(0);
        Ok(*stats)
    }
}

impl Drop for ResultCache {
    fn drop(&mut self) {
        let _ = self.flush();
    }
}
