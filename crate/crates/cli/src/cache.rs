//! Append-only result cache: one JSON object per line,
//! `{"key": ..., "stored_at": ..., "value": ...}`.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const VERSION_TAG: &str = concat!("gridposet-", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Serialize, Deserialize)]
struct CacheEntry {
    key: String,
    stored_at: u64,
    value: Value,
}

/// Canonical key: operation, parameters with sorted keys, version tag.
pub fn cache_key(op: &str, params: &Value) -> String {
    format!("{op} {params} {VERSION_TAG}")
}

pub struct Cache {
    path: PathBuf,
}

impl Cache {
    pub fn new(path: impl Into<PathBuf>) -> Cache {
        Cache { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn lookup(&self, key: &str) -> io::Result<Option<Value>> {
        let file = match File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e),
        };
        file.lock_shared()?;
        let found = scan(&file, &self.path, key);
        file.unlock()?;
        found
    }

    /// Appends `value` under `key` unless the key is already stored.
    pub fn store(&self, key: &str, value: &Value) -> io::Result<()> {
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(&self.path)?;
        file.lock()?;
        let result = (|| {
            if scan(&file, &self.path, key)?.is_some() {
                return Ok(());
            }
            let stored_at = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
            let entry = CacheEntry { key: key.to_string(), stored_at, value: value.clone() };
            let mut line = serde_json::to_string(&entry).map_err(io::Error::other)?;
            line.push('\n');
            // a torn final line from an interrupted writer must not swallow this entry
            if !ends_with_newline(&mut file)? {
                line.insert(0, '\n');
            }
            file.write_all(line.as_bytes())?;
            file.flush()
        })();
        file.unlock()?;
        result
    }
}

fn ends_with_newline(file: &mut File) -> io::Result<bool> {
    let len = file.metadata()?.len();
    if len == 0 {
        return Ok(true);
    }
    let mut reader = &*file;
    reader.seek(SeekFrom::Start(len - 1))?;
    let mut last = [0u8; 1];
    io::Read::read_exact(&mut reader, &mut last)?;
    Ok(last[0] == b'\n')
}

fn scan(file: &File, path: &Path, key: &str) -> io::Result<Option<Value>> {
    let mut reader = BufReader::new(file);
    reader.seek(SeekFrom::Start(0))?;
    let mut found = None;
    for (no, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<CacheEntry>(&line) {
            Ok(entry) if entry.key == key => {
                found = Some(entry.value);
                break;
            }
            Ok(_) => {}
            Err(_) => eprintln!("warning: ignoring corrupt cache line {} in {}", no + 1, path.display()),
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn round_trip_and_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path().join("c.jsonl"));
        let key = cache_key("max-free", &json!({"k": 3, "n": 2}));
        assert_eq!(cache.lookup(&key).unwrap(), None);
        cache.store(&key, &json!({"count": 5})).unwrap();
        assert_eq!(cache.lookup(&key).unwrap(), Some(json!({"count": 5})));
        assert_eq!(cache.lookup("other").unwrap(), None);
        // keys stay unique
        cache.store(&key, &json!({"count": 6})).unwrap();
        assert_eq!(cache.lookup(&key).unwrap(), Some(json!({"count": 5})));
    }

    #[test]
    fn corrupt_trailing_line_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let cache = Cache::new(&path);
        cache.store("a", &json!(1)).unwrap();
        std::fs::OpenOptions::new().append(true).open(&path).unwrap().write_all(b"{\"key\": \"b\", \"val").unwrap();
        assert_eq!(cache.lookup("a").unwrap(), Some(json!(1)));
        assert_eq!(cache.lookup("b").unwrap(), None);
        cache.store("b", &json!(2)).unwrap();
        assert_eq!(cache.lookup("b").unwrap(), Some(json!(2)));
    }

    #[test]
    fn version_is_part_of_the_key() {
        let key = cache_key("width", &json!({}));
        assert!(key.ends_with(VERSION_TAG));
        assert_ne!(key, format!("width {} gridposet-0.0.0-old", json!({})));
    }
}
