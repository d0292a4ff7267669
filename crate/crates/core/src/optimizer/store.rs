//! Append-only question store and atomic checkpoints.
//!
//! The store is JSONL, one [`QuestionRecord`] per line; a later row with the
//! same id supersedes earlier ones. The checkpoint remembers how many store
//! bytes it covers, so a resume truncates any rows written after it.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{OptError, QuestionRecord};

pub fn io_err(path: &Path, e: impl std::fmt::Display) -> OptError {
    OptError::Io(format!("{}: {e}", path.display()))
}

/// Writes via a sibling temp file and rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), OptError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
    }
    let tmp = path.with_extension("tmp");
    let mut f = File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), OptError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| io_err(path, e))?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, OptError> {
    let s = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&s).map_err(|e| OptError::Data(format!("{}: {e}", path.display())))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, OptError> {
    let f = File::open(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| io_err(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line).map_err(|e| OptError::Data(format!("{}:{}: {e}", path.display(), n + 1)))?,
        );
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), OptError> {
    let mut s = String::new();
    for r in rows {
        s.push_str(&serde_json::to_string(r).map_err(|e| io_err(path, e))?);
        s.push('\n');
    }
    write_atomic(path, s.as_bytes())
}

#[derive(Debug, Clone)]
pub struct QuestionStore {
    path: PathBuf,
}

impl QuestionStore {
    pub fn new(path: impl AsRef<Path>) -> Self {
        QuestionStore { path: path.as_ref().to_path_buf() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends rows; returns the store length in bytes afterwards.
    pub fn append(&self, rows: &[QuestionRecord]) -> Result<u64, OptError> {
        if let Some(parent) = self.path.parent() {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path).map_err(|e| io_err(&self.path, e))?;
        let mut buf = String::new();
        for r in rows {
            buf.push_str(&serde_json::to_string(r).map_err(|e| io_err(&self.path, e))?);
            buf.push('\n');
        }
        f.write_all(buf.as_bytes()).and_then(|_| f.sync_data()).map_err(|e| io_err(&self.path, e))?;
        self.len()
    }

    pub fn len(&self) -> Result<u64, OptError> {
        match fs::metadata(&self.path) {
            Ok(m) => Ok(m.len()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(0),
            Err(e) => Err(io_err(&self.path, e)),
        }
    }

    pub fn is_empty(&self) -> Result<bool, OptError> {
        Ok(self.len()? == 0)
    }

    /// Drops bytes past `len` (rows written after the last checkpoint).
    pub fn truncate(&self, len: u64) -> Result<(), OptError> {
        if self.len()? == len {
            return Ok(());
        }
        let f = OpenOptions::new().write(true).open(&self.path).map_err(|e| io_err(&self.path, e))?;
        f.set_len(len).map_err(|e| io_err(&self.path, e))
    }

    /// Every row in file order.
    pub fn rows(&self) -> Result<Vec<QuestionRecord>, OptError> {
        if self.len()? == 0 {
            return Ok(Vec::new());
        }
        read_jsonl(&self.path)
    }

    /// Latest row per id, ordered by id.
    pub fn latest(&self) -> Result<BTreeMap<String, QuestionRecord>, OptError> {
        Ok(self.rows()?.into_iter().map(|r| (r.id.clone(), r)).collect())
    }
}
