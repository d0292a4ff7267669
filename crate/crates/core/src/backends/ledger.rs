//! Append-only JSONL log of every backend call.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{BackendError, CompletionRequest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerRecord {
    pub timestamp_ms: u128,
    pub backend: String,
    pub prompt_hash: String,
    pub request: CompletionRequest,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub latency_ms: u128,
}

pub fn prompt_hash(req: &CompletionRequest) -> String {
    let mut h = Sha256::new();
    for m in &req.messages {
        h.update(format!("{:?}", m.role).as_bytes());
        h.update([0u8]);
        h.update(m.content.as_bytes());
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

#[derive(Debug)]
pub struct Ledger {
    path: PathBuf,
    out: Mutex<BufWriter<File>>,
}

impl Ledger {
    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Ledger { path, out: Mutex::new(BufWriter::new(file)) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn record(&self, backend: &str, req: &CompletionRequest, out: &Result<String, BackendError>, latency: Duration) {
        let rec = LedgerRecord {
            timestamp_ms: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0),
            backend: backend.to_string(),
            prompt_hash: prompt_hash(req),
            request: req.clone(),
            reply: out.as_ref().ok().cloned(),
            error: out.as_ref().err().map(|e| e.to_string()),
            latency_ms: latency.as_millis(),
        };
        let line = serde_json::to_string(&rec).expect("ledger record serializes");
        let mut w = self.out.lock().expect("ledger poisoned");
        if let Err(e) = writeln!(w, "{line}").and_then(|_| w.flush()) {
            log::warn!("ledger write failed: {e}");
        }
    }

    pub fn read_all(path: impl AsRef<Path>) -> io::Result<Vec<LedgerRecord>> {
        let reader = BufReader::new(File::open(path)?);
        let mut out = Vec::new();
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            out.push(serde_json::from_str(&line).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?);
        }
        Ok(out)
    }
}
