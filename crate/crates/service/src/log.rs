//! Append-only, hash-chained session log.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Result, ServiceError};

/// `prev_hash` of entry 0.
pub const GENESIS_HASH: &str = "0000000000000000000000000000000000000000000000000000000000000000";

/// Entry types that record inputs; everything else is engine output.
pub const SETUP: &str = "setup";
pub const ACTION: &str = "action";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub index: u64,
    /// Milliseconds since the Unix epoch. Informational, not hashed.
    pub timestamp_ms: u64,
    pub actor: String,
    #[serde(rename = "type")]
    pub kind: String,
    pub payload: Value,
    pub prev_hash: String,
    pub hash: String,
}

/// SHA-256 over the canonical JSON array `[index, actor, type, payload, prev_hash]`.
pub fn entry_hash(index: u64, actor: &str, kind: &str, payload: &Value, prev_hash: &str) -> String {
    let canonical = json!([index, actor, kind, payload, prev_hash]).to_string();
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

impl LogEntry {
    pub fn seal(
        index: u64,
        timestamp_ms: u64,
        actor: &str,
        kind: &str,
        payload: Value,
        prev_hash: &str,
    ) -> Self {
        LogEntry {
            hash: entry_hash(index, actor, kind, &payload, prev_hash),
            index,
            timestamp_ms,
            actor: actor.into(),
            kind: kind.into(),
            payload,
            prev_hash: prev_hash.into(),
        }
    }

    pub fn is_input(&self) -> bool {
        self.kind == SETUP || self.kind == ACTION
    }

    /// Equal apart from the timestamp.
    pub fn same_event(&self, other: &LogEntry) -> bool {
        self.index == other.index
            && self.actor == other.actor
            && self.kind == other.kind
            && self.payload == other.payload
            && self.prev_hash == other.prev_hash
            && self.hash == other.hash
    }
}

/// Dense indices from 0, intact hashes and an unbroken chain.
pub fn verify_chain(entries: &[LogEntry]) -> Result<()> {
    let mut prev = GENESIS_HASH;
    for (i, e) in entries.iter().enumerate() {
        if e.index != i as u64 {
            return Err(ServiceError::CorruptLog(format!(
                "expected index {i}, found {}",
                e.index
            )));
        }
        if e.prev_hash != prev {
            return Err(ServiceError::CorruptLog(format!(
                "entry {i} does not chain to its predecessor"
            )));
        }
        if entry_hash(e.index, &e.actor, &e.kind, &e.payload, &e.prev_hash) != e.hash {
            return Err(ServiceError::CorruptLog(format!(
                "hash mismatch at entry {i}"
            )));
        }
        prev = &e.hash;
    }
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<LogEntry>> {
    let file =
        File::open(path).map_err(|e| ServiceError::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| ServiceError::Io(format!("{}: {e}", path.display())))?;
        if line.trim().is_empty() {
            continue;
        }
        let entry = serde_json::from_str(&line).map_err(|e| {
            ServiceError::CorruptLog(format!("{} line {}: {e}", path.display(), n + 1))
        })?;
        out.push(entry);
    }
    Ok(out)
}

pub fn append_jsonl(path: &Path, entries: &[LogEntry]) -> Result<()> {
    let io = |e: std::io::Error| ServiceError::Io(format!("{}: {e}", path.display()));
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io)?;
    let mut buf = String::new();
    for e in entries {
        buf.push_str(&serde_json::to_string(e).expect("log entries serialize"));
        buf.push('\n');
    }
    file.write_all(buf.as_bytes()).map_err(io)?;
    file.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: u64) -> Vec<LogEntry> {
        let mut out: Vec<LogEntry> = Vec::new();
        for i in 0..n {
            let prev = out
                .last()
                .map(|e| e.hash.clone())
                .unwrap_or_else(|| GENESIS_HASH.into());
            out.push(LogEntry::seal(
                i,
                1000 + i,
                "system",
                "tick",
                json!({"i": i}),
                &prev,
            ));
        }
        out
    }

    #[test]
    fn intact_chain_verifies() {
        verify_chain(&chain(5)).unwrap();
        verify_chain(&[]).unwrap();
    }

    #[test]
    fn timestamps_are_not_hashed() {
        let a = LogEntry::seal(0, 1, "x", "t", json!(1), GENESIS_HASH);
        let b = LogEntry::seal(0, 2, "x", "t", json!(1), GENESIS_HASH);
        assert_eq!(a.hash, b.hash);
        assert!(a.same_event(&b));
    }

    #[test]
    fn gap_and_tamper_are_corrupt() {
        let mut log = chain(4);
        log.remove(2);
        assert_eq!(verify_chain(&log).unwrap_err().code(), "corrupt_log");

        let mut log = chain(4);
        log[1].payload = json!({"i": 99});
        assert!(
            matches!(verify_chain(&log), Err(ServiceError::CorruptLog(m)) if m.contains("hash mismatch"))
        );
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = std::env::temp_dir().join(format!("ai-lab-log-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("s.jsonl");
        let _ = std::fs::remove_file(&path);
        let log = chain(3);
        append_jsonl(&path, &log[..1]).unwrap();
        append_jsonl(&path, &log[1..]).unwrap();
        assert_eq!(read_jsonl(&path).unwrap(), log);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
