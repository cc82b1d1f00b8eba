use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use ai_lab_core::RNG_ALGORITHM;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::args::{Format, Global};

/// A failure reported as `error: <code>: <message>` with exit status 1.
#[derive(Debug)]
pub struct CliError {
    pub code: String,
    pub message: String,
}

impl CliError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        CliError {
            code: code.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one_line = self.message.replace('\n', " ");
        write!(f, "error: {}: {}", self.code, one_line)
    }
}

impl From<ai_lab_core::Error> for CliError {
    fn from(e: ai_lab_core::Error) -> Self {
        let text = e.to_string();
        let prefix = format!("{}: ", e.code().replace('_', " "));
        CliError::new(e.code(), text.strip_prefix(&prefix).unwrap_or(&text))
    }
}

impl From<ai_lab_service::ServiceError> for CliError {
    fn from(e: ai_lab_service::ServiceError) -> Self {
        CliError::new(e.code(), e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new("io_error", e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::new("io_error", e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// A plot-ready table for `--format csv`.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push<I, S>(&mut self, row: I)
    where
        I: IntoIterator<Item = S>,
        S: ToString,
    {
        self.rows
            .push(row.into_iter().map(|s| s.to_string()).collect());
    }

    fn render(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner()
            .map_err(|e| CliError::new("io_error", e.to_string()))
    }
}

/// What a command produced: the JSON document and its CSV view.
pub struct Report {
    pub json: Value,
    pub table: Table,
}

#[derive(Debug, Serialize)]
struct OutputRecord {
    path: String,
    sha256: String,
}

/// Everything needed to reproduce a run's output files.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    command: String,
    argv: Vec<String>,
    scenarios: Vec<String>,
    params: Value,
    seed: Option<u64>,
    rng_algorithm: &'static str,
    outputs: Vec<OutputRecord>,
}

/// Per-invocation state shared by the command handlers.
pub struct Ctx {
    pub global: Global,
    argv: Vec<String>,
    command: String,
    scenarios: Vec<String>,
    params: Value,
    seed: Option<u64>,
    extra_outputs: Vec<PathBuf>,
}

impl Ctx {
    pub fn new(global: Global, argv: Vec<String>) -> Self {
        Ctx {
            global,
            argv,
            command: String::new(),
            scenarios: Vec::new(),
            params: Value::Null,
            seed: None,
            extra_outputs: Vec::new(),
        }
    }

    pub fn command(&mut self, name: &str) {
        self.command = name.to_string();
    }

    pub fn scenario(&mut self, path: &Path) {
        self.scenarios.push(path.display().to_string());
    }

    pub fn params(&mut self, params: Value) {
        self.params = params;
    }

    /// The run's seed; a fresh one is drawn and printed when `--seed` was
    /// not given.
    pub fn seed(&mut self) -> u64 {
        if let Some(s) = self.seed {
            return s;
        }
        let s = self.global.seed.unwrap_or_else(|| {
            use std::hash::{BuildHasher, Hasher};
            let s = std::collections::hash_map::RandomState::new()
                .build_hasher()
                .finish();
            eprintln!("seed: {s}");
            s
        });
        self.seed = Some(s);
        s
    }

    pub fn warn(&self, msg: &str) {
        if !self.global.quiet {
            eprintln!("warning: {msg}");
        }
    }

    /// Write a side artifact (such as a search trace) and list it in the
    /// manifest.
    pub fn write_artifact(&mut self, path: &Path, value: &Value) -> CliResult<()> {
        std::fs::write(path, pretty(value))?;
        self.extra_outputs.push(path.to_path_buf());
        Ok(())
    }

    /// Emit the main report to `--out` or stdout. With `--out`, a manifest
    /// is written to `<out>.manifest.json`.
    pub fn finish(self, report: Report) -> CliResult<()> {
        let bytes = match self.global.format {
            Format::Json => pretty(&report.json),
            Format::Csv => report.table.render()?,
        };
        let Some(out) = &self.global.out else {
            std::io::stdout().write_all(&bytes)?;
            return Ok(());
        };
        std::fs::write(out, &bytes)?;
        let mut outputs = vec![record(out)?];
        for p in &self.extra_outputs {
            outputs.push(record(p)?);
        }
        let manifest = RunManifest {
            command: self.command,
            argv: self.argv,
            scenarios: self.scenarios,
            params: self.params,
            seed: self.seed,
            rng_algorithm: RNG_ALGORITHM,
            outputs,
        };
        let path = manifest_path(out);
        let value = serde_json::to_value(&manifest).expect("manifest serializes");
        std::fs::write(&path, pretty(&value))?;
        if !self.global.quiet {
            eprintln!("wrote {} ({})", out.display(), path.display());
        }
        Ok(())
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn record(path: &Path) -> CliResult<OutputRecord> {
    let bytes = std::fs::read(path)?;
    Ok(OutputRecord {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

pub fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("json");
    s.push(b'\n');
    s
}

/// Stable text for a float cell in CSV output.
pub fn num(x: f64) -> String {
    format!("{x}")
}
