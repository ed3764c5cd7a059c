use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";
/// Environment variable naming the directory relative output paths live under.
pub const OUTPUT_ROOT_VAR: &str = "SUMPROD_OUTPUT_ROOT";

/// Resolve an output path against the output root when it is relative.
pub fn resolve_output(path: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_VAR) {
        Some(root) if path.is_relative() => PathBuf::from(root).join(path),
        _ => path.to_path_buf(),
    }
}

pub fn write_file(path: &Path, body: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, body).map_err(|e| CliError::io(path, e))
}

pub fn sha256_hex(body: &[u8]) -> String {
    format!("{:x}", Sha256::digest(body))
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    /// Relative to the run directory.
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub version: String,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<OutputEntry>,
}

/// A run directory being filled: outputs are written and hashed as they come.
pub struct Run {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Run {
    pub fn start(dir: PathBuf, command: &str, config: serde_json::Value, seeds: Vec<u64>) -> Result<Run, CliError> {
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Run {
            dir,
            manifest: RunManifest {
                command: command.into(),
                config,
                seeds,
                version: env!("CARGO_PKG_VERSION").into(),
                started_unix: unix_now(),
                finished_unix: 0,
                outputs: Vec::new(),
            },
        })
    }

    pub fn write(&mut self, name: &str, body: &[u8]) -> Result<(), CliError> {
        write_file(&self.dir.join(name), body)?;
        self.manifest.outputs.push(OutputEntry {
            file: name.into(),
            sha256: sha256_hex(body),
            bytes: body.len() as u64,
        });
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf, CliError> {
        self.manifest.finished_unix = unix_now();
        self.manifest.outputs.sort_by(|a, b| a.file.cmp(&b.file));
        let body = serde_json::to_string_pretty(&self.manifest).map_err(|e| CliError::json("manifest", e))?;
        let path = self.dir.join(MANIFEST_FILE);
        write_file(&path, body.as_bytes())?;
        Ok(path)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FileCheck {
    pub file: String,
    pub expected: String,
    pub actual: Option<String>,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub dir: String,
    pub manifest: RunManifest,
    pub files: Vec<FileCheck>,
    pub all_ok: bool,
    /// Rows of the first CSV output, header first.
    pub table: Vec<Vec<String>>,
}

pub fn summarize(dir: &Path) -> Result<RunSummary, CliError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| CliError::json(path.display().to_string(), e))?;
    let mut table = Vec::new();
    let files: Vec<FileCheck> = manifest
        .outputs
        .iter()
        .map(|o| {
            let body = fs::read(dir.join(&o.file)).ok();
            if table.is_empty() && o.file.ends_with(".csv") {
                if let Some(b) = &body {
                    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(b.as_slice());
                    table = r.records().filter_map(Result::ok).map(|rec| rec.iter().map(String::from).collect()).collect();
                }
            }
            let actual = body.map(|b| sha256_hex(&b));
            FileCheck {
                file: o.file.clone(),
                ok: actual.as_deref() == Some(o.sha256.as_str()),
                expected: o.sha256.clone(),
                actual,
            }
        })
        .collect();
    Ok(RunSummary {
        dir: dir.display().to_string(),
        all_ok: files.iter().all(|f| f.ok),
        manifest,
        files,
        table,
    })
}

pub fn render_summary(s: &RunSummary) -> String {
    let mut out = String::new();
    let m = &s.manifest;
    let _ = writeln!(out, "run {} ({} v{}, seeds {:?})", s.dir, m.command, m.version, m.seeds);
    for f in &s.files {
        let _ = writeln!(out, "  {:<24} {}  {}", f.file, &f.expected[..12.min(f.expected.len())], if f.ok { "ok" } else { "MISMATCH" });
    }
    if !s.table.is_empty() {
        let widths: Vec<usize> = (0..s.table[0].len())
            .map(|c| s.table.iter().map(|r| r.get(c).map_or(0, |x| shorten(x).len())).max().unwrap_or(0))
            .collect();
        for row in &s.table {
            let cells: Vec<String> = row.iter().zip(&widths).map(|(x, w)| format!("{:>w$}", shorten(x), w = w)).collect();
            let _ = writeln!(out, "  {}", cells.join(" "));
        }
    }
    out
}

/// Floats trimmed to 4 decimals for display.
fn shorten(x: &str) -> String {
    match x.parse::<f64>() {
        Ok(v) if x.contains('.') => format!("{v:.4}"),
        _ => x.to_string(),
    }
}
