use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Record of one invocation; written last, next to the files it lists.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub code_version: &'static str,
    /// Canonical form of the effective configuration.
    pub config: String,
    pub seed: Option<u64>,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub status: String,
    pub files: Vec<FileEntry>,
}

pub fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn walk(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.is_dir() {
            walk(root, &path, out)?;
        } else if path.file_name().is_some_and(|n| n != MANIFEST_NAME) {
            out.push(path);
        }
    }
    Ok(())
}

impl RunManifest {
    pub fn new(command: &str, config: String, seed: Option<u64>, started_unix: f64) -> Self {
        Self {
            command: command.into(),
            code_version: env!("CARGO_PKG_VERSION"),
            config,
            seed,
            started_unix,
            finished_unix: started_unix,
            status: "ok".into(),
            files: Vec::new(),
        }
    }

    /// Checksums every file under `dir` and writes `dir/manifest.json`.
    pub fn finish(mut self, dir: &Path, status: &str) -> Result<()> {
        let mut paths = Vec::new();
        walk(dir, dir, &mut paths)?;
        paths.sort();
        self.files = paths
            .iter()
            .map(|p| {
                Ok(FileEntry {
                    path: p.strip_prefix(dir).unwrap_or(p).to_string_lossy().replace('\\', "/"),
                    bytes: fs::metadata(p)?.len(),
                    sha256: sha256_file(p)?,
                })
            })
            .collect::<Result<_>>()?;
        self.status = status.into();
        self.finished_unix = unix_now();
        let text = serde_json::to_string_pretty(&self)?;
        fs::write(dir.join(MANIFEST_NAME), text + "\n").context("writing manifest")?;
        Ok(())
    }
}
