//! Run manifest: the artifact inventory written at the end of every
//! artifact-producing command, successful or not.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Path relative to the output directory, forward slashes.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    /// "ok" or "failed".
    pub status: String,
    /// Name of the stage that failed; absent on success.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub failed_stage: Option<String>,
    pub artifacts: Vec<ManifestEntry>,
}

fn relative_name(out_dir: &Path, file: &Path) -> String {
    let rel = file.strip_prefix(out_dir).unwrap_or(file);
    let parts: Vec<String> =
        rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
    parts.join("/")
}

/// Hashes `files` and writes `manifest.json` into `out_dir`. Entries are
/// sorted by path so the byte stream is independent of write order.
pub fn write_manifest(
    out_dir: &Path,
    failed_stage: Option<&str>,
    files: &[PathBuf],
) -> io::Result<()> {
    let mut artifacts = Vec::with_capacity(files.len());
    for file in files {
        let data = fs::read(file)?;
        let digest = Sha256::digest(&data);
        artifacts.push(ManifestEntry {
            path: relative_name(out_dir, file),
            bytes: data.len() as u64,
            sha256: format!("{digest:x}"),
        });
    }
    artifacts.sort_by(|a, b| a.path.cmp(&b.path));

    let manifest = Manifest {
        status: if failed_stage.is_none() { "ok" } else { "failed" }.into(),
        failed_stage: failed_stage.map(str::to_owned),
        artifacts,
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(out_dir.join(MANIFEST_NAME), text)
}

pub fn read_manifest(out_dir: &Path) -> io::Result<Manifest> {
    let text = fs::read_to_string(out_dir.join(MANIFEST_NAME))?;
    serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}
