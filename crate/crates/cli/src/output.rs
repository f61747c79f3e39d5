//! Atomic file output and run manifests.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<FileDigest, CliError> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(FileDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)
        .map_err(|e| CliError::Input(format!("cannot write into {}: {e}", dir.display())))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| CliError::Input(format!("cannot write {}: {}", path.display(), e.error)))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to repeat a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after config expansion.
    pub argv: Vec<String>,
    pub cwd: String,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    #[serde(default)]
    pub notes: serde_json::Value,
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    output.with_file_name(name)
}

/// Outputs produced by a command, before they are written.
#[derive(Default)]
pub struct RunOutput {
    pub files: Vec<(PathBuf, Vec<u8>)>,
    pub inputs: Vec<PathBuf>,
    pub seeds: BTreeMap<String, u64>,
    pub notes: serde_json::Value,
}

impl RunOutput {
    pub fn file(path: &Path, bytes: impl Into<Vec<u8>>) -> RunOutput {
        RunOutput {
            files: vec![(path.to_path_buf(), bytes.into())],
            ..RunOutput::default()
        }
    }
}

/// Write all outputs and one manifest next to each of them.
pub fn commit(
    out: RunOutput,
    command: &str,
    argv: &[String],
    config: serde_json::Value,
) -> Result<RunManifest, CliError> {
    let inputs = out
        .inputs
        .iter()
        .map(|p| file_digest(p))
        .collect::<Result<Vec<_>, _>>()?;
    let manifest = RunManifest {
        tool: "infoproc".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        argv: argv.to_vec(),
        cwd: std::env::current_dir()?.display().to_string(),
        config,
        seeds: out.seeds,
        inputs,
        outputs: out
            .files
            .iter()
            .map(|(p, b)| FileDigest {
                path: p.display().to_string(),
                sha256: sha256_hex(b),
            })
            .collect(),
        notes: out.notes,
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    for (path, bytes) in &out.files {
        write_atomic(path, bytes)?;
        write_atomic(&manifest_path(path), text.as_bytes())?;
        log::info!("wrote {}", path.display());
    }
    Ok(manifest)
}
