//! Result bundles: data files plus a manifest with config echo, hashes and
//! provenance. Rerunning an identical config reproduces the data files
//! bitwise; the manifest carries timestamps and is exempt.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{hex_digest, ExperimentConfig};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub created_unix: u64,
    pub seed: u64,
    pub config_hash: String,
    pub hash_algorithm: String,
    pub config: ExperimentConfig,
    pub files: Vec<FileEntry>,
    pub verdicts: Value,
    pub pass: bool,
}

pub struct ResultBundle {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

/// Write data files and the manifest into `dir` (created; must not already
/// contain a manifest — one run owns its directory).
pub fn write_bundle(
    dir: &Path,
    config: &ExperimentConfig,
    files: &[(String, Vec<u8>)],
    verdicts: Value,
    pass: bool,
) -> Result<ResultBundle> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    if dir.join("manifest.json").exists() {
        bail!("output directory {} already holds a bundle", dir.display());
    }
    let mut entries = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        entries.push(FileEntry { name: name.clone(), sha256: hex_digest(bytes), bytes: bytes.len() });
    }
    let manifest = Manifest {
        tool: "landau-lab".into(),
        version: TOOL_VERSION.into(),
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        seed: config.seed,
        config_hash: config.config_hash(),
        hash_algorithm: "sha256".into(),
        config: config.clone(),
        files: entries,
        verdicts,
        pass,
    };
    let text = serde_json::to_string_pretty(&manifest)?;
    std::fs::write(dir.join("manifest.json"), text)?;
    Ok(ResultBundle { dir: dir.to_path_buf(), manifest })
}

/// Load a bundle and verify data-file integrity against the manifest.
pub fn load_bundle(dir: &Path) -> Result<ResultBundle> {
    let mpath = dir.join("manifest.json");
    let text = std::fs::read_to_string(&mpath)
        .with_context(|| format!("missing manifest {}", mpath.display()))?;
    let manifest: Manifest =
        serde_json::from_str(&text).context("manifest is not valid JSON")?;
    if manifest.config_hash != manifest.config.config_hash() {
        bail!("manifest config hash mismatch (expected {})", manifest.config.config_hash());
    }
    for f in &manifest.files {
        let path = dir.join(&f.name);
        let bytes =
            std::fs::read(&path).with_context(|| format!("missing data file {}", path.display()))?;
        let digest = hex_digest(&bytes);
        if digest != f.sha256 {
            bail!("integrity error: {} hash {} != manifest {}", f.name, digest, f.sha256);
        }
    }
    Ok(ResultBundle { dir: dir.to_path_buf(), manifest })
}
