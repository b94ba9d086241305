use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST_FORMAT: &str = "signet-run/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: PathBuf,
    pub sha256: String,
}

/// Everything needed to rerun a command and check its outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub format: String,
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub argv: Vec<String>,
    pub cwd: PathBuf,
    /// Every option after defaults were applied.
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub threads: usize,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    /// Command-specific results such as accuracy.
    pub summary: serde_json::Value,
    pub started_at: String,
    pub finished_at: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn hash_file(path: &Path) -> CliResult<FileHash> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(FileHash { path: path.to_path_buf(), sha256: sha256_hex(&bytes) })
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        fs::write(path, s).map_err(|e| CliError::io(path, e))
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let m: RunManifest = serde_json::from_str(&text)?;
        if m.format != MANIFEST_FORMAT {
            return Err(CliError::new("E_REPLAY", format!("unsupported manifest format `{}`", m.format)));
        }
        Ok(m)
    }
}

/// `out.json` -> `out.json.manifest.json`; directories get `manifest.json`.
pub fn default_path(primary: &Path, is_dir: bool) -> PathBuf {
    if is_dir {
        primary.join("manifest.json")
    } else {
        let mut s = primary.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }
}
