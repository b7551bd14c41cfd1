use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::checkpoint::sha256_hex;
use crate::error::Result;

/// Environment variable naming the root under which run directories go.
pub const RUN_DIR_ENV: &str = "PATCHWORK_RUN_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputProvenance {
    pub path: String,
    pub sha256: String,
}

impl InputProvenance {
    pub fn of_file(path: &Path) -> Result<Self> {
        Ok(InputProvenance {
            path: path.display().to_string(),
            sha256: sha256_hex(&fs::read(path)?),
        })
    }

    /// Provenance for inputs that are not files (analytic shapes).
    pub fn named(name: &str) -> Self {
        InputProvenance {
            path: name.to_string(),
            sha256: sha256_hex(name.as_bytes()),
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub input: Option<InputProvenance>,
    pub seed: u64,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, input: Option<InputProvenance>, seed: u64) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            input,
            seed,
            started_unix: now(),
            finished_unix: 0,
            outputs: Vec::new(),
        }
    }

    pub fn save(&mut self, path: &Path) -> Result<()> {
        self.finished_unix = now();
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        fs::write(path, s)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// An output directory held under an exclusive lock for its lifetime.
#[derive(Debug)]
pub struct RunDir {
    path: PathBuf,
    _lock: File,
}

impl RunDir {
    /// Opens (creating if needed) `path`, or `$PATCHWORK_RUN_DIR/name` when
    /// `path` is relative and the variable is set.
    pub fn open(path: &Path) -> Result<Self> {
        let path = match std::env::var_os(RUN_DIR_ENV) {
            Some(root) if path.is_relative() => PathBuf::from(root).join(path),
            _ => path.to_path_buf(),
        };
        fs::create_dir_all(&path)?;
        let lock = File::create(path.join(".lock"))?;
        lock.lock()?;
        Ok(RunDir { path, _lock: lock })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn join(&self, name: &str) -> PathBuf {
        self.path.join(name)
    }
}
