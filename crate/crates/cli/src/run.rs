use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Exit code 1 for bad input, 2 for everything that fails after the input
/// was accepted.
#[derive(Debug)]
pub enum Failure {
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(e) | Failure::Runtime(e) => write!(f, "{e:#}"),
        }
    }
}

pub type Outcome<T = ()> = Result<T, Failure>;

pub fn invalid(e: impl fmt::Display) -> Failure {
    Failure::Validation(anyhow::anyhow!("{e}"))
}

pub fn runtime(e: impl fmt::Display) -> Failure {
    Failure::Runtime(anyhow::anyhow!("{e}"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Everything needed to reproduce one invocation. `wall_time_ms` is the
/// only field that varies between identical runs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    /// Settings after defaults and parsing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolved: Option<serde_json::Value>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub wall_time_ms: u128,
}

/// Reads inputs and writes outputs while recording their digests.
pub struct Run {
    manifest: RunManifest,
    started: Instant,
}

impl Run {
    pub fn new(command: &str, config: &impl Serialize, seed: Option<u64>) -> Self {
        Self {
            manifest: RunManifest {
                command: command.to_string(),
                config: serde_json::to_value(config).expect("config serializes"),
                resolved: None,
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
                seed,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                wall_time_ms: 0,
            },
            started: Instant::now(),
        }
    }

    pub fn resolve(&mut self, config: &impl Serialize) {
        self.manifest.resolved = Some(serde_json::to_value(config).expect("config serializes"));
    }

    pub fn read(&mut self, path: &Path) -> Outcome<String> {
        let bytes = fs::read(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        self.manifest.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        String::from_utf8(bytes).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }

    /// Records a directory input by path only.
    pub fn note_input(&mut self, path: &Path, digest: impl Into<String>) {
        self.manifest.inputs.insert(path.display().to_string(), digest.into());
    }

    pub fn write(&mut self, path: &Path, bytes: impl AsRef<[u8]>) -> Outcome {
        let bytes = bytes.as_ref();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
        }
        fs::write(path, bytes).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        self.manifest.outputs.insert(name, sha256_hex(bytes));
        Ok(())
    }

    /// Writes the manifest itself to `path`.
    pub fn finish(mut self, path: &Path) -> Outcome {
        self.manifest.wall_time_ms = self.started.elapsed().as_millis();
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        text.push('\n');
        fs::write(path, text).map_err(|e| runtime(format!("{}: {e}", path.display())))
    }
}

/// Manifest path for a single-file output: `<file>.manifest.json`.
pub fn manifest_beside(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    path.with_file_name(name)
}

pub fn jsonl<T: Serialize>(items: &[T]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item).expect("record serializes"));
        out.push('\n');
    }
    out
}
