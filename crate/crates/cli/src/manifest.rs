use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    /// `None` for values given inline on the command line.
    pub path: Option<String>,
    pub sha256: String,
}

/// What produced an output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub inputs: BTreeMap<String, InputRecord>,
    /// SHA-256 of the resolved configuration and command parameters.
    pub config_hash: String,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve_time_ms: Option<f64>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn start(command: &str) -> Manifest {
        Manifest {
            command: command.to_string(),
            inputs: BTreeMap::new(),
            config_hash: String::new(),
            seed: None,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: now(),
            finished_at: String::new(),
            solve_time_ms: None,
            outputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, name: &str, path: &Path, text: &str) {
        self.inputs.insert(
            name.to_string(),
            InputRecord {
                path: Some(path.display().to_string()),
                sha256: sha256_hex(text.as_bytes()),
            },
        );
    }

    pub fn add_inline_input(&mut self, name: &str, text: &str) {
        self.inputs.insert(
            name.to_string(),
            InputRecord {
                path: None,
                sha256: sha256_hex(text.as_bytes()),
            },
        );
    }

    pub fn set_config(&mut self, config: &impl Serialize, params: Value) {
        let canonical = json!({ "config": config, "params": params, "seed": self.seed });
        self.config_hash = sha256_hex(canonical.to_string().as_bytes());
    }
}

/// Files written by one run; nothing is written without `--out-dir`.
pub struct Outputs {
    dir: Option<PathBuf>,
    written: Vec<String>,
}

impl Outputs {
    pub fn new(dir: Option<PathBuf>) -> CliResult<Outputs> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d).map_err(|e| CliError::Io(format!("{}: {e}", d.display())))?;
        }
        Ok(Outputs { dir, written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> CliResult<()> {
        if let Some(d) = &self.dir {
            let path = d.join(name);
            std::fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            self.written.push(name.to_string());
        }
        Ok(())
    }

    pub fn finish(mut self, mut manifest: Manifest) -> CliResult<()> {
        manifest.outputs = std::mem::take(&mut self.written);
        manifest.finished_at = now();
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        if self.dir.is_some() {
            self.write(MANIFEST_FILE, &text)?;
        }
        Ok(())
    }
}
