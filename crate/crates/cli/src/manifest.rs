//! Run manifests: every output directory gets exactly one `manifest.json`
//! recording the subcommand, resolved settings with their hash, content
//! hashes of all inputs, and start/finish timestamps.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use alpha_embeddings::util::sha256_hex;
use alpha_embeddings::Error;
use serde::Serialize;

use crate::CliError;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Serialize)]
struct RunManifest {
    subcommand: String,
    tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    config_hash: String,
    config: serde_json::Value,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
    started_utc: String,
    finished_utc: String,
}

fn utc_now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub struct ManifestBuilder {
    subcommand: String,
    seed: Option<u64>,
    config: serde_json::Value,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
    started_utc: String,
}

impl ManifestBuilder {
    pub fn new(subcommand: &str) -> Self {
        ManifestBuilder {
            subcommand: subcommand.to_string(),
            seed: None,
            config: serde_json::Value::Null,
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            started_utc: utc_now(),
        }
    }

    pub fn seed(&mut self, seed: u64) {
        self.seed = Some(seed);
    }

    pub fn config<T: Serialize>(&mut self, settings: &T) {
        self.config = serde_json::to_value(settings).expect("settings serialize");
    }

    /// Hash an input file's bytes into the manifest.
    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = fs::read(path).map_err(|e| {
            CliError::Data(Error::Io {
                context: format!("open {}", path.display()),
                source: e,
            })
        })?;
        self.input_hash(path, sha256_hex(&bytes));
        Ok(())
    }

    /// Record a hash computed while the file was already in memory.
    pub fn input_hash(&mut self, path: &Path, hash: String) {
        self.inputs.insert(path.display().to_string(), hash);
    }

    /// Register an output file (must live inside the output directory).
    pub fn output(&mut self, path: &Path) {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        self.outputs.push(name);
    }

    pub fn write(self, out_dir: &Path) -> Result<PathBuf, CliError> {
        let config_hash = sha256_hex(
            serde_json::to_string(&self.config)
                .expect("settings serialize")
                .as_bytes(),
        );
        let manifest = RunManifest {
            subcommand: self.subcommand,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            seed: self.seed,
            config_hash,
            config: self.config,
            inputs: self.inputs,
            outputs: self.outputs,
            started_utc: self.started_utc,
            finished_utc: utc_now(),
        };
        let path = out_dir.join(MANIFEST_NAME);
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, json).map_err(|e| {
            CliError::Data(Error::Io {
                context: format!("write {}", path.display()),
                source: e,
            })
        })?;
        Ok(path)
    }
}
