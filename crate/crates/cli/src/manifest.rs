//! Run manifests: everything needed to repeat a run, plus a content hash
//! that every output file carries.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use block_league::sampler::MoveCounters;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const TOOL: &str = "block-league";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputFile {
    pub path: PathBuf,
    pub sha256: String,
}

impl InputFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let bytes =
            std::fs::read(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Ok(InputFile {
            path: path.to_path_buf(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }

    fn name(&self) -> String {
        self.path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub accepted: u64,
    pub proposed: u64,
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceRates {
    pub insert: Rate,
    pub delete: Rate,
    pub gibbs: Rate,
    pub eject: Rate,
    pub absorb: Rate,
}

impl From<&MoveCounters> for AcceptanceRates {
    fn from(c: &MoveCounters) -> Self {
        let r = |m: &block_league::sampler::MoveCounter| Rate {
            accepted: m.accepted,
            proposed: m.proposed,
            rate: m.rate(),
        };
        AcceptanceRates {
            insert: r(&c.insert),
            delete: r(&c.delete),
            gibbs: r(&c.gibbs),
            eject: r(&c.eject),
            absorb: r(&c.absorb),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: Vec<InputFile>,
    /// Command-specific configuration (prior, sampler settings, ...).
    pub settings: Value,
    pub output_dir: PathBuf,
    /// SHA-256 over tool, version, command, input file names and contents,
    /// and settings. Paths, timing and rates are excluded.
    pub hash: String,
    pub wall_clock_seconds: f64,
    #[serde(default)]
    pub acceptance_rates: BTreeMap<String, AcceptanceRates>,
}

impl RunManifest {
    pub fn new(command: &str, inputs: Vec<InputFile>, settings: Value, output_dir: &Path) -> Self {
        let key = serde_json::json!({
            "tool": TOOL,
            "version": VERSION,
            "command": command,
            "inputs": inputs
                .iter()
                .map(|i| serde_json::json!({ "name": i.name(), "sha256": i.sha256 }))
                .collect::<Vec<_>>(),
            "settings": settings,
        });
        let hash = hex::encode(Sha256::digest(key.to_string().as_bytes()));
        RunManifest {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            inputs,
            settings,
            output_dir: output_dir.to_path_buf(),
            hash,
            wall_clock_seconds: 0.0,
            acceptance_rates: BTreeMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Fails when an input no longer matches the recorded hash.
    pub fn verify_inputs(&self) -> Result<(), CliError> {
        for i in &self.inputs {
            let now = InputFile::read(&i.path)?;
            if now.sha256 != i.sha256 {
                return Err(CliError::Input(format!(
                    "{} changed since the manifest was written",
                    i.path.display()
                )));
            }
        }
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        write_file(
            &dir.join("manifest.json"),
            &(serde_json::to_string_pretty(self)? + "\n"),
        )
    }

    /// Comment line prepended to CSV and trace outputs.
    pub fn comment(&self) -> String {
        format!("# manifest={}\n", self.hash)
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
