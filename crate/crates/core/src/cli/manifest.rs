use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::CliError;

/// Written next to every output. `mesrnn <command> --config <manifest>`
/// repeats the run.
#[derive(Serialize)]
pub struct RunManifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: serde_json::Value,
    /// Input path to SHA-256 hex digest.
    inputs: BTreeMap<String, String>,
    seed: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &'static str, args: &impl Serialize, inputs: &[PathBuf], seed: Option<u64>) -> Result<Self, CliError> {
        let mut digests = BTreeMap::new();
        for p in inputs {
            let bytes = std::fs::read(p).map_err(|e| CliError::data(format!("{}: {e}", p.display())))?;
            digests.insert(p.display().to_string(), hex(&Sha256::digest(&bytes)));
        }
        Ok(Self {
            tool: "mesrnn",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config: serde_json::to_value(args).expect("arguments serialize"),
            inputs: digests,
            seed,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
