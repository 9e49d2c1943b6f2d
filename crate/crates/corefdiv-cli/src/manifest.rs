//! Reproducibility manifest for pipeline bundles: tool version, a hash of
//! the computation-affecting configuration, and digests of every input file.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::commands::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool_version: &'static str,
    pub config_hash: String,
    pub inputs: Vec<InputDigest>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex(&hasher.finalize())
}

pub fn digest_file(path: &Path) -> Result<InputDigest, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: sha256_hex(&bytes),
    })
}

/// Hash of the serialized effective configuration. Output locations are not
/// part of it: the manifest describes the computation, not where it landed.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    sha256_hex(json.as_bytes())
}

pub fn manifest(config_hash: String, inputs: Vec<InputDigest>) -> Manifest {
    Manifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        config_hash,
        inputs,
    }
}
