//! Provenance records carried by every artifact: tool version, seed, the
//! parameters that shaped the artifact and SHA-256 digests of its inputs.
//!
//! Only file names and content digests are recorded, never absolute paths or
//! timestamps, so identical inputs give identical records.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub const TOOL: &str = "ocean";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub stage: String,
    pub seed: u64,
    #[serde(default)]
    pub inputs: BTreeMap<String, InputDigest>,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
}

impl Provenance {
    pub fn new(stage: &str, seed: u64) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            stage: stage.into(),
            seed,
            inputs: BTreeMap::new(),
            params: BTreeMap::new(),
        }
    }

    /// Records the digest of the file at `path` under `role`.
    pub fn input(mut self, role: &str, path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        let file = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        self.inputs.insert(
            role.into(),
            InputDigest {
                file,
                sha256: sha256_hex(&bytes),
            },
        );
        Ok(self)
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).expect("parameters serialize");
        self.params.insert(key.into(), v);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("provenance serializes")
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
