//! Config file loading.
//!
//! One file can override the board description, the accelerator build, or
//! both; anything omitted keeps its default. JSON and TOML are told apart
//! by file extension.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arch::{ArchConfig, DpuConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub arch: Option<ArchConfig>,
    pub dpu: Option<DpuConfig>,
}

impl FileConfig {
    pub fn arch(&self) -> ArchConfig {
        self.arch.clone().unwrap_or_default()
    }

    pub fn dpu(&self) -> DpuConfig {
        self.dpu.clone().unwrap_or_default()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Loads a config, dispatching on the `.json` / `.toml` extension.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::from_json(&text),
            Some("toml") => Self::from_toml(&text),
            other => Err(Error::Config(format!(
                "config files need a .json or .toml extension, got {:?} ({})",
                other,
                path.display()
            ))),
        }
    }
}
