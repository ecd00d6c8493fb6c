//! Run manifests: what a command was asked to do, fully resolved, and what
//! it wrote. Replaying the recorded arguments reproduces every artifact.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;

pub const RUN_MANIFEST: &str = "run.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Subcommand name.
    pub command: String,
    /// Complete argument list after the program name, every default
    /// materialized and every path absolute.
    pub args: Vec<String>,
    pub seed: u64,
    pub version: String,
    pub duration_secs: f64,
    /// Files written by the run.
    pub artifacts: Vec<PathBuf>,
    /// Resolved configuration of the run.
    pub config: toml::Table,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let text = toml::to_string(self).map_err(|e| CliError::usage(format!("manifest: {e}")))?;
        fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

/// Converts any serializable configuration into a TOML table.
pub fn to_table<T: Serialize>(value: &T) -> toml::Table {
    match toml::Value::try_from(value) {
        Ok(toml::Value::Table(t)) => t,
        Ok(other) => {
            let mut t = toml::Table::new();
            t.insert("value".into(), other);
            t
        }
        Err(e) => panic!("configuration does not serialize to TOML: {e}"),
    }
}
