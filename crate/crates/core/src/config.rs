//! Application configuration: a single JSON file whose values sit between
//! command-line flags (which win) and built-in defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Environment variable that overrides the remote reader endpoint from the
/// config file.
pub const ENDPOINT_ENV: &str = "RAGQA_READER_ENDPOINT";

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub documents: Option<PathBuf>,
    pub passages: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub rules: Option<PathBuf>,
    pub qa_train: Option<PathBuf>,
    pub qa_validation: Option<PathBuf>,
    pub qa_test: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub paths: Paths,
    pub k1: f64,
    pub b: f64,
    pub k: usize,
    pub budget: usize,
    pub endpoint: Option<String>,
    pub seed: u64,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            paths: Paths::default(),
            k1: 1.2,
            b: 0.75,
            k: 10,
            budget: 1024,
            endpoint: None,
            seed: DEFAULT_SEED,
        }
    }
}

impl AppConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Config file if given, defaults otherwise, then the endpoint variable.
    pub fn resolve(path: Option<&Path>) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        if let Ok(endpoint) = std::env::var(ENDPOINT_ENV) {
            if !endpoint.trim().is_empty() {
                cfg.endpoint = Some(endpoint);
            }
        }
        Ok(cfg)
    }
}

/// Fails on the first path that does not exist, before any work starts.
pub fn require_existing<'a, I>(paths: I) -> Result<()>
where
    I: IntoIterator<Item = &'a Path>,
{
    for p in paths {
        if !p.exists() {
            return Err(Error::Config(format!("input {} does not exist", p.display())));
        }
    }
    Ok(())
}
