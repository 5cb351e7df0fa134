//! Run provenance. Every command that writes files also writes one
//! manifest recording its resolved flags, seeds, and outputs; re-running
//! with the manifest's seeds reproduces simulated-mode outputs exactly.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use chrono::{SecondsFormat, Utc};
use serde::Serialize;

#[derive(Serialize)]
pub struct Manifest {
    command: String,
    version: String,
    started: String,
    finished: String,
    config: BTreeMap<String, String>,
    seeds: BTreeMap<String, u64>,
    outputs: Vec<String>,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}

impl Manifest {
    pub fn start(command: &str) -> Self {
        Manifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            started: now(),
            finished: String::new(),
            config: BTreeMap::new(),
            seeds: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.config.insert(key.to_string(), value.to_string());
    }

    pub fn seed(&mut self, name: &str, value: u64) {
        self.seeds.insert(name.to_string(), value);
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Stamps the end time and writes <dir>/manifest.toml.
    pub fn write(mut self, dir: &Path) -> anyhow::Result<PathBuf> {
        self.finished = now();
        let path = dir.join("manifest.toml");
        let text = toml::to_string_pretty(&self).context("serializing manifest")?;
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}
