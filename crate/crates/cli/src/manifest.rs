use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use combcnn_core::nn::CHECKPOINT_VERSION;

use crate::CliError;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct ArtifactVersion {
    pub tool: &'static str,
    pub manifest: u32,
    pub checkpoint: u32,
}

/// Record of one invocation, written as JSON next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub parameters: BTreeMap<&'static str, Value>,
    pub seeds: BTreeMap<&'static str, u64>,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub artifact_version: ArtifactVersion,
    pub duration_seconds: f64,
    pub results: BTreeMap<&'static str, Value>,
}

impl RunManifest {
    pub fn new(subcommand: &'static str) -> Self {
        RunManifest {
            subcommand,
            parameters: BTreeMap::new(),
            seeds: BTreeMap::new(),
            inputs: Vec::new(),
            outputs: Vec::new(),
            artifact_version: ArtifactVersion {
                tool: env!("CARGO_PKG_VERSION"),
                manifest: MANIFEST_VERSION,
                checkpoint: CHECKPOINT_VERSION,
            },
            duration_seconds: 0.0,
            results: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &'static str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(key, to_value(value));
        self
    }

    pub fn result(&mut self, key: &'static str, value: impl Serialize) -> &mut Self {
        self.results.insert(key, to_value(value));
        self
    }

    /// Stamps the duration and writes the manifest to `path`, which is
    /// listed among the outputs.
    pub fn write(&mut self, path: &Path, elapsed: Duration) -> Result<(), CliError> {
        self.duration_seconds = elapsed.as_secs_f64();
        self.outputs.push(path.to_path_buf());
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}

fn to_value(value: impl Serialize) -> Value {
    serde_json::to_value(value).expect("plain data serializes")
}
