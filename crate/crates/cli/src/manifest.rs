use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use volwave::report::SCHEMA_VERSION;

use crate::CliError;

/// Record of one command invocation, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub command: String,
    pub inputs: Vec<String>,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    pub tool_version: String,
    /// Milliseconds since the Unix epoch.
    pub started: u128,
    pub finished: u128,
}

pub fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            inputs: Vec::new(),
            config,
            outputs: Vec::new(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            started: now_ms(),
            finished: 0,
        }
    }

    pub fn input(&mut self, p: &Path) {
        self.inputs.push(p.display().to_string());
    }

    pub fn output(&mut self, p: &Path) {
        self.outputs.push(p.display().to_string());
    }

    /// Writes the manifest to `path`, or next to the first output as
    /// `<output>.manifest.json`. Nothing is written when there are no file
    /// outputs and no explicit path.
    pub fn finish(mut self, path: Option<&Path>) -> Result<(), CliError> {
        self.finished = now_ms();
        let target: PathBuf = match (path, self.outputs.first()) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(first)) => PathBuf::from(format!("{first}.manifest.json")),
            (None, None) => return Ok(()),
        };
        crate::write_json(&target, &self)
    }
}
