use std::fs;
use std::path::Path;

use serde::Serialize;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Identifies the tool, subcommand, master seed and full configuration that
/// produced an output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub master_seed: u64,
    pub config: ExperimentConfig,
}

impl Provenance {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Self {
            tool: "morphonet",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            master_seed: config.master_seed,
            config: config.clone(),
        }
    }

    /// Comment lines for text formats, without comment markers.
    pub fn lines(&self) -> Vec<String> {
        let config = serde_json::to_string(&self.config).expect("config serializes");
        vec![
            format!("{} {} {}", self.tool, self.version, self.command),
            format!("master_seed: {}", self.master_seed),
            format!("config: {config}"),
        ]
    }
}

pub(crate) fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// CSV text with a `#` provenance preamble.
pub(crate) struct CsvText {
    text: String,
}

impl CsvText {
    pub fn new(provenance: &Provenance, header: &[&str]) -> Self {
        let mut text = String::new();
        for line in provenance.lines() {
            text.push_str("# ");
            text.push_str(&line);
            text.push('\n');
        }
        text.push_str(&header.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row<I, S>(&mut self, cells: I)
    where
        I: IntoIterator<Item = S>,
        S: std::fmt::Display,
    {
        let mut first = true;
        for c in cells {
            if !first {
                self.text.push(',');
            }
            first = false;
            self.text.push_str(&c.to_string());
        }
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_text(path, &self.text)
    }
}

/// Empty cell for missing values.
pub(crate) fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}
