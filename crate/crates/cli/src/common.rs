//! Shared CLI plumbing: output-path resolution, config echoes and summary
//! formatting.

use crate::OutputFormat;
use anyhow::{Context, Result};
use serde_json::Value;
use std::path::{Path, PathBuf};

pub struct Global {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
}

impl Global {
    /// Relative output names land in the out-dir; absolute paths pass
    /// through.
    pub fn out_path(&self, name: &Path) -> PathBuf {
        if name.is_absolute() {
            name.to_path_buf()
        } else {
            self.out_dir.join(name)
        }
    }

    pub fn format_name(&self) -> &'static str {
        match self.format {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        }
    }
}

/// Writes `<out-dir>/<subcommand>.config.json` capturing every effective
/// parameter plus the canonical argv that reproduces the run.
pub fn write_echo(global: &Global, subcommand: &str, params: Value, argv: Vec<String>) -> Result<()> {
    let echo = serde_json::json!({
        "subcommand": subcommand,
        "seed": global.seed,
        "out_dir": global.out_dir,
        "format": global.format_name(),
        "params": params,
        "argv": argv,
    });
    let path = global.out_dir.join(format!("{subcommand}.config.json"));
    write_json_file(&path, &echo)
}

pub fn write_json_file(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    write_json_file(path, &serde_json::to_value(value)?)
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Flattens a one-level JSON summary object into `key=value` CSV cells.
pub fn summary_csv(summary: &Value) -> String {
    match summary.as_object() {
        Some(map) => map
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(","),
        None => summary.to_string(),
    }
}

/// Canonical argv fragment for the global flags.
pub fn global_argv(global: &Global) -> Vec<String> {
    vec![
        "--seed".into(),
        global.seed.to_string(),
        "--out-dir".into(),
        global.out_dir.display().to_string(),
        "--format".into(),
        global.format_name().into(),
    ]
}
