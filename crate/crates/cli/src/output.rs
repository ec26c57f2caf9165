use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::CliResult;

/// A named CSV document produced by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub csv: String,
}

impl Artifact {
    pub fn new(name: impl Into<String>, csv: String) -> Self {
        Self { name: name.into(), csv }
    }
}

/// Writes every artifact and a `<stem>.json` sidecar echoing `config`.
/// Nothing is written unless the whole run succeeded.
pub fn write_run(dir: &Path, stem: &str, config: &Value, artifacts: &[Artifact]) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(artifacts.len() + 1);
    for a in artifacts {
        let path = dir.join(&a.name);
        fs::write(&path, &a.csv)?;
        written.push(path);
    }
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let sidecar = json!({
        "tool": "wgqed",
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": timestamp,
        "config": config,
        "outputs": artifacts.iter().map(|a| a.name.as_str()).collect::<Vec<_>>(),
    });
    let path = dir.join(format!("{stem}.json"));
    let mut text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    text.push('\n');
    fs::write(&path, text)?;
    written.push(path);
    Ok(written)
}
