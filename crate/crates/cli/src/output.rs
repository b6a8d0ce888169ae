//! Atomic file output and JSON run summaries.

use std::io::{self, Write};
use std::path::Path;
use std::process::Command;

use serde::Serialize;

use crate::config::Config;

/// Test hook: abort the process after writing this many bytes of the next
/// file to its temporary path.
pub const CRASH_ENV: &str = "HYPERPERC_CRASH_AFTER_BYTES";

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers see either the old file or the whole new one.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::Builder::new().prefix(".hyperperc-").suffix(".tmp").tempfile_in(dir)?;
    if let Some(n) = std::env::var(CRASH_ENV).ok().and_then(|s| s.parse::<usize>().ok()) {
        tmp.write_all(&bytes[..n.min(bytes.len())])?;
        tmp.flush()?;
        std::process::abort();
    }
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// `git describe` of the source tree, or `unknown` outside a checkout.
pub fn git_describe() -> String {
    Command::new("git")
        .args(["-C", env!("CARGO_MANIFEST_DIR"), "describe", "--always", "--dirty", "--tags"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub command: &'a str,
    pub config: &'a std::collections::BTreeMap<String, String>,
    pub git_describe: String,
    pub wall_time: f64,
    pub results: serde_json::Value,
}

pub fn summary_json(command: &str, config: &Config, wall_time: f64, results: serde_json::Value) -> String {
    let s = Summary { command, config: config.entries(), git_describe: git_describe(), wall_time, results };
    let mut text = serde_json::to_string_pretty(&s).expect("summary serializes");
    text.push('\n');
    text
}
