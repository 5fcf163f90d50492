//! CSV, JSON and manifest writers.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::{CliError, Config};

/// Wall-time breakdown in milliseconds, in insertion order.
#[derive(Debug, Default)]
pub struct Timings {
    entries: Vec<(String, f64)>,
}

impl Timings {
    pub fn record(&mut self, name: &str, since: Instant) {
        self.entries
            .push((name.to_string(), since.elapsed().as_secs_f64() * 1e3));
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        for (k, v) in &self.entries {
            m.insert(k.clone(), json!(v));
        }
        Value::Object(m)
    }
}

pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn write(&mut self, name: &str, body: &str) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, body)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(path)
    }

    pub fn csv<I>(&mut self, name: &str, header: &str, rows: I) -> Result<PathBuf, CliError>
    where
        I: IntoIterator<Item = String>,
    {
        let mut body = String::from(header);
        body.push('\n');
        for row in rows {
            body.push_str(&row);
            body.push('\n');
        }
        self.write(name, &body)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut body = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Io(format!("cannot encode {name}: {e}")))?;
        body.push('\n');
        self.write(name, &body)
    }

    /// Writes `manifest.json` listing everything written so far.
    pub fn manifest(
        &mut self,
        command: &str,
        config: &Config,
        seed: u64,
        timings: &Timings,
    ) -> Result<PathBuf, CliError> {
        let manifest = json!({
            "command": command,
            "tool_version": env!("CARGO_PKG_VERSION"),
            "seed": seed,
            "outputs": self.written,
            "config": config,
            "wall_time": timings.to_json(),
        });
        self.json("manifest.json", &manifest)
    }
}

/// Formats floats with the shortest round-trip representation.
pub fn row(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:e}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Drops every `wall_time` member, recursively.
pub fn strip_wall_times(value: &mut Value) {
    match value {
        Value::Object(m) => {
            m.remove("wall_time");
            m.values_mut().for_each(strip_wall_times);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_wall_times),
        _ => {}
    }
}
