use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

pub const TOOL: &str = "guesslab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything needed to reproduce a run. Written into every output file.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub verb: String,
    pub inputs: Vec<String>,
    pub output_dir: String,
    pub seed: u64,
    pub overrides: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("manifest serializes")
    }

    fn compact(&self) -> String {
        serde_json::to_string(self).expect("manifest serializes")
    }
}

/// Writes output files into one directory, refusing to replace existing
/// files unless forced.
pub struct OutputDir {
    dir: PathBuf,
    force: bool,
    manifest: RunManifest,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn new(dir: &Path, force: bool, manifest: RunManifest) -> Self {
        Self {
            dir: dir.to_path_buf(),
            force,
            manifest,
            written: Vec::new(),
        }
    }

    pub fn manifest(&self) -> &RunManifest {
        &self.manifest
    }

    /// Checks every name up front so a refused run writes nothing at all.
    pub fn claim(&self, names: &[&str]) -> Result<()> {
        if self.force {
            return Ok(());
        }
        for name in names {
            let path = self.dir.join(name);
            if path.exists() {
                bail!("refusing to overwrite {} (pass --force to replace it)", path.display());
            }
        }
        Ok(())
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        self.claim(&[name])?;
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// JSON object with the manifest under `"manifest"` and `body` merged in.
    pub fn json(&mut self, name: &str, body: Value) -> Result<PathBuf> {
        let mut doc = json!({ "manifest": self.manifest.to_value() });
        match body {
            Value::Object(fields) => doc.as_object_mut().expect("object").extend(fields),
            other => {
                doc["data"] = other;
            }
        }
        let text = serde_json::to_string_pretty(&doc).expect("values serialize") + "\n";
        self.write(name, &text)
    }

    /// CSV with the manifest on a leading `#` comment line.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let mut table = csv::Writer::from_writer(Vec::new());
        table.write_record(header)?;
        for row in rows {
            table.write_record(row)?;
        }
        let body = String::from_utf8(table.into_inner()?).expect("csv output is utf-8");
        self.write(name, &format!("# {}\n{body}", self.manifest.compact()))
    }

    /// JSON lines, the first of which is `{"manifest": ...}`.
    pub fn json_lines(&mut self, name: &str, lines: &str) -> Result<PathBuf> {
        let text = format!("{}\n{lines}", json!({ "manifest": self.manifest.to_value() }));
        self.write(name, &text)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
