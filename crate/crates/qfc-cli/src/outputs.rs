//! Output directory handling: every artifact is registered so the manifest
//! is complete, and `results.json` carries the provenance needed to
//! reproduce a run.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::AppResult;

pub struct OutputSink {
    dir: PathBuf,
    config_hash: String,
    files: Vec<(String, u64, String)>,
    pub metrics: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    settings: BTreeMap<String, String>,
}

impl OutputSink {
    pub fn create(dir: impl AsRef<Path>, config_hash: &str) -> AppResult<Self> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir)?;
        Ok(OutputSink {
            dir,
            config_hash: config_hash.to_string(),
            files: Vec::new(),
            metrics: BTreeMap::new(),
            notes: Vec::new(),
            settings: BTreeMap::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn record_setting(&mut self, key: &str, value: impl std::fmt::Display) {
        self.settings.insert(key.to_string(), value.to_string());
    }

    pub fn record_metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.to_string(), value);
    }

    /// Write a file through a closure and register it in the manifest.
    pub fn write_file(
        &mut self,
        name: &str,
        kind: &str,
        write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
    ) -> AppResult<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut buf = Vec::new();
        write(&mut buf)?;
        std::fs::write(&path, &buf)?;
        self.files.push((name.to_string(), buf.len() as u64, kind.to_string()));
        Ok(())
    }

    /// Write `results.json` and `manifest.json`; call once, last.
    pub fn finalize(mut self) -> AppResult<PathBuf> {
        let mut results = String::new();
        results.push_str("{\n");
        results.push_str(&format!("  \"schema_version\": {},\n", crate::config::SCHEMA_VERSION));
        results.push_str(&format!("  \"config_hash\": \"{}\",\n", self.config_hash));
        results.push_str(&format!(
            "  \"code_version\": \"{}\",\n",
            env!("CARGO_PKG_VERSION")
        ));
        results.push_str("  \"settings\": {\n");
        let n_settings = self.settings.len();
        for (i, (k, v)) in self.settings.iter().enumerate() {
            let comma = if i + 1 < n_settings { "," } else { "" };
            results.push_str(&format!("    \"{k}\": \"{v}\"{comma}\n"));
        }
        results.push_str("  },\n");
        results.push_str("  \"metrics\": {\n");
        let n_metrics = self.metrics.len();
        for (i, (k, v)) in self.metrics.iter().enumerate() {
            let comma = if i + 1 < n_metrics { "," } else { "" };
            results.push_str(&format!("    \"{k}\": {v}{comma}\n"));
        }
        results.push_str("  },\n");
        results.push_str("  \"notes\": [\n");
        let n_notes = self.notes.len();
        for (i, n) in self.notes.iter().enumerate() {
            let comma = if i + 1 < n_notes { "," } else { "" };
            results.push_str(&format!("    \"{}\"{comma}\n", n.replace('"', "'")));
        }
        results.push_str("  ]\n}\n");
        let bytes = results.into_bytes();
        std::fs::write(self.dir.join("results.json"), &bytes)?;
        self.files
            .push(("results.json".into(), bytes.len() as u64, "results".into()));

        let mut manifest = String::new();
        manifest.push_str("{\n");
        manifest.push_str(&format!("  \"config_hash\": \"{}\",\n", self.config_hash));
        manifest.push_str("  \"files\": [\n");
        let n_files = self.files.len();
        for (i, (name, bytes, kind)) in self.files.iter().enumerate() {
            let comma = if i + 1 < n_files { "," } else { "" };
            manifest.push_str(&format!(
                "    {{ \"name\": \"{name}\", \"bytes\": {bytes}, \"kind\": \"{kind}\" }}{comma}\n"
            ));
        }
        manifest.push_str("  ]\n}\n");
        std::fs::write(self.dir.join("manifest.json"), manifest)?;
        Ok(self.dir)
    }
}

/// Format a float with Rust's shortest round-trip representation (stable and
/// locale-independent, `.` decimal separator).
pub fn fmt(v: f64) -> String {
    format!("{v}")
}
