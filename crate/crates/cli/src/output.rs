//! Result files, their hashes, and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const FAILURE_MARKER: &str = "FAILED";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// A contiguous block of seeds `first..first+count` used by one part of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedRange {
    pub label: String,
    pub first: u64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

/// Everything needed to repeat a run bit for bit. Holds no timestamps,
/// paths or worker counts, so identical runs give identical manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub command: String,
    pub code_version: String,
    pub config: serde_json::Value,
    pub config_sha256: String,
    pub seeds: Vec<SeedRange>,
    pub tolerance: Option<f64>,
    pub plots: bool,
    /// `ok`, `check-failed` or `failed`.
    pub status: String,
    pub outputs: Vec<OutputFile>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Manifest> {
        let text = fs::read_to_string(path).with_context(|| format!("reading manifest {}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| crate::UsageError(format!("invalid manifest {}: {e}", path.display())).into())
    }
}

/// Output directory of one run. Files are hashed as they are written.
pub struct Output {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        let marker = dir.join(FAILURE_MARKER);
        if marker.exists() {
            fs::remove_file(&marker).with_context(|| format!("removing stale {}", marker.display()))?;
        }
        Ok(Output {
            dir: dir.to_path_buf(),
            files: vec![],
        })
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(OutputFile {
            file: name.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    /// Write a CSV table; floats use the shortest round-trip representation.
    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(vec![]);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
        self.write(name, &bytes)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, &bytes)
    }

    /// Write the manifest (not itself listed) and, on failure, the marker.
    pub fn finish(&self, mut manifest: Manifest, failure: Option<&str>) -> Result<()> {
        manifest.outputs = self.files.clone();
        let path = self.dir.join(MANIFEST_FILE);
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        if let Some(msg) = failure {
            let marker = self.dir.join(FAILURE_MARKER);
            fs::write(&marker, format!("{msg}\n")).with_context(|| format!("writing {}", marker.display()))?;
        }
        Ok(())
    }
}

/// Shortest round-trip text of a float.
pub fn num(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_reference() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn outputs_are_hashed_and_marker_written() {
        let tmp = tempfile::tempdir().unwrap();
        let mut out = Output::create(tmp.path()).unwrap();
        out.write_csv("a.csv", &["x"], &[vec![num(0.1)]]).unwrap();
        let m = Manifest {
            command: "test".into(),
            code_version: "0".into(),
            config: serde_json::Value::Null,
            config_sha256: String::new(),
            seeds: vec![],
            tolerance: None,
            plots: false,
            status: "failed".into(),
            outputs: vec![],
        };
        out.finish(m, Some("boom")).unwrap();
        let back = Manifest::read(&tmp.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(back.outputs.len(), 1);
        assert_eq!(fs::read_to_string(tmp.path().join("a.csv")).unwrap(), "x\n0.1\n");
        assert!(tmp.path().join(FAILURE_MARKER).exists());
        // a fresh run clears the marker
        Output::create(tmp.path()).unwrap();
        assert!(!tmp.path().join(FAILURE_MARKER).exists());
    }
}
