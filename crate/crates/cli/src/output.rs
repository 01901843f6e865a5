//! Output bookkeeping: tracked artifact files, the run manifest, and JSON
//! rounding to six significant digits.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use cauchy_rc::report::round6;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

/// Rounds every non-integer number in `v` to six significant digits.
/// Non-finite values become `null`.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            serde_json::Number::from_f64(round6(x)).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

pub fn to_json_text(value: &impl Serialize) -> Result<String> {
    let v = round_json(serde_json::to_value(value)?);
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
struct OutputDigest {
    file: String,
    sha256: String,
}

/// Everything needed to reproduce a run's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub artifact_version: String,
    pub seed: Option<u64>,
    pub config: Value,
    pub inputs: Vec<InputDigest>,
    outputs: Vec<OutputDigest>,
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>, config: Value, inputs: Vec<InputDigest>) -> Self {
        Self {
            command: command.to_string(),
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            config,
            inputs,
            outputs: Vec::new(),
        }
    }
}

/// Files written into one output directory. Unless [`ArtifactDir::commit`]
/// is reached, everything written is removed again on drop, along with the
/// directory itself if this run created it.
pub struct ArtifactDir {
    dir: PathBuf,
    created_dir: bool,
    written: Vec<(String, String)>,
    committed: bool,
}

impl ArtifactDir {
    pub fn create(dir: &Path) -> Result<Self> {
        let created_dir = !dir.exists();
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            created_dir,
            written: Vec::new(),
            committed: false,
        })
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        // Track before writing so a half-written file is also cleaned up.
        self.written.push((name.to_string(), sha256_hex(contents)));
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    }

    /// Writes `manifest.json` listing every artifact and keeps the outputs.
    pub fn commit(mut self, mut manifest: RunManifest) -> Result<()> {
        manifest.outputs = self
            .written
            .iter()
            .map(|(file, sha256)| OutputDigest {
                file: file.clone(),
                sha256: sha256.clone(),
            })
            .collect();
        let text = to_json_text(&manifest)?;
        self.write("manifest.json", text.as_bytes())?;
        self.committed = true;
        Ok(())
    }
}

impl Drop for ArtifactDir {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for (name, _) in &self.written {
            let _ = fs::remove_file(self.dir.join(name));
        }
        if self.created_dir {
            let _ = fs::remove_dir(&self.dir);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_integers() {
        let v = serde_json::json!({"a": 1.0 / 3.0, "b": 7, "c": [2.0000004, f64::MAX]});
        let r = round_json(v);
        assert_eq!(r["a"], serde_json::json!(0.333333));
        assert_eq!(r["b"], serde_json::json!(7));
        assert_eq!(r["c"][0], serde_json::json!(2.0));
    }

    #[test]
    fn uncommitted_outputs_are_removed() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("out");
        {
            let mut a = ArtifactDir::create(&dir).unwrap();
            a.write("x.csv", b"1\n").unwrap();
            assert!(dir.join("x.csv").exists());
        }
        assert!(!dir.exists());
    }
}
