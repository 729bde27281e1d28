//! Result bundles: a directory of JSON and CSV files plus a manifest, written
//! atomically by building it in a sibling temp dir and renaming it into place.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use freqgate::matrix::round_sig;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST: &str = "manifest.json";
pub const CONFIG: &str = "config.json";

/// Significant digits kept for floats in JSON documents.
pub const JSON_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    /// SHA-256 of `config.json` as stored in the bundle.
    pub config_sha256: String,
    /// SHA-256 of the config file as read, when one was given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_sha256: Option<String>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub elapsed_seconds: f64,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// Every float rounded to `digits` significant digits.
pub fn round_floats(value: Value, digits: usize) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("checked f64");
            serde_json::Number::from_f64(round_sig(x, digits)).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(|v| round_floats(v, digits)).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v, digits))).collect()),
        other => other,
    }
}

/// Pretty JSON with floats at [`JSON_DIGITS`] significant digits.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("result documents always serialize");
    let mut text = serde_json::to_string_pretty(&round_floats(v, JSON_DIGITS)).expect("values always serialize");
    text.push('\n');
    text
}

/// Files of a bundle under construction, in name order.
#[derive(Debug, Default)]
pub struct BundleBuilder {
    files: BTreeMap<String, Vec<u8>>,
}

impl BundleBuilder {
    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        self.files.insert(name.to_string(), to_json(value).into_bytes());
    }

    pub fn add_text(&mut self, name: &str, text: String) {
        self.files.insert(name.to_string(), text.into_bytes());
    }

    pub fn file_names(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    /// Writes the files plus `manifest` to `dest`, replacing any previous
    /// bundle there only once the new one is complete.
    pub fn write(self, dest: &Path, mut manifest: Manifest) -> Result<PathBuf, CliError> {
        let io = |e| CliError::output(dest, e);
        let parent = match dest.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let name = dest
            .file_name()
            .ok_or_else(|| CliError::output(dest, std::io::Error::other("output path has no final component")))?
            .to_string_lossy()
            .into_owned();
        fs::create_dir_all(&parent).map_err(io)?;
        let staging = tempfile::Builder::new().prefix(&format!(".{name}.partial-")).tempdir_in(&parent).map_err(io)?;

        manifest.files = self
            .files
            .iter()
            .map(|(n, bytes)| FileEntry { name: n.clone(), bytes: bytes.len(), sha256: sha256_hex(bytes) })
            .collect();
        for (n, bytes) in &self.files {
            fs::write(staging.path().join(n), bytes).map_err(io)?;
        }
        fs::write(staging.path().join(MANIFEST), to_json(&manifest)).map_err(io)?;

        let staged = staging.keep();
        let finish = || -> std::io::Result<()> {
            if dest.exists() {
                let old = parent.join(format!(".{name}.replaced-{}", std::process::id()));
                fs::rename(dest, &old)?;
                fs::rename(&staged, dest)?;
                fs::remove_dir_all(&old)
            } else {
                fs::rename(&staged, dest)
            }
        };
        if let Err(e) = finish() {
            let _ = fs::remove_dir_all(&staged);
            return Err(io(e));
        }
        Ok(dest.to_path_buf())
    }
}

/// A bundle read back from disk.
#[derive(Debug)]
pub struct LoadedBundle {
    pub path: PathBuf,
    pub manifest: Manifest,
}

impl LoadedBundle {
    pub fn open(path: &Path) -> Result<Self, CliError> {
        let err = |detail: String| CliError::Bundle { path: path.to_path_buf(), detail };
        if !path.is_dir() {
            return Err(err("not a directory".into()));
        }
        let text = fs::read_to_string(path.join(MANIFEST)).map_err(|e| err(format!("{MANIFEST}: {e}")))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| err(format!("{MANIFEST}: {e}")))?;
        let mut problems = Vec::new();
        if manifest.files.is_empty() {
            problems.push("manifest lists no result files".to_string());
        }
        for f in &manifest.files {
            match fs::read(path.join(&f.name)) {
                Ok(bytes) if sha256_hex(&bytes) != f.sha256 => problems.push(format!("{}: checksum mismatch", f.name)),
                Ok(_) => {}
                Err(e) => problems.push(format!("{}: {e}", f.name)),
            }
        }
        if !problems.is_empty() {
            return Err(err(problems.join("; ")));
        }
        Ok(Self { path: path.to_path_buf(), manifest })
    }

    pub fn read_json<T: serde::de::DeserializeOwned>(&self, name: &str) -> Result<T, CliError> {
        let err = |detail: String| CliError::Bundle { path: self.path.clone(), detail };
        let text = fs::read_to_string(self.path.join(name)).map_err(|e| err(format!("{name}: {e}")))?;
        serde_json::from_str(&text).map_err(|e| err(format!("{name}: {e}")))
    }

    pub fn has(&self, name: &str) -> bool {
        self.manifest.files.iter().any(|f| f.name == name)
    }
}
