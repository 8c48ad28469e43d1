//! `manifest.txt`: key=value record of a command's resolved configuration and artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::Result;

pub const MANIFEST_NAME: &str = "manifest.txt";

#[derive(Debug, Default)]
pub struct RunManifest {
    lines: Vec<(String, String)>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}

impl RunManifest {
    pub fn new(command: &[String]) -> Self {
        let mut m = Self::default();
        m.set("tool", format!("redi {}", env!("CARGO_PKG_VERSION")));
        m.set("command", command.join(" "));
        m
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        self.lines.push((key.into(), value.to_string()));
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let hash = sha256_file(path)?;
        self.set(format!("input.{}", path.display()), hash);
        Ok(())
    }

    /// Records an output file by its name relative to the manifest directory.
    pub fn output(&mut self, path: &Path) -> Result<()> {
        let hash = sha256_file(path)?;
        let name = path
            .file_name()
            .map(PathBuf::from)
            .unwrap_or_else(|| path.to_path_buf());
        self.set(format!("output.{}", name.display()), hash);
        Ok(())
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn write_in(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_NAME);
        fs::write(&path, self.render())?;
        Ok(path)
    }
}

/// Directory a file output lives in (`.` for bare file names).
pub fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}
