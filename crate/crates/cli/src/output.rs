//! Artifact directory: every file goes through [`Output::write`], and the
//! manifest listing them is written last.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST: &str = "manifest.txt";

pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(data: &[u8]) -> String {
    hex(&Sha256::digest(data))
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    /// Creates `name` in the output directory and hands a buffered writer to `fill`.
    pub fn write(&mut self, name: &str, fill: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        fill(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))?;
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        Ok(())
    }

    /// Writes the manifest: configuration hash, code version, then one line
    /// per produced file with its own hash.
    pub fn finish(self, experiment: &str, config_text: &str) -> Result<Vec<String>, CliError> {
        let mut lines = vec![
            format!("config_sha256 = {}", sha256_hex(config_text.as_bytes())),
            format!("version = {}", env!("CARGO_PKG_VERSION")),
            format!("experiment = {experiment}"),
        ];
        for name in &self.files {
            let path = self.dir.join(name);
            let data = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
            lines.push(format!("file = {name} sha256={}", sha256_hex(&data)));
        }
        let path = self.dir.join(MANIFEST);
        fs::write(&path, lines.join("\n") + "\n").map_err(|e| CliError::io(&path, e))?;
        let mut all = self.files;
        all.push(MANIFEST.to_string());
        Ok(all)
    }
}
