//! Run manifests: every emitted artifact embeds a short hash of the tool
//! version, subcommand parameters and input file contents, so outputs can
//! be traced back to exactly what produced them.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub struct RunManifest {
    hasher: Sha256,
    inputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(env!("CARGO_PKG_VERSION").as_bytes());
        hasher.update(b"\0");
        hasher.update(command.as_bytes());
        RunManifest {
            hasher,
            inputs: Vec::new(),
        }
    }

    pub fn param(&mut self, name: &str, value: impl ToString) {
        self.hasher.update(b"\0p:");
        self.hasher.update(name.as_bytes());
        self.hasher.update(b"=");
        self.hasher.update(value.to_string().as_bytes());
    }

    /// Read an input file, folding its bytes into the manifest.
    pub fn read_input(&mut self, path: &Path) -> Result<String> {
        let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.hasher.update(b"\0f:");
        self.hasher.update(path.to_string_lossy().as_bytes());
        self.hasher.update(b"\0");
        self.hasher.update(&bytes);
        self.inputs.push(path.display().to_string());
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    /// Short content hash over version, parameters and inputs.
    pub fn hash(&self) -> String {
        let digest = self.hasher.clone().finalize();
        hex::encode(&digest[..8])
    }

    /// `# manifest <hash> inputs=<...>` comment line for CSV artifacts.
    pub fn csv_comment(&self) -> String {
        let mut line = format!("# manifest {}", self.hash());
        if !self.inputs.is_empty() {
            let _ = write!(line, " inputs={}", self.inputs.join(";"));
        }
        line.push('\n');
        line
    }
}
