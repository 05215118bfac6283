//! Output collection and run manifests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    seed: u64,
    config: &'a BTreeMap<String, String>,
    inputs: &'a BTreeMap<String, String>,
    outputs: &'a BTreeMap<String, String>,
}

/// Collects a command's inputs and outputs, then writes the outputs and a
/// manifest. Paths under the output directory are recorded as `$out/...` so
/// manifests do not depend on where the run was written.
pub struct Collector {
    out: PathBuf,
    inputs: BTreeMap<String, String>,
    outputs: Vec<(String, Vec<u8>)>,
}

impl Collector {
    pub fn new(out: &Path) -> Self {
        Self {
            out: out.to_path_buf(),
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    fn label(&self, path: &Path) -> String {
        match path.strip_prefix(&self.out) {
            Ok(rel) => format!("$out/{}", rel.display()),
            Err(_) => path.display().to_string(),
        }
    }

    /// Reads an input file and records its digest.
    pub fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.inputs.insert(self.label(path), sha256_hex(&bytes));
        Ok(bytes)
    }

    /// Queues an output file, relative to the output directory.
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.outputs.push((name.to_string(), bytes));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("outputs serialize");
        bytes.push(b'\n');
        self.add(name, bytes);
    }

    pub fn add_jsonl<T: Serialize>(&mut self, name: &str, records: &[T]) {
        let mut bytes = Vec::new();
        vrdoc::model::write_records(&mut bytes, records).expect("writing to memory");
        self.add(name, bytes);
    }

    /// Writes every queued output and `manifest_<command>.json`.
    pub fn finish(self, command: &str, seed: u64, config: &BTreeMap<String, String>) -> Result<()> {
        std::fs::create_dir_all(&self.out)
            .with_context(|| format!("cannot create {}", self.out.display()))?;
        let mut digests = BTreeMap::new();
        for (name, bytes) in &self.outputs {
            let path = self.out.join(name);
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
            digests.insert(name.clone(), sha256_hex(bytes));
        }
        let manifest = Manifest {
            command,
            seed,
            config,
            inputs: &self.inputs,
            outputs: &digests,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        let name = format!("manifest_{}.json", command.replace(' ', "_"));
        std::fs::write(self.out.join(&name), bytes)?;
        Ok(())
    }
}
