//! Output bookkeeping for one command invocation: report files are written
//! through [`Run`] so that the manifest can list them with content hashes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::Config;

#[derive(Serialize)]
struct FileEntry {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    /// Seconds since the Unix epoch; the only field that varies between
    /// otherwise identical runs.
    created_unix: u64,
    parameters: BTreeMap<String, String>,
    seeds: &'a BTreeMap<String, u64>,
    inputs: Vec<FileEntry>,
    outputs: Vec<FileEntry>,
}

pub struct Run {
    command: &'static str,
    out_dir: PathBuf,
    inputs: BTreeMap<String, PathBuf>,
    outputs: Vec<String>,
    seeds: BTreeMap<String, u64>,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl Run {
    pub fn new(command: &'static str, out_dir: PathBuf) -> Result<Self> {
        std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
        Ok(Run {
            command,
            out_dir,
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
            seeds: BTreeMap::new(),
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    /// Records an input file, or every file directly inside an input directory.
    pub fn input(&mut self, path: &Path) -> Result<()> {
        if path.is_dir() {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(path)?
                .map(|e| e.map(|e| e.path()))
                .collect::<std::io::Result<_>>()?;
            entries.sort();
            for p in entries.into_iter().filter(|p| p.is_file()) {
                self.inputs.insert(p.display().to_string(), p);
            }
        } else {
            self.inputs.insert(path.display().to_string(), path.to_path_buf());
        }
        Ok(())
    }

    pub fn seed(&mut self, key: &str, value: u64) {
        self.seeds.insert(key.to_string(), value);
    }

    /// Writes `bytes` to `rel` under the output directory.
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.out_dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(rel.to_string());
        Ok(())
    }

    pub fn write_csv(&mut self, rel: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
        self.write(rel, &bytes)
    }

    /// Writes `manifest.<command>.json` and returns its path.
    pub fn finish(self, cfg: &Config) -> Result<PathBuf> {
        let inputs = self
            .inputs
            .iter()
            .map(|(name, p)| {
                Ok(FileEntry {
                    path: name.clone(),
                    sha256: sha256_file(p)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut outputs = self
            .outputs
            .iter()
            .map(|rel| {
                Ok(FileEntry {
                    path: rel.clone(),
                    sha256: sha256_file(&self.out_dir.join(rel))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        outputs.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = Manifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            parameters: cfg.used_parameters(),
            seeds: &self.seeds,
            inputs,
            outputs,
        };
        let path = self.out_dir.join(format!("manifest.{}.json", self.command));
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

/// File-name form of a frame label: lowercase ASCII words joined by `_`.
pub fn slug(label: &str) -> String {
    let mut out = String::new();
    for part in label
        .split(|c: char| !c.is_alphanumeric())
        .filter(|p| !p.is_empty())
    {
        if !out.is_empty() {
            out.push('_');
        }
        out.push_str(&part.to_lowercase());
    }
    out
}

/// Shortest round-trip decimal form, so that reports are exact and stable.
pub fn num(x: f64) -> String {
    format!("{x}")
}
