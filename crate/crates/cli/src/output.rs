//! In-memory output sets, CSV rendering and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{hex, ExperimentConfig};
use crate::error::CliError;

/// Files produced by one experiment, held until the run succeeds.
#[derive(Debug, Default, Clone)]
pub struct Outputs {
    pub files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn push(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }
}

/// CSV with a leading `#` comment row naming the seed and config digest.
pub struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn columns(&self) -> &[&'static str] {
        &self.columns
    }

    pub fn render(&self, cfg: &ExperimentConfig) -> Vec<u8> {
        let mut out = header_comment(cfg).into_bytes();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        out.extend(w.into_inner().expect("in-memory write"));
        out
    }
}

pub fn header_comment(cfg: &ExperimentConfig) -> String {
    format!(
        "# bslab {} experiment={} seed={} config_sha256={}\n",
        env!("CARGO_PKG_VERSION"),
        cfg.experiment.name(),
        cfg.seed,
        cfg.digest()
    )
}

/// Shortest round-trip decimal; `nan` for missing values.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x}")
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".into(), num)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub experiment: String,
    pub seed: u64,
    pub config_sha256: String,
    pub config: ExperimentConfig,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputDigest>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes every file and then the manifest into `dir`.
pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, outputs: &Outputs, wall_clock_seconds: f64) -> Result<Manifest, CliError> {
    let io = |p: &Path, e: std::io::Error| CliError::Io { path: p.display().to_string(), message: e.to_string() };
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut digests = Vec::with_capacity(outputs.files.len());
    for (name, bytes) in &outputs.files {
        let path: PathBuf = dir.join(name);
        fs::write(&path, bytes).map_err(|e| io(&path, e))?;
        digests.push(OutputDigest { file: name.clone(), bytes: bytes.len(), sha256: hex(&Sha256::digest(bytes)) });
    }
    let manifest = Manifest {
        tool: "bslab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        experiment: cfg.experiment.name().into(),
        seed: cfg.seed,
        config_sha256: cfg.digest(),
        config: cfg.clone(),
        wall_clock_seconds,
        outputs: digests,
    };
    let path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(&path, text).map_err(|e| io(&path, e))?;
    Ok(manifest)
}
