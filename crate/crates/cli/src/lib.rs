//! Experiment runner: configuration, orchestration of the `bslab` kernels,
//! CSV outputs and reproducibility manifests.

mod config;
mod error;
mod experiments;
mod output;
mod question;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{grid, ContactMode, ExperimentConfig, ExperimentKind, QuestionKind, QuestionPair, RuleName};
pub use error::CliError;
pub use output::{Manifest, OutputDigest, Outputs, MANIFEST_FILE};
pub use question::{pair_families, question_report};

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
}

/// Validates `cfg`, computes every output in memory on a pool of
/// `cfg.threads` workers, then writes the files and the manifest to `cfg.out`.
/// Nothing is written when validation or computation fails.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::ConfigInvalid { field: "threads".into(), message: e.to_string() })?;
    let start = Instant::now();
    let outputs = pool.install(|| experiments::run(cfg))?;
    let dir = Path::new(&cfg.out);
    let manifest = output::write_outputs(dir, cfg, &outputs, start.elapsed().as_secs_f64())?;
    Ok(RunSummary { out_dir: dir.to_path_buf(), manifest })
}

/// Computes the outputs of `cfg` without touching the filesystem.
pub fn compute_outputs(cfg: &ExperimentConfig) -> Result<Outputs, CliError> {
    cfg.validate()?;
    experiments::run(cfg)
}
