use std::path::PathBuf;
use std::process::ExitCode;

use bslab_cli::{run_experiment, ExperimentConfig, ExperimentKind};
use clap::Parser;

/// Percolation, contact-process and random-walk probes on truncated Cayley graphs.
#[derive(Debug, Parser)]
#[command(name = "bslab", version)]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: ExperimentKind,
    /// Flat TOML configuration; missing keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut cfg = match &args.config {
        Some(path) => match ExperimentConfig::from_file(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => ExperimentConfig::default(),
    };
    cfg.experiment = args.experiment;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = out.display().to_string();
    }
    if let Some(threads) = args.threads {
        cfg.threads = threads;
    }
    match run_experiment(&cfg) {
        Ok(summary) => {
            for o in &summary.manifest.outputs {
                println!("{}  {}", o.sha256, summary.out_dir.join(&o.file).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
