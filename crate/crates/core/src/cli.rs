//! Command-line front end: `gen-data`, `train`, `infer`, `eval`, `bench`.
//!
//! Each command reads one [`RunConfig`] (defaults when `--config` is
//! absent), applies flag overrides, validates, and writes its artifacts
//! plus the resolved `run_config.toml` under `--out`. Progress goes to
//! the log on standard error.

use crate::config::{ConfigError, RunConfig};
use crate::dataset::{generate_dataset, load_sample, DatasetError, Split};
use crate::eval::{evaluate_manifest, network_estimate, write_reports, EvalError};
use crate::io::FormatError;
use crate::net::{bench, infer, load_checkpoint, train, NetworkParams, ShapeError, TrainError};
use crate::voxel::{write_grid, Grid3, GridGeometry};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Parser)]
#[command(name = "softdeform", version, about = "Learned soft-tissue displacement estimation")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the first generation seed (gen-data) or the training seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// One worker thread and fixed reduction order.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Output directory (output file for `infer`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Val,
    All,
}

impl SplitArg {
    fn split(self) -> Option<Split> {
        match self {
            SplitArg::Train => Some(Split::Train),
            SplitArg::Val => Some(Split::Validation),
            SplitArg::All => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Estimator {
    /// The trained network.
    Model,
    /// The ground truth itself (sanity check of the pipeline).
    Target,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate, voxelize and augment a dataset with a manifest.
    GenData {
        /// Overrides the number of simulation seeds.
        #[arg(long)]
        count: Option<u64>,
    },
    /// Train the network on a manifest.
    Train {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Estimate the displacement for one sample file.
    Infer {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        sample: PathBuf,
    },
    /// Evaluate an estimator and the baselines on a manifest.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "val")]
        split: SplitArg,
        #[arg(long, value_enum, default_value = "model")]
        estimator: Estimator,
    },
    /// Time repeated inference.
    Bench {
        /// Trained parameters; randomly initialized otherwise.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        repetitions: Option<usize>,
    },
}

/// Loads the configuration and applies flag overrides.
pub fn resolve_config(common: &CommonArgs, command: &Command) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(t) = common.threads {
        cfg.threads = t;
    }
    if common.deterministic {
        cfg.deterministic = true;
    }
    if let Some(s) = common.seed {
        match command {
            Command::GenData { .. } => cfg.generation.first_seed = s,
            _ => cfg.training.seed = s,
        }
    }
    match command {
        Command::GenData { count: Some(c) } => cfg.generation.seed_count = *c,
        Command::Bench {
            repetitions: Some(r), ..
        } => cfg.bench.repetitions = *r,
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(common: &CommonArgs, default: &str) -> PathBuf {
    common.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn save_run_config(dir: &Path, cfg: &RunConfig) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(
        dir.join("run_config.toml"),
        format!("# digest {}\n{}", cfg.digest(), cfg.to_toml()),
    )
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value).expect("report serializes") + "\n")
}

#[derive(Serialize)]
struct InferReport {
    config_digest: String,
    checkpoint: String,
    sample: String,
    milliseconds: f64,
}

#[derive(Serialize)]
pub struct BenchReport {
    pub config_digest: String,
    pub grid_n: usize,
    pub parameters: usize,
    pub repetitions: usize,
    pub threads: usize,
    pub mean_ms: f64,
    pub p95_ms: f64,
}

/// Synthetic organ-like input used when benchmarking without a sample.
pub fn synthetic_input(n: usize) -> Grid3 {
    let g = GridGeometry::new(n, 0.3);
    let m = g.len();
    let mut x = Grid3::zeros(g, 5);
    let c = crate::Vec3::repeat(0.15);
    for idx in 0..m {
        let p = g.point_at(idx);
        let s = (p - c).component_div(&crate::Vec3::new(0.09, 0.07, 0.06)).norm() - 1.0;
        x.data[idx] = (0.1 * 0.06 * s) as f32;
        if s.abs() < 0.1 && p.z > 0.17 {
            x.data[2 * m + idx] = 0.01;
        }
    }
    x
}

fn run_command(cli: &Cli, cfg: &RunConfig) -> Result<(), CliError> {
    let digest = cfg.digest();
    match &cli.command {
        Command::GenData { .. } => {
            let out = out_dir(&cli.common, "runs/data");
            save_run_config(&out, cfg)?;
            let g = &cfg.generation;
            let report = generate_dataset(&cfg.dataset, g.first_seed..g.first_seed + g.seed_count, &out)?;
            log::info!(
                "{} accepted, {} rejected; manifest {}",
                report.accepted.len(),
                report.rejected.len(),
                report.manifest_path.display()
            );
        }
        Command::Train { manifest } => {
            let out = out_dir(&cli.common, "runs/train");
            save_run_config(&out, cfg)?;
            let outcome = train(manifest, &cfg.network, &cfg.training, Some(&out))?;
            log::info!(
                "best validation loss at epoch {}; checkpoint {}",
                outcome.best_epoch,
                outcome.checkpoint_path.as_deref().unwrap_or(Path::new("-")).display()
            );
        }
        Command::Infer { checkpoint, sample } => {
            let out = cli
                .common
                .out
                .clone()
                .ok_or_else(|| CliError::Usage("infer needs --out <file>".into()))?;
            let params = load_checkpoint(checkpoint)?.params;
            let s = load_sample(sample)?;
            let (u, elapsed) = infer(&params, &s.input)?;
            let mut w = BufWriter::new(File::create(&out)?);
            write_grid(&mut w, &u)?;
            w.flush()?;
            let ms = elapsed.as_secs_f64() * 1e3;
            write_json(
                &out.with_extension("timing.json"),
                &InferReport {
                    config_digest: digest,
                    checkpoint: checkpoint.display().to_string(),
                    sample: sample.display().to_string(),
                    milliseconds: ms,
                },
            )?;
            log::info!("inference {ms:.1} ms; wrote {}", out.display());
        }
        Command::Eval {
            manifest,
            checkpoint,
            split,
            estimator,
        } => {
            let out = out_dir(&cli.common, "runs/eval");
            save_run_config(&out, cfg)?;
            let run = match estimator {
                Estimator::Target => evaluate_manifest(manifest, split.split(), |s| Ok(s.target.clone()))?,
                Estimator::Model => {
                    let path = checkpoint
                        .as_ref()
                        .ok_or_else(|| CliError::Usage("eval with the model estimator needs --checkpoint".into()))?;
                    let params = load_checkpoint(path)?.params;
                    evaluate_manifest(manifest, split.split(), |s| network_estimate(&params, s))?
                }
            };
            let summary = write_reports(&out, &run, &digest)?;
            for e in &summary.estimators {
                log::info!("{}: mean error {:.5} m, max {:.5} m", e.name, e.mean_error, e.max_error);
            }
        }
        Command::Bench { checkpoint, .. } => {
            let params = match checkpoint {
                Some(p) => load_checkpoint(p)?.params,
                None => {
                    let mut net = cfg.network.clone();
                    net.grid_n = cfg.bench.grid_n;
                    NetworkParams::init(net, cfg.training.seed)?
                }
            };
            let input = synthetic_input(params.config.grid_n);
            let (mean_ms, p95_ms) = bench(&params, &input, cfg.bench.repetitions)?;
            let report = BenchReport {
                config_digest: digest,
                grid_n: params.config.grid_n,
                parameters: params.values.len(),
                repetitions: cfg.bench.repetitions,
                threads: rayon::current_num_threads(),
                mean_ms,
                p95_ms,
            };
            log::info!(
                "n={} ({} parameters): mean {mean_ms:.1} ms, p95 {p95_ms:.1} ms per inference",
                report.grid_n,
                report.parameters
            );
            if let Some(out) = &cli.common.out {
                std::fs::create_dir_all(out)?;
                write_json(&out.join("bench.json"), &report)?;
            }
        }
    }
    Ok(())
}

/// Runs a parsed command inside a worker pool sized by the configuration.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = resolve_config(&cli.common, &cli.command)?;
    let threads = if cfg.deterministic { 1 } else { cfg.threads };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    pool.install(|| run_command(cli, &cfg))
}
