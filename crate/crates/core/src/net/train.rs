use super::adam::{adam_step, AdamConfig, AdamState};
use super::checkpoint::{save_checkpoint, Checkpoint};
use super::loss::{total_loss, LossConfig, LossTargets};
use super::model::{backward, forward, forward_train, organ_mask, NetworkConfig, NetworkParams};
use super::ops::ShapeError;
use super::tensor::Tensor;
use crate::dataset::{load_sample, DatasetManifest, Sample, Split};
use crate::io::FormatError;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

pub const LOG_FILE: &str = "training_log.csv";
pub const BEST_CHECKPOINT: &str = "best.dgnet";

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error("invalid training configuration: {0}")]
    Config(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub adam: AdamConfig,
    pub batch_size: usize,
    /// Loss weight per output level, finest first.
    pub level_weights: Vec<f64>,
    pub max_epochs: usize,
    /// Epochs without a validation improvement before stopping.
    pub patience: usize,
    /// Optional cap on optimizer steps per epoch.
    pub max_steps_per_epoch: Option<usize>,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            adam: AdamConfig::default(),
            batch_size: 4,
            level_weights: vec![1.0; 4],
            max_epochs: 50,
            patience: 3,
            max_steps_per_epoch: None,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self, net: &NetworkConfig) -> Result<(), TrainError> {
        let bad = |m: String| Err(TrainError::Config(m));
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if self.level_weights.len() != net.levels() {
            return bad(format!("{} level weights for {} outputs", self.level_weights.len(), net.levels()));
        }
        if self.level_weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return bad("level weights must be finite and non-negative".into());
        }
        let a = &self.adam;
        if !(a.learning_rate > 0.0 && (0.0..1.0).contains(&a.beta1) && (0.0..1.0).contains(&a.beta2) && a.epsilon > 0.0) {
            return bad(format!("invalid Adam settings {a:?}"));
        }
        Ok(())
    }

    pub fn loss(&self) -> LossConfig {
        LossConfig {
            level_weights: self.level_weights.clone(),
        }
    }
}

/// Network input and multi-resolution targets of one sample.
pub struct TrainingItem {
    pub input: Tensor<f32>,
    pub targets: LossTargets<f32>,
}

impl TrainingItem {
    pub fn from_sample(sample: &Sample, levels: usize) -> Result<Self, ShapeError> {
        let n = sample.geometry().n;
        let input = Tensor::from_vec(sample.input.channels, n, sample.input.data.clone());
        let target = Tensor::from_vec(sample.target.channels, n, sample.target.data.clone());
        let targets = LossTargets::new(&target, organ_mask(&input), levels)?;
        Ok(Self { input, targets })
    }
}

/// Parameters plus optimizer state; one `step` per mini-batch.
pub struct Trainer {
    pub params: NetworkParams<f32>,
    pub state: AdamState,
    pub cfg: TrainingConfig,
    loss: LossConfig,
}

impl Trainer {
    pub fn new(params: NetworkParams<f32>, cfg: TrainingConfig) -> Result<Self, TrainError> {
        cfg.validate(&params.config)?;
        Ok(Self {
            state: AdamState::new(params.values.len()),
            loss: cfg.loss(),
            params,
            cfg,
        })
    }

    /// Mean loss of the batch before the update. Per-sample gradients are
    /// computed concurrently and summed in batch order, so the result does
    /// not depend on the thread count.
    pub fn step(&mut self, batch: &[&TrainingItem]) -> Result<f64, TrainError> {
        if batch.is_empty() {
            return Err(TrainError::Config("empty batch".into()));
        }
        let params = &self.params;
        let loss_cfg = &self.loss;
        let per_sample: Vec<Result<(f64, Vec<f32>), ShapeError>> = batch
            .par_iter()
            .map(|item| {
                let (out, cache) = forward_train(params, &item.input)?;
                let (loss, _, grads) = total_loss(&out.fields, &item.targets, loss_cfg, true)?;
                let mut g = NetworkParams::zeros(params.config.clone())?;
                backward(params, &cache, &grads, &mut g)?;
                Ok((loss, g.values))
            })
            .collect();
        let mut sum = vec![0.0f32; self.params.values.len()];
        let mut loss = 0.0;
        for r in per_sample {
            let (l, g) = r?;
            loss += l;
            sum.iter_mut().zip(&g).for_each(|(a, b)| *a += *b);
        }
        let inv = 1.0 / batch.len() as f32;
        sum.iter_mut().for_each(|v| *v *= inv);
        adam_step(&mut self.params.values, &sum, &mut self.state, &self.cfg.adam);
        Ok(loss / batch.len() as f64)
    }

    /// Mean loss over `items` without updating.
    pub fn evaluate(&self, items: &[&TrainingItem]) -> Result<f64, TrainError> {
        mean_loss(&self.params, items, &self.loss)
    }
}

pub fn mean_loss(params: &NetworkParams<f32>, items: &[&TrainingItem], cfg: &LossConfig) -> Result<f64, TrainError> {
    if items.is_empty() {
        return Ok(f64::NAN);
    }
    let losses: Vec<Result<f64, ShapeError>> = items
        .par_iter()
        .map(|item| Ok(total_loss(&forward(params, &item.input)?.fields, &item.targets, cfg, false)?.0))
        .collect();
    let mut acc = 0.0;
    for l in losses {
        acc += l?;
    }
    Ok(acc / items.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub wall_time: f64,
}

pub struct TrainingOutcome {
    /// Parameters with the lowest validation loss.
    pub best: NetworkParams<f32>,
    pub best_epoch: usize,
    pub log: Vec<EpochRecord>,
    pub checkpoint_path: Option<PathBuf>,
}

fn list_split(manifest_path: &Path, manifest: &DatasetManifest, split: Split, levels: usize) -> Result<Vec<PathBuf>, TrainError> {
    let paths: Vec<PathBuf> = manifest.split(split).map(|e| DatasetManifest::resolve(manifest_path, e)).collect();
    if let Some(p) = paths.first() {
        TrainingItem::from_sample(&load_sample(p)?, levels)?;
    }
    Ok(paths)
}

fn read_items(paths: &[PathBuf], levels: usize) -> Result<Vec<TrainingItem>, TrainError> {
    paths
        .iter()
        .map(|p| Ok(TrainingItem::from_sample(&load_sample(p)?, levels)?))
        .collect()
}

/// Trains on the manifest's training split with early stopping on the
/// validation split. Samples are streamed from disk one batch at a time.
/// With `out_dir`, writes the CSV log and the best checkpoint there.
pub fn train(
    manifest_path: &Path,
    net: &NetworkConfig,
    cfg: &TrainingConfig,
    out_dir: Option<&Path>,
) -> Result<TrainingOutcome, TrainError> {
    let manifest = DatasetManifest::load(manifest_path)?;
    let levels = net.levels();
    let train_paths = list_split(manifest_path, &manifest, Split::Train, levels)?;
    let val_paths = list_split(manifest_path, &manifest, Split::Validation, levels)?;
    if train_paths.is_empty() {
        return Err(TrainError::Config("manifest has no training samples".into()));
    }
    let params = NetworkParams::init(net.clone(), cfg.seed)?;
    let mut trainer = Trainer::new(params, cfg.clone())?;
    let start = Instant::now();
    let mut log = Vec::new();
    let mut log_file = match out_dir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            let mut f = BufWriter::new(File::create(d.join(LOG_FILE))?);
            writeln!(f, "epoch,trainLoss,valLoss,wallTime")?;
            Some(f)
        }
        None => None,
    };
    let checkpoint_path = out_dir.map(|d| d.join(BEST_CHECKPOINT));
    let mut best = (f64::INFINITY, trainer.params.clone(), 0usize);
    let mut since_best = 0;
    let mut order: Vec<usize> = (0..train_paths.len()).collect();
    for epoch in 1..=cfg.max_epochs {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(epoch as u64);
        order.shuffle(&mut rng);
        let mut train_sum = 0.0;
        let mut batches = 0;
        for chunk in order.chunks(cfg.batch_size) {
            if cfg.max_steps_per_epoch.is_some_and(|m| batches >= m) {
                break;
            }
            let paths: Vec<PathBuf> = chunk.iter().map(|&i| train_paths[i].clone()).collect();
            let items = read_items(&paths, levels)?;
            let refs: Vec<&TrainingItem> = items.iter().collect();
            train_sum += trainer.step(&refs)?;
            batches += 1;
        }
        let train_loss = train_sum / batches as f64;
        let val_loss = if val_paths.is_empty() {
            train_loss
        } else {
            let mut acc = 0.0;
            for chunk in val_paths.chunks(cfg.batch_size.max(1)) {
                let items = read_items(chunk, levels)?;
                let refs: Vec<&TrainingItem> = items.iter().collect();
                acc += trainer.evaluate(&refs)? * refs.len() as f64;
            }
            acc / val_paths.len() as f64
        };
        if !(train_loss.is_finite() && trainer.params.is_finite()) {
            return Err(TrainError::Config(format!("training diverged at epoch {epoch}")));
        }
        let rec = EpochRecord {
            epoch,
            train_loss,
            val_loss,
            wall_time: start.elapsed().as_secs_f64(),
        };
        log::info!("epoch {epoch}: train {train_loss:.6e} val {val_loss:.6e} ({:.0} s)", rec.wall_time);
        if let Some(f) = log_file.as_mut() {
            writeln!(f, "{},{:e},{:e},{:.3}", rec.epoch, rec.train_loss, rec.val_loss, rec.wall_time)?;
            f.flush()?;
        }
        log.push(rec);
        if val_loss < best.0 {
            best = (val_loss, trainer.params.clone(), epoch);
            since_best = 0;
            if let Some(p) = &checkpoint_path {
                save_checkpoint(
                    p,
                    &Checkpoint {
                        params: trainer.params.clone(),
                        state: Some(trainer.state.clone()),
                    },
                )?;
            }
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    Ok(TrainingOutcome {
        best: best.1,
        best_epoch: best.2,
        log,
        checkpoint_path,
    })
}
