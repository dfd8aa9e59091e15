//! End-to-end runs of the `softdeform` binary on a two-seed dataset.

use softdeform::config::RunConfig;
use softdeform::dataset::{load_sample, DatasetManifest};
use softdeform::net::NetworkConfig;
use softdeform::voxel::read_grid;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

fn root() -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join("pipeline")
}

fn config() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.dataset.grid_n = 16;
    cfg.network = NetworkConfig {
        grid_n: 16,
        stage_channels: vec![2, 4],
    };
    cfg.training.level_weights = vec![1.0; 2];
    cfg.training.max_epochs = 2;
    cfg.training.max_steps_per_epoch = Some(2);
    cfg.bench.grid_n = 16;
    cfg.bench.repetitions = 2;
    cfg
}

fn softdeform(args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_softdeform"))
        .args(args)
        .status()
        .expect("binary runs");
    assert!(status.success(), "softdeform {args:?} failed");
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Config file, generated dataset and trained checkpoint shared by all tests.
fn fixture() -> &'static (PathBuf, PathBuf, PathBuf) {
    static F: OnceLock<(PathBuf, PathBuf, PathBuf)> = OnceLock::new();
    F.get_or_init(|| {
        let root = root();
        let _ = std::fs::remove_dir_all(&root);
        std::fs::create_dir_all(&root).unwrap();
        let cfg_path = root.join("config.toml");
        std::fs::write(&cfg_path, config().to_toml()).unwrap();
        let data = root.join("data");
        softdeform(&["gen-data", "--config", arg(&cfg_path), "--seed", "0", "--count", "2", "--out", arg(&data)]);
        let manifest = data.join("manifest.txt");
        let train = root.join("train");
        softdeform(&["train", "--config", arg(&cfg_path), "--manifest", arg(&manifest), "--deterministic", "--out", arg(&train)]);
        (cfg_path, manifest, train.join("best.dgnet"))
    })
}

#[test]
fn gen_data_writes_eight_flips_per_accepted_seed() {
    let (_, manifest, _) = fixture();
    let m = DatasetManifest::load(manifest).unwrap();
    assert_eq!(m.entries.len(), 16);
    assert_eq!(m.digest, softdeform::config::digest_of(&(&config().dataset, 0u64, 2u64)));
    for e in &m.entries {
        let s = load_sample(&DatasetManifest::resolve(manifest, e)).unwrap();
        assert_eq!(s.geometry().n, 16);
    }
    assert!(manifest.parent().unwrap().join("run_config.toml").exists());
}

#[test]
fn training_is_reproducible_under_deterministic() {
    let (cfg, manifest, best) = fixture();
    let again = root().join("train_again");
    softdeform(&["train", "--config", arg(cfg), "--manifest", arg(manifest), "--deterministic", "--out", arg(&again)]);
    assert_eq!(std::fs::read(best).unwrap(), std::fs::read(again.join("best.dgnet")).unwrap());
    let log = std::fs::read_to_string(again.join("training_log.csv")).unwrap();
    assert!(log.starts_with("epoch,trainLoss,valLoss,wallTime\n"));
    assert_eq!(log.lines().count(), 3);
}

#[test]
fn inference_is_bitwise_repeatable_and_masked() {
    let (_, manifest, best) = fixture();
    let m = DatasetManifest::load(manifest).unwrap();
    let sample = DatasetManifest::resolve(manifest, &m.entries[3]);
    let (a, b) = (root().join("u_a.grid"), root().join("u_b.grid"));
    for out in [&a, &b] {
        softdeform(&["infer", "--checkpoint", arg(best), "--sample", arg(&sample), "--out", arg(out)]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(a.with_extension("timing.json").exists());
    let u = read_grid(&mut std::fs::File::open(&a).unwrap()).unwrap();
    let s = load_sample(&sample).unwrap();
    assert_eq!(u.channels, 3);
    let organ = s.organ_mask();
    for (i, inside) in organ.iter().enumerate() {
        if !inside {
            assert!((0..3).all(|c| u.channel(c)[i] == 0.0));
        }
    }
}

#[test]
fn evaluating_the_target_gives_zero_error() {
    let (cfg, manifest, _) = fixture();
    let out = root().join("eval_target");
    softdeform(&["eval", "--config", arg(cfg), "--manifest", arg(manifest), "--estimator", "target", "--split", "all", "--out", arg(&out)]);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["samples"], 16);
    assert_eq!(summary["estimators"][0]["name"], "model");
    assert_eq!(summary["estimators"][0]["max_error"], 0.0);
    assert!(summary["estimators"][1]["mean_error"].as_f64().unwrap() > 0.0);
    for name in ["model", "zero", "nearest"] {
        for file in ["depth_profile.csv", "visible_fraction.csv", "depth2cm_error.csv", "depth4cm_hist.csv", "depth6cm_error.csv"] {
            assert!(out.join(format!("{name}_{file}")).exists(), "{name}_{file}");
        }
    }
}

#[test]
fn model_eval_and_bench_write_reports() {
    let (cfg, manifest, best) = fixture();
    let out = root().join("eval_model");
    softdeform(&["eval", "--config", arg(cfg), "--manifest", arg(manifest), "--checkpoint", arg(best), "--out", arg(&out)]);
    assert!(out.join("per_sample.csv").exists());
    let bench = root().join("bench");
    softdeform(&["bench", "--config", arg(cfg), "--checkpoint", arg(best), "--repetitions", "3", "--out", arg(&bench)]);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(bench.join("bench.json")).unwrap()).unwrap();
    assert_eq!(report["repetitions"], 3);
    assert!(report["mean_ms"].as_f64().unwrap() > 0.0);
}
