use super::binning::{bin_by_depth, bin_by_depth_and_magnitude, bin_by_visible_fraction, spearman, DepthSlab};
use super::{evaluate_estimate, nearest_visible_copy, zero_field, EvalError, SampleReport};
use crate::dataset::{load_sample, DatasetManifest, Sample, Split};
use crate::voxel::Grid3;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

/// Magnitude bin width of the depth-slab tables, meters.
pub const MAGNITUDE_BIN: f64 = 0.002;
/// Visible-fraction bin width.
pub const FRACTION_BIN: f64 = 0.10;
/// Depth bin width of the depth profile, meters.
pub const DEPTH_PROFILE_BIN: f64 = 0.005;
/// Depth bins with fewer points are left out of the rank correlation.
pub const MIN_PROFILE_POINTS: u64 = 50;

/// Reports of the evaluated estimator and the two baselines, one per
/// sample in manifest order.
#[derive(Clone, Debug, Default)]
pub struct EvalRun {
    pub model: Vec<SampleReport>,
    pub zero: Vec<SampleReport>,
    pub nearest: Vec<SampleReport>,
}

impl EvalRun {
    pub fn estimators(&self) -> [(&'static str, &[SampleReport]); 3] {
        [("model", &self.model), ("zero", &self.zero), ("nearest", &self.nearest)]
    }
}

/// Evaluates `estimate` and the baselines on the manifest entries of
/// `split` (all entries when `None`).
pub fn evaluate_manifest<F>(manifest_path: &Path, split: Option<Split>, estimate: F) -> Result<EvalRun, EvalError>
where
    F: Fn(&Sample) -> Result<Grid3, EvalError> + Sync,
{
    let manifest = DatasetManifest::load(manifest_path)?;
    let paths: Vec<_> = manifest
        .entries
        .iter()
        .filter(|e| split.is_none_or(|s| e.split == s))
        .map(|e| DatasetManifest::resolve(manifest_path, e))
        .collect();
    let per: Vec<Result<[SampleReport; 3], EvalError>> = paths
        .par_iter()
        .map(|p| {
            let s = load_sample(p)?;
            Ok([
                evaluate_estimate(&s, &estimate(&s)?)?,
                evaluate_estimate(&s, &zero_field(&s))?,
                evaluate_estimate(&s, &nearest_visible_copy(&s)?)?,
            ])
        })
        .collect();
    let mut run = EvalRun::default();
    for r in per {
        let [m, z, n] = r?;
        run.model.push(m);
        run.zero.push(z);
        run.nearest.push(n);
    }
    Ok(run)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimatorSummary {
    pub name: String,
    pub mean_error: f64,
    pub max_error: f64,
    /// Rank correlation between depth-bin center and mean error.
    pub spearman_depth: f64,
    /// Rank correlation between visible-fraction bin center and mean error.
    pub spearman_fraction: f64,
}

impl EstimatorSummary {
    pub fn new(name: &str, reports: &[SampleReport]) -> Self {
        let points: usize = reports.iter().map(|r| r.errors.len()).sum();
        let sum: f64 = reports.iter().flat_map(|r| &r.errors).sum();
        let profile: Vec<_> = bin_by_depth(reports, DEPTH_PROFILE_BIN)
            .into_iter()
            .filter(|r| r.count >= MIN_PROFILE_POINTS)
            .collect();
        let fractions: Vec<_> = bin_by_visible_fraction(reports, FRACTION_BIN)
            .into_iter()
            .filter(|r| r.points > 0)
            .collect();
        Self {
            name: name.to_string(),
            mean_error: if points > 0 { sum / points as f64 } else { 0.0 },
            max_error: reports.iter().map(|r| r.max_error()).fold(0.0, f64::max),
            spearman_depth: spearman(
                &profile.iter().map(|r| 0.5 * (r.lo + r.hi)).collect::<Vec<_>>(),
                &profile.iter().map(|r| r.mean_error).collect::<Vec<_>>(),
            ),
            spearman_fraction: spearman(
                &fractions.iter().map(|r| 0.5 * (r.lo + r.hi)).collect::<Vec<_>>(),
                &fractions.iter().map(|r| r.mean_error).collect::<Vec<_>>(),
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalSummary {
    pub config_digest: String,
    pub samples: usize,
    pub points: usize,
    pub estimators: Vec<EstimatorSummary>,
}

impl EvalSummary {
    pub fn new(run: &EvalRun, config_digest: &str) -> Self {
        Self {
            config_digest: config_digest.to_string(),
            samples: run.model.len(),
            points: run.model.iter().map(|r| r.errors.len()).sum(),
            estimators: run.estimators().iter().map(|(n, r)| EstimatorSummary::new(n, r)).collect(),
        }
    }

    pub fn estimator(&self, name: &str) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.name == name)
    }
}

/// Writes `summary.json`, `per_sample.csv` and, per estimator, the depth
/// profile, visible-fraction table and depth-slab tables as CSV.
pub fn write_reports(dir: &Path, run: &EvalRun, config_digest: &str) -> Result<EvalSummary, EvalError> {
    std::fs::create_dir_all(dir)?;
    let summary = EvalSummary::new(run, config_digest);
    std::fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n",
    )?;

    let mut s = String::from("seed,flip,visibleFraction,points,modelMeanError,zeroMeanError,nearestMeanError,modelMaxError\n");
    for i in 0..run.model.len() {
        let (m, z, n) = (&run.model[i], &run.zero[i], &run.nearest[i]);
        writeln!(
            s,
            "{},{},{:.6},{},{:e},{:e},{:e},{:e}",
            m.seed,
            m.flip,
            m.visible_fraction,
            m.errors.len(),
            m.mean_error(),
            z.mean_error(),
            n.mean_error(),
            m.max_error()
        )
        .expect("string write");
    }
    std::fs::write(dir.join("per_sample.csv"), s)?;

    for (name, reports) in run.estimators() {
        let mut s = String::from("depthLo,depthHi,count,meanError\n");
        for r in bin_by_depth(reports, DEPTH_PROFILE_BIN) {
            writeln!(s, "{},{},{},{:e}", r.lo, r.hi, r.count, r.mean_error).expect("string write");
        }
        std::fs::write(dir.join(format!("{name}_depth_profile.csv")), s)?;

        let mut s = String::from("fractionLo,fractionHi,samples,points,meanError\n");
        for r in bin_by_visible_fraction(reports, FRACTION_BIN) {
            writeln!(s, "{:.2},{:.2},{},{},{:e}", r.lo, r.hi, r.samples, r.points, r.mean_error).expect("string write");
        }
        std::fs::write(dir.join(format!("{name}_visible_fraction.csv")), s)?;

        for t in bin_by_depth_and_magnitude(reports, &DepthSlab::defaults(), MAGNITUDE_BIN) {
            let cm = (t.slab.center * 100.0).round() as i64;
            let mut s = String::from("targetLo,targetHi,count,meanError\n");
            for r in &t.rows {
                writeln!(s, "{},{},{},{:e}", r.lo, r.hi, r.count, r.mean_error).expect("string write");
            }
            std::fs::write(dir.join(format!("{name}_depth{cm}cm_error.csv")), s)?;
            let mut s = String::from("targetLo,estimateLo,count\n");
            for (i, row) in t.histogram.iter().enumerate() {
                for (j, c) in row.iter().enumerate() {
                    writeln!(s, "{},{},{}", i as f64 * t.bin_width, j as f64 * t.bin_width, c).expect("string write");
                }
            }
            std::fs::write(dir.join(format!("{name}_depth{cm}cm_hist.csv")), s)?;
        }
    }
    Ok(summary)
}
