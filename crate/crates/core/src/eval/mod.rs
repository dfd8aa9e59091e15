//! Displacement error, depth below the visible surface, binned analyses,
//! baselines and sparse surface correspondences.
//!
//! Every statistic covers only grid points inside the organ (`s <= 0`).

mod binning;
mod distance;
mod report;
mod sparse;

pub use binning::{
    bin_by_depth, bin_by_depth_and_magnitude, bin_by_visible_fraction, spearman, DepthRow, DepthSlab, DepthTable, FractionRow,
    MagnitudeRow,
};
pub use distance::nearest_sites;
pub use report::{evaluate_manifest, write_reports, EvalRun, EvalSummary, EstimatorSummary};
pub use sparse::{sparse_to_dense_surface, SparseCorrespondences};

use crate::dataset::{Sample, UVIS_CHANNEL};
use crate::net::{infer, NetworkParams, ShapeError};
use crate::voxel::{Grid3, GridGeometry};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no grid point carries visible displacement")]
    EmptyVisibleSet,
    #[error("grids do not match: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Format(#[from] crate::io::FormatError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Per-point error `E(p) = |u_tar(p) - u_est(p)|` at the organ points
/// (flat indices in ascending order), with mean and maximum.
#[derive(Clone, Debug, PartialEq)]
pub struct PointErrors {
    pub indices: Vec<usize>,
    pub errors: Vec<f64>,
    pub mean: f64,
    pub max: f64,
}

pub fn displacement_error(u_tar: &Grid3, u_est: &Grid3, organ: &[bool]) -> Result<PointErrors, EvalError> {
    if u_tar.geometry != u_est.geometry || u_tar.channels != 3 || u_est.channels != 3 || organ.len() != u_tar.geometry.len() {
        return Err(EvalError::Mismatch("target, estimate and mask must share a 3-channel grid".into()));
    }
    let indices: Vec<usize> = (0..organ.len()).filter(|&i| organ[i]).collect();
    let errors: Vec<f64> = indices
        .iter()
        .map(|&i| (u_tar.vector_at(0, i) - u_est.vector_at(0, i)).norm())
        .collect();
    let mean = if errors.is_empty() {
        0.0
    } else {
        errors.iter().sum::<f64>() / errors.len() as f64
    };
    let max = errors.iter().copied().fold(0.0, f64::max);
    Ok(PointErrors { indices, errors, mean, max })
}

/// Distance from each organ point to the nearest visible grid point, in
/// the order of the organ's flat indices.
pub fn depth_field(visible: &[bool], organ: &[bool], geometry: &GridGeometry) -> Result<Vec<f64>, EvalError> {
    let (d, _) = nearest_sites(visible, geometry).ok_or(EvalError::EmptyVisibleSet)?;
    Ok((0..organ.len()).filter(|&i| organ[i]).map(|i| d[i]).collect())
}

/// Errors and depths of one sample's organ points.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleReport {
    pub seed: u64,
    pub flip: u8,
    pub visible_fraction: f64,
    pub errors: Vec<f64>,
    pub depths: Vec<f64>,
    pub target_norms: Vec<f64>,
    pub estimate_norms: Vec<f64>,
}

impl SampleReport {
    pub fn mean_error(&self) -> f64 {
        if self.errors.is_empty() {
            0.0
        } else {
            self.errors.iter().sum::<f64>() / self.errors.len() as f64
        }
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }
}

pub fn evaluate_estimate(sample: &Sample, estimate: &Grid3) -> Result<SampleReport, EvalError> {
    let organ = sample.organ_mask();
    let e = displacement_error(&sample.target, estimate, &organ)?;
    let depths = depth_field(&sample.visible_mask(), &organ, &sample.geometry())?;
    Ok(SampleReport {
        seed: sample.meta.seed,
        flip: sample.meta.flip,
        visible_fraction: sample.meta.visible_fraction,
        target_norms: e.indices.iter().map(|&i| sample.target.vector_at(0, i).norm()).collect(),
        estimate_norms: e.indices.iter().map(|&i| estimate.vector_at(0, i).norm()).collect(),
        errors: e.errors,
        depths,
    })
}

/// Baseline predicting no displacement.
pub fn zero_field(sample: &Sample) -> Grid3 {
    Grid3::zeros(sample.geometry(), 3)
}

/// Baseline copying, at every organ point, the visible displacement of
/// the nearest visible grid point.
pub fn nearest_visible_copy(sample: &Sample) -> Result<Grid3, EvalError> {
    let g = sample.geometry();
    let (_, site) = nearest_sites(&sample.visible_mask(), &g).ok_or(EvalError::EmptyVisibleSet)?;
    let organ = sample.organ_mask();
    let mut out = Grid3::zeros(g, 3);
    let m = g.len();
    for idx in (0..m).filter(|&i| organ[i]) {
        for c in 0..3 {
            out.data[c * m + idx] = sample.input.data[(UVIS_CHANNEL + c) * m + site[idx]];
        }
    }
    Ok(out)
}

/// Network estimate for a sample.
pub fn network_estimate(params: &NetworkParams<f32>, sample: &Sample) -> Result<Grid3, EvalError> {
    Ok(infer(params, &sample.input)?.0)
}

fn mean_norm_diff(a: &Grid3, b: &Grid3, organ: &[bool]) -> f64 {
    let idx: Vec<usize> = (0..organ.len()).filter(|&i| organ[i]).collect();
    if idx.is_empty() {
        return 0.0;
    }
    idx.iter().map(|&i| (a.vector_at(0, i) - b.vector_at(0, i)).norm()).sum::<f64>() / idx.len() as f64
}

/// Mean distance, over the mirrored organ, between the estimate for the
/// x-mirrored input and the x-mirrored estimate (with the x component
/// negated). The network is not built to be equivariant; this measures
/// how far it is.
pub fn flip_equivariance_gap(params: &NetworkParams<f32>, sample: &Sample) -> Result<f64, EvalError> {
    let flipped = sample.flipped(1);
    let a = network_estimate(params, &flipped)?;
    let mut b = network_estimate(params, sample)?.mirrored([true, false, false]);
    b.channel_mut(0).iter_mut().for_each(|v| *v = -*v);
    Ok(mean_norm_diff(&a, &b, &flipped.organ_mask()))
}

/// Mean estimated displacement magnitude over the organ when the visible
/// displacement channels are zeroed.
pub fn zero_input_drift(params: &NetworkParams<f32>, sample: &Sample) -> Result<f64, EvalError> {
    let mut s = sample.clone();
    let m = s.geometry().len();
    s.input.data[UVIS_CHANNEL * m..].fill(0.0);
    let u = network_estimate(params, &s)?;
    Ok(mean_norm_diff(&u, &Grid3::zeros(s.geometry(), 3), &s.organ_mask()))
}
