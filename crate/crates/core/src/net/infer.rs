use super::model::{forward, NetworkParams};
use super::ops::ShapeError;
use super::tensor::Tensor;
use crate::voxel::Grid3;
use std::time::{Duration, Instant};

/// Full-resolution displacement estimate for a sample input grid, with
/// the wall-clock time of the forward pass.
pub fn infer(params: &NetworkParams<f32>, input: &Grid3) -> Result<(Grid3, Duration), ShapeError> {
    let g = input.geometry;
    let x = Tensor::from_vec(input.channels, g.n, input.data.clone());
    let start = Instant::now();
    let out = forward(params, &x)?;
    let elapsed = start.elapsed();
    let u = out.fields.into_iter().next().expect("full-resolution output");
    Ok((
        Grid3 {
            geometry: g,
            channels: u.channels,
            data: u.data,
        },
        elapsed,
    ))
}

/// Mean and 95th percentile inference time in milliseconds.
pub fn bench(params: &NetworkParams<f32>, input: &Grid3, repetitions: usize) -> Result<(f64, f64), ShapeError> {
    let mut ms = Vec::with_capacity(repetitions);
    for _ in 0..repetitions.max(1) {
        ms.push(infer(params, input)?.1.as_secs_f64() * 1e3);
    }
    let mean = ms.iter().sum::<f64>() / ms.len() as f64;
    ms.sort_by(f64::total_cmp);
    let p95 = ms[((ms.len() as f64 * 0.95).ceil() as usize).clamp(1, ms.len()) - 1];
    Ok((mean, p95))
}
