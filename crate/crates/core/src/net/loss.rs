//! Multi-resolution masked mean squared error.
//!
//! Level `l` compares output `l` with the target average-pooled `l` times,
//! restricted to the pooled organ mask (a coarse voxel counts as inside
//! when any fine voxel is inside), normalized by the voxel count `N_l^3`.

use super::ops::{avg_pool2, ShapeError};
use super::tensor::{Scalar, Tensor};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    /// Weight per output level, finest first.
    pub level_weights: Vec<f64>,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            level_weights: vec![1.0; 4],
        }
    }
}

/// Targets and masks at every output resolution.
pub struct LossTargets<T> {
    pub targets: Vec<Tensor<T>>,
    pub masks: Vec<Vec<bool>>,
}

impl<T: Scalar> LossTargets<T> {
    pub fn new(target: &Tensor<T>, mask: Vec<bool>, levels: usize) -> Result<Self, ShapeError> {
        if mask.len() != target.spatial() {
            return Err(ShapeError::Mismatch("mask and target differ in size".into()));
        }
        let mut targets = vec![target.clone()];
        let mut masks = vec![mask];
        for _ in 1..levels {
            let t = avg_pool2(targets.last().expect("non-empty"))?;
            let prev = masks.last().expect("non-empty");
            let m = pool_any(prev, targets.last().expect("non-empty").n);
            targets.push(t);
            masks.push(m);
        }
        Ok(Self { targets, masks })
    }
}

fn pool_any(mask: &[bool], n: usize) -> Vec<bool> {
    let h = n / 2;
    let mut out = vec![false; h * h * h];
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                if mask[(k * n + j) * n + i] {
                    out[((k / 2) * h + j / 2) * h + i / 2] = true;
                }
            }
        }
    }
    out
}

/// Masked squared error of one level, `sum_{inside} |u - t|^2 / N^3`.
pub fn level_loss<T: Scalar>(output: &Tensor<T>, target: &Tensor<T>, mask: &[bool]) -> f64 {
    let m = output.spatial();
    let mut acc = 0.0;
    for c in 0..output.channels {
        let (o, t) = (output.channel(c), target.channel(c));
        for idx in 0..m {
            if mask[idx] {
                let d = o[idx].to_f64() - t[idx].to_f64();
                acc += d * d;
            }
        }
    }
    acc / m as f64
}

/// Weighted total loss, the per-level losses, and (optionally) the
/// gradient of the total with respect to each output.
pub fn total_loss<T: Scalar>(
    outputs: &[Tensor<T>],
    targets: &LossTargets<T>,
    cfg: &LossConfig,
    want_grad: bool,
) -> Result<(f64, Vec<f64>, Vec<Tensor<T>>), ShapeError> {
    if outputs.len() != targets.targets.len() || cfg.level_weights.len() < outputs.len() {
        return Err(ShapeError::Mismatch(format!(
            "{} outputs, {} targets, {} level weights",
            outputs.len(),
            targets.targets.len(),
            cfg.level_weights.len()
        )));
    }
    let mut total = 0.0;
    let mut levels = Vec::with_capacity(outputs.len());
    let mut grads = Vec::new();
    for (l, o) in outputs.iter().enumerate() {
        let (t, mask) = (&targets.targets[l], &targets.masks[l]);
        if o.channels != t.channels || o.n != t.n {
            return Err(ShapeError::Mismatch(format!("output level {l} does not match its target")));
        }
        let v = level_loss(o, t, mask);
        let w = cfg.level_weights[l];
        levels.push(v);
        total += w * v;
        if want_grad {
            let m = o.spatial();
            let scale = T::from_f64(2.0 * w / m as f64);
            let mut g = Tensor::zeros(o.channels, o.n);
            for c in 0..o.channels {
                let (oc, tc) = (o.channel(c), t.channel(c));
                for (idx, gv) in g.channel_mut(c).iter_mut().enumerate() {
                    if mask[idx] {
                        *gv = scale * (oc[idx] - tc[idx]);
                    }
                }
            }
            grads.push(g);
        }
    }
    Ok((total, levels, grads))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pooled_mask_is_any() {
        let mut m = vec![false; 64];
        m[(3 * 4 + 3) * 4 + 3] = true;
        let p = pool_any(&m, 4);
        assert_eq!(p.iter().filter(|&&b| b).count(), 1);
        assert!(p[7]);
    }

    #[test]
    fn hand_computed_loss() {
        let out = Tensor::from_vec(1, 2, vec![1.0f64, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 5.0]);
        let tgt = Tensor::from_vec(1, 2, vec![0.0f64; 8]);
        let mut mask = vec![true; 8];
        mask[7] = false;
        assert_eq!(level_loss(&out, &tgt, &mask), 5.0 / 8.0);
    }

    #[test]
    fn gradient_matches_difference_quotient() {
        let n = 4;
        let t = Tensor::from_vec(3, n, (0..3 * 64).map(|i| (i as f64 * 0.37).sin()).collect());
        let mask: Vec<bool> = (0..64).map(|i| i % 3 != 0).collect();
        let targets = LossTargets::new(&t, mask, 2).unwrap();
        let mut outs = vec![
            Tensor::from_vec(3, 4, (0..192).map(|i| (i as f64 * 0.11).cos()).collect()),
            Tensor::from_vec(3, 2, (0..24).map(|i| (i as f64 * 0.7).cos()).collect()),
        ];
        let cfg = LossConfig { level_weights: vec![1.0, 0.5] };
        let (_, _, g) = total_loss(&outs, &targets, &cfg, true).unwrap();
        for (l, idx) in [(0, 5), (0, 100), (1, 3), (1, 20)] {
            let h = 1e-6;
            outs[l].data[idx] += h;
            let p = total_loss(&outs, &targets, &cfg, false).unwrap().0;
            outs[l].data[idx] -= 2.0 * h;
            let m = total_loss(&outs, &targets, &cfg, false).unwrap().0;
            outs[l].data[idx] += h;
            assert!(((p - m) / (2.0 * h) - g[l].data[idx]).abs() < 1e-8);
        }
    }
}
