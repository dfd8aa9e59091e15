//! Oracles and finite-difference checks shared by the integration suites.
#![allow(dead_code)]

pub mod fem_checks;
pub mod sdf_checks;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use softdeform::net::ops::{
    avg_pool2, avg_pool2_backward, conv3d_backward, conv3d_forward, softsign, softsign_backward_from_output, upsample2,
    upsample2_backward,
};
use softdeform::net::{backward, forward_train, total_loss, LossConfig, LossTargets, NetworkConfig, NetworkParams, Tensor};

const H: f64 = 1e-6;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(channels: usize, n: usize, r: &mut ChaCha8Rng) -> Tensor<f64> {
    Tensor::from_vec(channels, n, (0..channels * n * n * n).map(|_| r.random_range(-1.0..1.0)).collect())
}

fn dot(a: &Tensor<f64>, b: &Tensor<f64>) -> f64 {
    a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum()
}

/// Analytic/numeric gradient pairs. The error of each pair is relative
/// to its own magnitude, floored at 1e-4 of the largest analytic entry so
/// that entries dominated by cancellation do not dominate.
#[derive(Default)]
pub struct Pairs(Vec<(f64, f64)>);

impl Pairs {
    pub fn push(&mut self, analytic: f64, numeric: f64) {
        self.0.push((analytic, numeric));
    }

    pub fn max_rel_err(&self) -> f64 {
        let scale = self.0.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
        let floor = (1e-4 * scale).max(1e-12);
        self.0
            .iter()
            .map(|&(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
            .fold(0.0, f64::max)
    }
}

fn central(f: impl FnMut(f64) -> f64, x: f64) -> f64 {
    central_h(f, x, H)
}

fn central_h(mut f: impl FnMut(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Max relative error of the conv3d input, kernel and bias gradients of
/// `<G, conv(x)>` over all entries.
pub fn conv3d_gradient_error(cin: usize, cout: usize, n: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let x = random_tensor(cin, n, &mut r);
    let w: Vec<f64> = (0..cout * cin * 27).map(|_| r.random_range(-1.0..1.0)).collect();
    let b: Vec<f64> = (0..cout).map(|_| r.random_range(-1.0..1.0)).collect();
    let g = random_tensor(cout, n, &mut r);
    let mut gw = vec![0.0; w.len()];
    let mut gb = vec![0.0; b.len()];
    let gx = conv3d_backward(&g, &x, &w, &mut gw, &mut gb, true).unwrap().unwrap();
    let f = |x: &Tensor<f64>, w: &[f64], b: &[f64]| dot(&g, &conv3d_forward(x, w, b).unwrap());
    let mut pairs = Pairs::default();
    for i in (0..x.data.len()).step_by(7) {
        let num = central(
            |v| {
                let mut xx = x.clone();
                xx.data[i] = v;
                f(&xx, &w, &b)
            },
            x.data[i],
        );
        pairs.push(gx.data[i], num);
    }
    for i in (0..w.len()).step_by(5) {
        let num = central(
            |v| {
                let mut ww = w.clone();
                ww[i] = v;
                f(&x, &ww, &b)
            },
            w[i],
        );
        pairs.push(gw[i], num);
    }
    for i in 0..b.len() {
        let num = central(
            |v| {
                let mut bb = b.clone();
                bb[i] = v;
                f(&x, &w, &bb)
            },
            b[i],
        );
        pairs.push(gb[i], num);
    }
    pairs.max_rel_err()
}

pub fn softsign_gradient_error(seed: u64) -> f64 {
    let mut r = rng(seed);
    let x = random_tensor(2, 4, &mut r).data.iter().map(|v| v * 4.0).collect::<Vec<_>>();
    let y = Tensor::from_vec(2, 4, x.iter().map(|&v| softsign(v)).collect());
    let mut g = Tensor::from_vec(2, 4, vec![1.0; x.len()]);
    softsign_backward_from_output(&mut g, &y);
    let mut pairs = Pairs::default();
    for (&v, &a) in x.iter().zip(&g.data) {
        pairs.push(a, central(softsign, v));
    }
    pairs.max_rel_err()
}

pub fn pool_gradient_error(n: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let x = random_tensor(2, n, &mut r);
    let g = random_tensor(2, n / 2, &mut r);
    let gx = avg_pool2_backward(&g);
    let mut pairs = Pairs::default();
    (0..x.data.len()).for_each(|i| {
            let num = central(
                |v| {
                    let mut xx = x.clone();
                    xx.data[i] = v;
                    dot(&g, &avg_pool2(&xx).unwrap())
                },
                x.data[i],
            );
        pairs.push(gx.data[i], num);
    });
    pairs.max_rel_err()
}

pub fn upsample_gradient_error(n: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let x = random_tensor(2, n, &mut r);
    let g = random_tensor(2, 2 * n, &mut r);
    let gx = upsample2_backward(&g).unwrap();
    let mut pairs = Pairs::default();
    (0..x.data.len()).for_each(|i| {
            let num = central(
                |v| {
                    let mut xx = x.clone();
                    xx.data[i] = v;
                    dot(&g, &upsample2(&xx))
                },
                x.data[i],
            );
        pairs.push(gx.data[i], num);
    });
    pairs.max_rel_err()
}

fn random_targets(n: usize, levels: usize, r: &mut ChaCha8Rng) -> LossTargets<f64> {
    let t = random_tensor(3, n, r);
    let mask = (0..n * n * n).map(|_| r.random_range(0.0..1.0) < 0.6).collect();
    LossTargets::new(&t, mask, levels).unwrap()
}

pub fn loss_gradient_error(n: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let levels = 3;
    let targets = random_targets(n, levels, &mut r);
    let mut outs: Vec<Tensor<f64>> = (0..levels).map(|l| random_tensor(3, n >> l, &mut r)).collect();
    let cfg = LossConfig {
        level_weights: vec![1.0, 0.7, 0.3],
    };
    let (_, _, g) = total_loss(&outs, &targets, &cfg, true).unwrap();
    let mut pairs = Pairs::default();
    for l in 0..levels {
        for i in (0..outs[l].data.len()).step_by(3) {
            let x0 = outs[l].data[i];
            let mut eval = |v: f64| {
                outs[l].data[i] = v;
                total_loss(&outs, &targets, &cfg, false).unwrap().0
            };
            // Exact for a quadratic at any step; a large step avoids round-off.
            let num = central_h(&mut eval, x0, 1e-2);
            outs[l].data[i] = x0;
            pairs.push(g[l].data[i], num);
        }
    }
    pairs.max_rel_err()
}

/// Full network plus loss, checked on a strided subset of parameters.
pub fn network_gradient_error(seed: u64) -> f64 {
    let mut r = rng(seed);
    let cfg = NetworkConfig {
        grid_n: 8,
        stage_channels: vec![2, 3, 4],
    };
    let mut params = NetworkParams::<f64>::init(cfg.clone(), seed).unwrap();
    // Init zeroes the biases; check at a generic point instead.
    params.values.iter_mut().for_each(|v| *v += r.random_range(-0.1..0.1));
    let mut input = random_tensor(5, 8, &mut r);
    input.data.iter_mut().for_each(|v| *v *= 0.5);
    let targets = random_targets(8, 3, &mut r);
    let loss_cfg = LossConfig {
        level_weights: vec![1.0; 3],
    };
    let loss = |p: &NetworkParams<f64>| total_loss(&forward_train(p, &input).unwrap().0.fields, &targets, &loss_cfg, false).unwrap().0;
    let (out, cache) = forward_train(&params, &input).unwrap();
    let (_, _, og) = total_loss(&out.fields, &targets, &loss_cfg, true).unwrap();
    let mut grads = NetworkParams::zeros(cfg).unwrap();
    backward(&params, &cache, &og, &mut grads).unwrap();
    let mut pairs = Pairs::default();
    for i in (0..params.values.len()).step_by(11) {
        let x0 = params.values[i];
        // Step balancing truncation against round-off through 18 layers.
        let h = 1e-4;
        params.values[i] = x0 + h;
        let p = loss(&params);
        params.values[i] = x0 - h;
        let m = loss(&params);
        params.values[i] = x0;
        pairs.push(grads.values[i], (p - m) / (2.0 * h));
    }
    pairs.max_rel_err()
}
