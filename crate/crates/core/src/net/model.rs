//! Encoder-decoder with skip connections and one displacement head per
//! decoder resolution.
//!
//! With stage channels `c[0..L]`, the encoder runs two convolutions per
//! stage at sides `n, n/2, ..., n/2^(L-1)` with average pooling between
//! stages. The decoder upsamples (nearest neighbor), concatenates the
//! encoder features of the same side, and runs two convolutions. Each
//! decoder resolution, including the bottleneck, has a 3-channel head.
//! Every convolution is 3x3x3 with padding 1 and followed by SoftSign.

use super::ops::{
    avg_pool2, avg_pool2_backward, concat, conv3d_backward, conv3d_forward, softsign_backward_from_output, softsign_inplace,
    split, upsample2, upsample2_backward, ShapeError, KERNEL_VOLUME,
};
use super::tensor::{Scalar, Tensor};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub const INPUT_CHANNELS: usize = 5;
pub const OUTPUT_CHANNELS: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub grid_n: usize,
    /// Channels per resolution stage, finest first; the last stage is the
    /// bottleneck at `grid_n / 2^(len-1)`.
    pub stage_channels: Vec<usize>,
}

impl NetworkConfig {
    /// Reduced schedule used at desk scale.
    pub fn desk(grid_n: usize) -> Self {
        Self {
            grid_n,
            stage_channels: vec![8, 16, 32, 64],
        }
    }

    /// Full-size schedule for n=64, roughly 9.1M parameters.
    pub fn full() -> Self {
        Self {
            grid_n: 64,
            stage_channels: vec![40, 80, 160, 320],
        }
    }

    pub fn levels(&self) -> usize {
        self.stage_channels.len()
    }

    pub fn bottleneck_n(&self) -> usize {
        self.grid_n >> (self.levels() - 1)
    }

    pub fn validate(&self) -> Result<(), ShapeError> {
        let l = self.levels();
        if l < 2 || self.stage_channels.contains(&0) {
            return Err(ShapeError::Mismatch("need at least two non-empty stages".into()));
        }
        if self.grid_n == 0 || self.grid_n % (1 << (l - 1)) != 0 {
            return Err(ShapeError::Mismatch(format!(
                "grid side {} is not divisible by 2^{}",
                self.grid_n,
                l - 1
            )));
        }
        Ok(())
    }

    /// Side length of output `level` (0 = full resolution).
    pub fn side(&self, level: usize) -> usize {
        self.grid_n >> level
    }

    /// Layers in registration order.
    pub fn layers(&self) -> Vec<LayerSpec> {
        let c = &self.stage_channels;
        let l = c.len();
        let mut out = Vec::new();
        for s in 0..l {
            let cin = if s == 0 { INPUT_CHANNELS } else { c[s - 1] };
            out.push(LayerSpec::new(format!("enc{s}a"), cin, c[s]));
            out.push(LayerSpec::new(format!("enc{s}b"), c[s], c[s]));
        }
        out.push(LayerSpec::new(format!("head{}", l - 1), c[l - 1], OUTPUT_CHANNELS));
        for s in (0..l - 1).rev() {
            out.push(LayerSpec::new(format!("dec{s}a"), c[s + 1] + c[s], c[s]));
            out.push(LayerSpec::new(format!("dec{s}b"), c[s], c[s]));
            out.push(LayerSpec::new(format!("head{s}"), c[s], OUTPUT_CHANNELS));
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.layers().iter().map(|l| l.weight_len() + l.cout).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerSpec {
    pub name: String,
    pub cin: usize,
    pub cout: usize,
}

impl LayerSpec {
    fn new(name: String, cin: usize, cout: usize) -> Self {
        Self { name, cin, cout }
    }

    pub fn weight_len(&self) -> usize {
        self.cout * self.cin * KERNEL_VOLUME
    }
}

/// All kernels and biases in one flat vector; per layer the weights
/// (`[cout][cin][3][3][3]`) followed by the biases.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams<T> {
    pub config: NetworkConfig,
    pub values: Vec<T>,
    offsets: Vec<usize>,
    layers: Vec<LayerSpec>,
}

impl<T: Scalar> NetworkParams<T> {
    pub fn zeros(config: NetworkConfig) -> Result<Self, ShapeError> {
        config.validate()?;
        let layers = config.layers();
        let mut offsets = Vec::with_capacity(layers.len() + 1);
        let mut total = 0;
        for l in &layers {
            offsets.push(total);
            total += l.weight_len() + l.cout;
        }
        offsets.push(total);
        Ok(Self {
            config,
            values: vec![T::ZERO; total],
            offsets,
            layers,
        })
    }

    /// Weights uniform in `+-1/sqrt(fan_in)`, biases zero.
    pub fn init(config: NetworkConfig, seed: u64) -> Result<Self, ShapeError> {
        let mut p = Self::zeros(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..p.layers.len() {
            let bound = 1.0 / ((p.layers[i].cin * KERNEL_VOLUME) as f64).sqrt();
            let a = p.offsets[i];
            for v in &mut p.values[a..a + p.layers[i].weight_len()] {
                *v = T::from_f64(rng.random_range(-bound..bound));
            }
        }
        Ok(p)
    }

    pub fn from_values(config: NetworkConfig, values: Vec<T>) -> Result<Self, ShapeError> {
        let mut p = Self::zeros(config)?;
        if values.len() != p.values.len() {
            return Err(ShapeError::Mismatch(format!(
                "{} parameter values for a network with {}",
                values.len(),
                p.values.len()
            )));
        }
        p.values = values;
        Ok(p)
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn layer(&self, i: usize) -> (&[T], &[T]) {
        let w = self.layers[i].weight_len();
        let s = &self.values[self.offsets[i]..self.offsets[i + 1]];
        s.split_at(w)
    }

    fn layer_mut(&mut self, i: usize) -> (&mut [T], &mut [T]) {
        let w = self.layers[i].weight_len();
        let (a, b) = (self.offsets[i], self.offsets[i + 1]);
        self.values[a..b].split_at_mut(w)
    }

    pub fn cast<U: Scalar>(&self) -> NetworkParams<U> {
        NetworkParams {
            config: self.config.clone(),
            values: self.values.iter().map(|v| U::from_f64(v.to_f64())).collect(),
            offsets: self.offsets.clone(),
            layers: self.layers.clone(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.to_f64().is_finite())
    }
}

/// Activations kept for the backward pass.
pub struct ForwardCache<T> {
    /// Input and (post-SoftSign) output of every layer, registration order.
    inputs: Vec<Tensor<T>>,
    outputs: Vec<Tensor<T>>,
    /// Full-resolution organ mask (`s <= 0`).
    mask: Vec<bool>,
}

/// Network outputs, finest first. Output 0 is masked to zero outside the
/// organ.
pub struct Outputs<T> {
    pub fields: Vec<Tensor<T>>,
}

/// Organ indicator from the first input channel: `s <= 0`.
pub fn organ_mask<T: Scalar>(input: &Tensor<T>) -> Vec<bool> {
    input.channel(0).iter().map(|&s| s <= T::ZERO).collect()
}

struct Runner<'a, T> {
    params: &'a NetworkParams<T>,
    cache: Option<ForwardCache<T>>,
    next: usize,
}

impl<T: Scalar> Runner<'_, T> {
    fn conv(&mut self, x: Tensor<T>) -> Result<Tensor<T>, ShapeError> {
        let (w, b) = self.params.layer(self.next);
        let mut y = conv3d_forward(&x, w, b)?;
        softsign_inplace(&mut y);
        if let Some(c) = self.cache.as_mut() {
            c.inputs.push(x);
            c.outputs.push(y.clone());
        }
        self.next += 1;
        Ok(y)
    }
}

fn run<T: Scalar>(params: &NetworkParams<T>, input: &Tensor<T>, keep: bool) -> Result<(Outputs<T>, Option<ForwardCache<T>>), ShapeError> {
    let cfg = &params.config;
    if input.channels != INPUT_CHANNELS || input.n != cfg.grid_n {
        return Err(ShapeError::Mismatch(format!(
            "input {}x{}^3, network expects {}x{}^3",
            input.channels, input.n, INPUT_CHANNELS, cfg.grid_n
        )));
    }
    let l = cfg.levels();
    let mask = organ_mask(input);
    let mut r = Runner {
        params,
        cache: keep.then(|| ForwardCache {
            inputs: Vec::new(),
            outputs: Vec::new(),
            mask: mask.clone(),
        }),
        next: 0,
    };
    let mut skips = Vec::with_capacity(l);
    let mut x = input.clone();
    for s in 0..l {
        if s > 0 {
            x = avg_pool2(&x)?;
        }
        let a = r.conv(x)?;
        x = r.conv(a)?;
        skips.push(x.clone());
    }
    let mut fields = vec![Tensor::zeros(0, 0); l];
    let mut d = skips.pop().expect("bottleneck");
    fields[l - 1] = r.conv(d.clone())?;
    for s in (0..l - 1).rev() {
        let cat = concat(&upsample2(&d), &skips[s])?;
        let a = r.conv(cat)?;
        d = r.conv(a)?;
        fields[s] = r.conv(d.clone())?;
    }
    for c in 0..OUTPUT_CHANNELS {
        for (v, &m) in fields[0].channel_mut(c).iter_mut().zip(&mask) {
            if !m {
                *v = T::ZERO;
            }
        }
    }
    Ok((Outputs { fields }, r.cache))
}

/// Inference: all resolution outputs, finest first.
pub fn forward<T: Scalar>(params: &NetworkParams<T>, input: &Tensor<T>) -> Result<Outputs<T>, ShapeError> {
    Ok(run(params, input, false)?.0)
}

pub fn forward_train<T: Scalar>(params: &NetworkParams<T>, input: &Tensor<T>) -> Result<(Outputs<T>, ForwardCache<T>), ShapeError> {
    let (o, c) = run(params, input, true)?;
    Ok((o, c.expect("cache requested")))
}

/// Accumulates into `grads` the parameter gradient given the gradients
/// of the loss with respect to each output (finest first).
pub fn backward<T: Scalar>(
    params: &NetworkParams<T>,
    cache: &ForwardCache<T>,
    output_grads: &[Tensor<T>],
    grads: &mut NetworkParams<T>,
) -> Result<(), ShapeError> {
    let l = params.config.levels();
    if output_grads.len() != l {
        return Err(ShapeError::Mismatch("one gradient per output required".into()));
    }
    let mut layer_back = |i: usize, g: &Tensor<T>, want: bool| -> Result<Option<Tensor<T>>, ShapeError> {
        let mut g = g.clone();
        softsign_backward_from_output(&mut g, &cache.outputs[i]);
        let (w, _) = params.layer(i);
        let (gw, gb) = grads.layer_mut(i);
        conv3d_backward(&g, &cache.inputs[i], w, gw, gb, want)
    };
    let add = |acc: &mut Option<Tensor<T>>, g: Tensor<T>| match acc {
        Some(a) => a.data.iter_mut().zip(&g.data).for_each(|(x, y)| *x += *y),
        None => *acc = Some(g),
    };

    // Layer indices mirror `NetworkConfig::layers`.
    let enc = |s: usize| 2 * s;
    let head_bottom = 2 * l;
    let dec = |s: usize| head_bottom + 1 + 3 * (l - 2 - s);

    let mut skip_grads: Vec<Option<Tensor<T>>> = vec![None; l];
    let mut g0 = output_grads[0].clone();
    for c in 0..OUTPUT_CHANNELS {
        for (v, &m) in g0.channel_mut(c).iter_mut().zip(&cache.mask) {
            if !m {
                *v = T::ZERO;
            }
        }
    }
    // Gradient reaching the decoder features of the current level.
    let mut grad_d: Option<Tensor<T>> = None;
    for s in 0..l - 1 {
        let base = dec(s);
        let g_head = if s == 0 { &g0 } else { &output_grads[s] };
        add(&mut grad_d, layer_back(base + 2, g_head, true)?.expect("input grad"));
        let ga = layer_back(base + 1, grad_d.as_ref().expect("set above"), true)?.expect("input grad");
        let gcat = layer_back(base, &ga, true)?.expect("input grad");
        let c_up = params.config.stage_channels[s + 1];
        let (g_up, g_skip) = split(&gcat, c_up);
        add(&mut skip_grads[s], g_skip);
        grad_d = Some(upsample2_backward(&g_up)?);
    }
    let gh = layer_back(head_bottom, &output_grads[l - 1], true)?.expect("input grad");
    add(&mut grad_d, gh);
    add(&mut skip_grads[l - 1], grad_d.take().expect("bottleneck grad"));

    for s in (0..l).rev() {
        let g = skip_grads[s].take().expect("every stage receives a gradient");
        let ga = layer_back(enc(s) + 1, &g, true)?.expect("input grad");
        let gx = layer_back(enc(s), &ga, s > 0)?;
        if s > 0 {
            add(&mut skip_grads[s - 1], avg_pool2_backward(&gx.expect("input grad")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layer_table_and_counts() {
        let cfg = NetworkConfig::desk(32);
        let layers = cfg.layers();
        assert_eq!(layers.len(), 2 * 4 + 1 + 3 * 3);
        assert_eq!(layers[0].cin, 5);
        assert_eq!(layers[9].name, "dec2a");
        assert_eq!(layers[9].cin, 64 + 32);
        assert_eq!(cfg.bottleneck_n(), 4);
        assert_eq!(NetworkConfig::full().bottleneck_n(), 8);
    }

    #[test]
    fn full_parameter_count_in_range() {
        // Hand-expanded count for c = (40, 80, 160, 320).
        let c = [40usize, 80, 160, 320];
        let conv = |i: usize, o: usize| 27 * i * o + o;
        let expected = conv(5, c[0])
            + conv(c[0], c[0])
            + conv(c[0], c[1])
            + conv(c[1], c[1])
            + conv(c[1], c[2])
            + conv(c[2], c[2])
            + conv(c[2], c[3])
            + conv(c[3], c[3])
            + conv(c[3], 3)
            + conv(c[3] + c[2], c[2])
            + conv(c[2], c[2])
            + conv(c[2], 3)
            + conv(c[2] + c[1], c[1])
            + conv(c[1], c[1])
            + conv(c[1], 3)
            + conv(c[1] + c[0], c[0])
            + conv(c[0], c[0])
            + conv(c[0], 3);
        let got = NetworkConfig::full().parameter_count();
        assert_eq!(got, expected);
        assert!((8_500_000..=9_700_000).contains(&got), "{got}");
    }

    #[test]
    fn output_shapes_and_mask() {
        let cfg = NetworkConfig {
            grid_n: 16,
            stage_channels: vec![2, 3, 4],
        };
        let p = NetworkParams::<f32>::init(cfg, 1).unwrap();
        let mut x = Tensor::<f32>::zeros(5, 16);
        x.channel_mut(0).fill(0.01);
        x.channel_mut(2).fill(0.3);
        let o = forward(&p, &x).unwrap();
        assert_eq!(o.fields.iter().map(|f| (f.channels, f.n)).collect::<Vec<_>>(), vec![(3, 16), (3, 8), (3, 4)]);
        assert!(o.fields[0].data.iter().all(|&v| v == 0.0));
        assert!(o.fields[2].data.iter().any(|&v| v != 0.0));
    }

    #[test]
    fn rejects_wrong_input() {
        let p = NetworkParams::<f32>::init(NetworkConfig::desk(16), 0).unwrap();
        assert!(forward(&p, &Tensor::zeros(5, 8)).is_err());
        assert!(forward(&p, &Tensor::zeros(4, 16)).is_err());
        assert!(NetworkConfig { grid_n: 20, stage_channels: vec![1, 1, 1, 1] }.validate().is_err());
    }
}
