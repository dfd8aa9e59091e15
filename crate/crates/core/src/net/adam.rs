use super::tensor::Scalar;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First and second moment estimates plus the step counter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<f32>,
    pub v: Vec<f32>,
}

impl AdamState {
    pub fn new(len: usize) -> Self {
        Self {
            step: 0,
            m: vec![0.0; len],
            v: vec![0.0; len],
        }
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step<T: Scalar>(params: &mut [T], grads: &[T], state: &mut AdamState, cfg: &AdamConfig) {
    assert_eq!(params.len(), grads.len());
    assert_eq!(params.len(), state.m.len());
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for i in 0..params.len() {
        let g = grads[i].to_f64();
        let m = cfg.beta1 * state.m[i] as f64 + (1.0 - cfg.beta1) * g;
        let v = cfg.beta2 * state.v[i] as f64 + (1.0 - cfg.beta2) * g * g;
        state.m[i] = m as f32;
        state.v[i] = v as f32;
        let step = cfg.learning_rate * (m / c1) / ((v / c2).sqrt() + cfg.epsilon);
        params[i] = T::from_f64(params[i].to_f64() - step);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_keeps_params_and_decays_moments() {
        let mut p = vec![1.0f64, -2.0];
        let mut s = AdamState::new(2);
        s.m = vec![0.5, 0.5];
        s.v = vec![0.25, 0.25];
        s.step = 3;
        let cfg = AdamConfig::default();
        let before = p.clone();
        adam_step(&mut p, &[0.0, 0.0], &mut s, &AdamConfig { learning_rate: 0.0, ..cfg });
        assert_eq!(p, before);
        assert!((s.m[0] - 0.45).abs() < 1e-7);
        assert!((s.v[0] - 0.24975).abs() < 1e-7);
    }

    #[test]
    fn first_step_has_learning_rate_magnitude() {
        let mut p = vec![0.0f64, 0.0];
        let mut s = AdamState::new(2);
        let cfg = AdamConfig {
            learning_rate: 0.01,
            ..Default::default()
        };
        adam_step(&mut p, &[3.0, -0.2], &mut s, &cfg);
        assert!((p[0] + 0.01).abs() < 1e-8);
        assert!((p[1] - 0.01).abs() < 1e-8);
    }

    #[test]
    fn minimizes_quadratic() {
        let target = [1.5f64, -0.5, 0.25];
        let mut p = vec![0.0f64; 3];
        let mut s = AdamState::new(3);
        let cfg = AdamConfig {
            learning_rate: 0.2,
            beta1: 0.5,
            ..Default::default()
        };
        for _ in 0..100 {
            let g: Vec<f64> = (0..3).map(|i| 2.0 * (p[i] - target[i])).collect();
            adam_step(&mut p, &g, &mut s, &cfg);
        }
        for i in 0..3 {
            assert!((p[i] - target[i]).abs() < 1e-4, "{p:?}");
        }
    }
}
