//! Adam optimizer with bias correction.

use super::{Gradients, NetworkParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        Self {
            lr,
            ..Self::default()
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 3e-4,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// First/second moment accumulators plus the step counter.
#[derive(Debug, Clone)]
pub struct AdamState {
    config: AdamConfig,
    first_moment: Gradients,
    second_moment: Gradients,
    step: u64,
}

impl AdamState {
    pub fn new(params: &NetworkParams, config: AdamConfig) -> Self {
        Self {
            config,
            first_moment: Gradients::zeros_like(params),
            second_moment: Gradients::zeros_like(params),
            step: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn config(&self) -> &AdamConfig {
        &self.config
    }
}

/// One Adam update, in place. `state.step` advances by exactly one.
pub fn adam_step(
    params: &mut NetworkParams,
    grads: &Gradients,
    state: &mut AdamState,
) -> Result<()> {
    if grads.layers.len() != params.layers.len()
        || grads
            .layers
            .iter()
            .zip(&params.layers)
            .any(|(g, p)| g.weights.len() != p.weights.len() || g.biases.len() != p.biases.len())
    {
        return Err(Error::Usage("gradient shapes do not match params".into()));
    }
    if !grads.is_finite() {
        return Err(Error::Numeric("non-finite gradient in adam_step".into()));
    }

    state.step += 1;
    let t = state.step as i32;
    let AdamConfig {
        lr,
        beta1,
        beta2,
        epsilon,
    } = state.config;
    let bc1 = 1.0 - beta1.powi(t);
    let bc2 = 1.0 - beta2.powi(t);

    for (l, layer) in params.layers.iter_mut().enumerate() {
        let g = &grads.layers[l];
        let m = &mut state.first_moment.layers[l];
        let v = &mut state.second_moment.layers[l];
        for i in 0..layer.weights.len() {
            m.weights[i] = beta1 * m.weights[i] + (1.0 - beta1) * g.weights[i];
            v.weights[i] = beta2 * v.weights[i] + (1.0 - beta2) * g.weights[i] * g.weights[i];
            layer.weights[i] -= lr * (m.weights[i] / bc1) / ((v.weights[i] / bc2).sqrt() + epsilon);
        }
        for i in 0..layer.biases.len() {
            m.biases[i] = beta1 * m.biases[i] + (1.0 - beta1) * g.biases[i];
            v.biases[i] = beta2 * v.biases[i] + (1.0 - beta2) * g.biases[i] * g.biases[i];
            layer.biases[i] -= lr * (m.biases[i] / bc1) / ((v.biases[i] / bc2).sqrt() + epsilon);
        }
    }
    Ok(())
}
