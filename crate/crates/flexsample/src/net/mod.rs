//! Minimal differentiable multi-layer perceptron.
//!
//! Dense layers with ReLU on hidden activations, inverted dropout on hidden
//! activations, and manually derived backward passes. Everything is `f64` and
//! single-sample; batching is a caller-side loop that accumulates [`Gradients`].
//!
//! The last layer is always linear, so the same network type serves as an
//! encoder (raw embeddings out) and as a classifier (raw logits out).

mod adam;
mod loss;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use loss::{softmax, softmax_cross_entropy};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Hidden-layer activation. Only ReLU is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
}

/// Architecture of a network: layer sizes plus dropout on hidden activations.
#[derive(Debug, Clone)]
pub struct NetworkConfig {
    layer_dims: Vec<usize>,
    activation: Activation,
    dropout_rate: f64,
}

impl NetworkConfig {
    pub fn new(layer_dims: Vec<usize>, dropout_rate: f64) -> Result<Self> {
        if layer_dims.len() < 2 {
            return Err(Error::Config(format!(
                "layer_dims needs at least 2 entries, got {}",
                layer_dims.len()
            )));
        }
        if layer_dims.iter().any(|&d| d == 0) {
            return Err(Error::Config("layer dims must be positive".into()));
        }
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(Error::Config(format!(
                "dropout_rate must be in [0, 1), got {dropout_rate}"
            )));
        }
        Ok(Self {
            layer_dims,
            activation: Activation::Relu,
            dropout_rate,
        })
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    /// Number of weight layers (one less than the number of dims).
    pub fn num_layers(&self) -> usize {
        self.layer_dims.len() - 1
    }

    pub fn dropout_rate(&self) -> f64 {
        self.dropout_rate
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    /// Same architecture with a different dropout rate.
    pub fn with_dropout(&self, dropout_rate: f64) -> Result<Self> {
        Self::new(self.layer_dims.clone(), dropout_rate)
    }
}

/// One dense layer: row-major weights with shape `(out_dim, in_dim)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl LayerParams {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            biases: vec![0.0; out_dim],
        }
    }
}

/// All trainable parameters of a network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    pub layers: Vec<LayerParams>,
}

impl NetworkParams {
    pub fn zeros(config: &NetworkConfig) -> Self {
        let layers = config
            .layer_dims
            .windows(2)
            .map(|w| LayerParams::zeros(w[0], w[1]))
            .collect();
        Self { layers }
    }

    /// He-uniform initialization, deterministic in `seed`.
    pub fn init_he(config: &NetworkConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Self::zeros(config);
        for layer in &mut params.layers {
            let limit = (6.0 / layer.in_dim as f64).sqrt();
            for w in &mut layer.weights {
                *w = rng.random_range(-limit..limit);
            }
            // biases stay zero
        }
        params
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weights.iter().all(|w| w.is_finite()) && l.biases.iter().all(|b| b.is_finite())
        })
    }

    fn matches(&self, config: &NetworkConfig) -> bool {
        self.layers.len() == config.num_layers()
            && self.layers.iter().zip(config.layer_dims.windows(2)).all(|(l, w)| {
                l.in_dim == w[0]
                    && l.out_dim == w[1]
                    && l.weights.len() == w[0] * w[1]
                    && l.biases.len() == w[1]
            })
    }
}

/// Forward/eval mode. `Train` draws dropout masks, `Eval` is deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Everything `backward` needs from a forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// Input to each layer; `layer_inputs[0]` is the network input.
    layer_inputs: Vec<Vec<f64>>,
    /// Pre-activation `z = Wx + b` per layer.
    pre_activations: Vec<Vec<f64>>,
    /// Inverted-dropout scale per hidden unit (`0` or `1/(1-p)`); empty when
    /// the layer ran without dropout.
    dropout_masks: Vec<Vec<f64>>,
    output: Vec<f64>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        &self.output
    }

    fn matches(&self, config: &NetworkConfig) -> bool {
        let n = config.num_layers();
        self.layer_inputs.len() == n
            && self.pre_activations.len() == n
            && self.dropout_masks.len() == n.saturating_sub(1)
            && self
                .layer_inputs
                .iter()
                .zip(&config.layer_dims[..n])
                .all(|(v, &d)| v.len() == d)
            && self
                .pre_activations
                .iter()
                .zip(&config.layer_dims[1..])
                .all(|(v, &d)| v.len() == d)
            && self.output.len() == config.output_dim()
    }
}

/// Runs the network on one input vector.
///
/// Hidden layers apply ReLU then (in `Train` mode) an inverted-dropout mask
/// drawn from `mask_seed`, so the expected train-mode activation equals the
/// eval-mode activation. The last layer is linear.
pub fn forward(
    config: &NetworkConfig,
    params: &NetworkParams,
    input: &[f64],
    mode: Mode,
    mask_seed: u64,
) -> Result<ForwardCache> {
    if input.len() != config.input_dim() {
        return Err(Error::Config(format!(
            "input dim {} does not match layer_dims[0] = {}",
            input.len(),
            config.input_dim()
        )));
    }
    if !params.matches(config) {
        return Err(Error::Config(
            "params shapes do not match network config".into(),
        ));
    }
    if input.iter().any(|x| !x.is_finite()) {
        return Err(Error::Input("non-finite value in network input".into()));
    }

    let n = config.num_layers();
    let p = config.dropout_rate;
    let mut rng = ChaCha8Rng::seed_from_u64(mask_seed);

    let mut layer_inputs = Vec::with_capacity(n);
    let mut pre_activations = Vec::with_capacity(n);
    let mut dropout_masks = Vec::with_capacity(n.saturating_sub(1));
    let mut activation = input.to_vec();

    for (l, layer) in params.layers.iter().enumerate() {
        let mut z = vec![0.0; layer.out_dim];
        for o in 0..layer.out_dim {
            let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
            let mut sum = layer.biases[o];
            for (w, x) in row.iter().zip(&activation) {
                sum += w * x;
            }
            z[o] = sum;
        }
        layer_inputs.push(std::mem::take(&mut activation));
        if l == n - 1 {
            pre_activations.push(z.clone());
            activation = z;
        } else {
            let mut a: Vec<f64> = z.iter().map(|&v| v.max(0.0)).collect();
            let mask = if mode == Mode::Train && p > 0.0 {
                let scale = 1.0 / (1.0 - p);
                let mask: Vec<f64> = a
                    .iter()
                    .map(|_| if rng.random::<f64>() < p { 0.0 } else { scale })
                    .collect();
                for (v, m) in a.iter_mut().zip(&mask) {
                    *v *= m;
                }
                mask
            } else {
                Vec::new()
            };
            dropout_masks.push(mask);
            pre_activations.push(z);
            activation = a;
        }
    }

    Ok(ForwardCache {
        layer_inputs,
        pre_activations,
        dropout_masks,
        output: activation,
    })
}

/// Parameter gradients, shaped exactly like [`NetworkParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerParams>,
}

impl Gradients {
    pub fn zeros_like(params: &NetworkParams) -> Self {
        Self {
            layers: params
                .layers
                .iter()
                .map(|l| LayerParams::zeros(l.in_dim, l.out_dim))
                .collect(),
        }
    }

    pub fn accumulate(&mut self, other: &Gradients) {
        for (a, b) in self.layers.iter_mut().zip(&other.layers) {
            for (x, y) in a.weights.iter_mut().zip(&b.weights) {
                *x += y;
            }
            for (x, y) in a.biases.iter_mut().zip(&b.biases) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for l in &mut self.layers {
            for w in &mut l.weights {
                *w *= factor;
            }
            for b in &mut l.biases {
                *b *= factor;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(|l| {
            l.weights.iter().all(|w| w.is_finite()) && l.biases.iter().all(|b| b.is_finite())
        })
    }
}

/// Backpropagates `output_gradient` through the computation recorded in
/// `cache`, reusing the exact dropout masks the forward pass drew.
///
/// Also returns the gradient with respect to the network input, which callers
/// composing networks (encoder + projection head) need.
pub fn backward(
    config: &NetworkConfig,
    params: &NetworkParams,
    cache: &ForwardCache,
    output_gradient: &[f64],
) -> Result<(Gradients, Vec<f64>)> {
    if !params.matches(config) {
        return Err(Error::Config(
            "params shapes do not match network config".into(),
        ));
    }
    if !cache.matches(config) {
        return Err(Error::Usage(
            "forward cache does not match this network config".into(),
        ));
    }
    if output_gradient.len() != config.output_dim() {
        return Err(Error::Usage(format!(
            "output_gradient len {} does not match output dim {}",
            output_gradient.len(),
            config.output_dim()
        )));
    }

    let n = config.num_layers();
    let mut grads = Gradients::zeros_like(params);
    let mut delta = output_gradient.to_vec();

    for l in (0..n).rev() {
        if l < n - 1 {
            // delta is dL/da for a hidden layer: peel dropout, then ReLU.
            let mask = &cache.dropout_masks[l];
            if !mask.is_empty() {
                for (d, m) in delta.iter_mut().zip(mask) {
                    *d *= m;
                }
            }
            for (d, z) in delta.iter_mut().zip(&cache.pre_activations[l]) {
                if *z <= 0.0 {
                    *d = 0.0;
                }
            }
        }
        let layer = &params.layers[l];
        let input = &cache.layer_inputs[l];
        let g = &mut grads.layers[l];
        for o in 0..layer.out_dim {
            let d = delta[o];
            g.biases[o] = d;
            let row = &mut g.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
            for (gw, x) in row.iter_mut().zip(input) {
                *gw = d * x;
            }
        }
        let mut prev = vec![0.0; layer.in_dim];
        for o in 0..layer.out_dim {
            let d = delta[o];
            let row = &layer.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
            for (p, w) in prev.iter_mut().zip(row) {
                *p += w * d;
            }
        }
        delta = prev;
    }

    Ok((grads, delta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(dims: &[usize], dropout: f64) -> NetworkConfig {
        NetworkConfig::new(dims.to_vec(), dropout).unwrap()
    }

    #[test]
    fn zero_network_gives_zero_logits() {
        let cfg = config(&[4, 3, 2], 0.0);
        let params = NetworkParams::zeros(&cfg);
        let out = forward(&cfg, &params, &[0.3, -1.0, 2.0, 0.7], Mode::Eval, 0).unwrap();
        assert_eq!(out.output(), &[0.0, 0.0]);
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let cfg = config(&[3, 3], 0.0);
        let mut params = NetworkParams::zeros(&cfg);
        for i in 0..3 {
            params.layers[0].weights[i * 3 + i] = 1.0;
        }
        let input = [0.5, -2.0, 3.25];
        let out = forward(&cfg, &params, &input, Mode::Eval, 0).unwrap();
        assert_eq!(out.output(), &input);
    }

    /// 2-3-2 network checked against an explicit hand evaluation.
    #[test]
    fn fixed_232_network_matches_hand_forward() {
        let cfg = config(&[2, 3, 2], 0.0);
        let mut params = NetworkParams::zeros(&cfg);
        let w1 = [1.0, -1.0, 0.5, 0.25, -0.5, 1.0];
        let b1 = [0.1, -0.2, 0.3];
        let w2 = [1.0, -1.0, 0.5, 0.25, 0.5, -0.25];
        let b2 = [0.05, -0.05];
        params.layers[0].weights.copy_from_slice(&w1);
        params.layers[0].biases.copy_from_slice(&b1);
        params.layers[1].weights.copy_from_slice(&w2);
        params.layers[1].biases.copy_from_slice(&b2);

        let input = [1.0, -1.0];
        let out = forward(&cfg, &params, &input, Mode::Eval, 0).unwrap();

        // Independent evaluation, one scalar at a time.
        let z1 = [
            w1[0] * input[0] + w1[1] * input[1] + b1[0],
            w1[2] * input[0] + w1[3] * input[1] + b1[1],
            w1[4] * input[0] + w1[5] * input[1] + b1[2],
        ];
        let h = [z1[0].max(0.0), z1[1].max(0.0), z1[2].max(0.0)];
        let expected = [
            w2[0] * h[0] + w2[1] * h[1] + w2[2] * h[2] + b2[0],
            w2[3] * h[0] + w2[4] * h[1] + w2[5] * h[2] + b2[1],
        ];
        assert!(z1[2] < 0.0, "third hidden unit should be clipped");
        for (a, e) in out.output().iter().zip(&expected) {
            assert!((a - e).abs() < 1e-15, "got {a}, expected {e}");
        }
    }

    #[test]
    fn shape_mismatch_is_config_error() {
        let cfg = config(&[4, 2], 0.0);
        let params = NetworkParams::zeros(&cfg);
        let err = forward(&cfg, &params, &[1.0, 2.0], Mode::Eval, 0).unwrap_err();
        assert!(matches!(err, Error::Config(_)));

        let other = NetworkParams::zeros(&config(&[3, 2], 0.0));
        let err = forward(&cfg, &other, &[1.0; 4], Mode::Eval, 0).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn non_finite_input_is_input_error() {
        let cfg = config(&[2, 2], 0.0);
        let params = NetworkParams::zeros(&cfg);
        let err = forward(&cfg, &params, &[f64::NAN, 0.0], Mode::Eval, 0).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn eval_is_deterministic_and_train_is_seed_deterministic() {
        let cfg = config(&[4, 8, 3], 0.4);
        let params = NetworkParams::init_he(&cfg, 1);
        let input = [0.1, -0.2, 0.3, -0.4];
        let a = forward(&cfg, &params, &input, Mode::Eval, 11).unwrap();
        let b = forward(&cfg, &params, &input, Mode::Eval, 99).unwrap();
        assert_eq!(a.output(), b.output());

        let c = forward(&cfg, &params, &input, Mode::Train, 7).unwrap();
        let d = forward(&cfg, &params, &input, Mode::Train, 7).unwrap();
        assert_eq!(c.output(), d.output());
    }

    #[test]
    fn inverted_dropout_mean_is_unbiased() {
        // 1-1-1 net wired so the output equals the masked hidden unit.
        let cfg = config(&[1, 1, 1], 0.3);
        let mut params = NetworkParams::zeros(&cfg);
        params.layers[0].weights[0] = 1.0;
        params.layers[1].weights[0] = 1.0;

        let n = 10_000;
        let mut sum = 0.0;
        for seed in 0..n {
            let out = forward(&cfg, &params, &[1.0], Mode::Train, seed).unwrap();
            sum += out.output()[0];
        }
        let mean = sum / n as f64;
        // mask value: 0 w.p. p, 1/(1-p) w.p. 1-p  ->  var = p/(1-p)
        let p = 0.3f64;
        let se = (p / (1.0 - p)).sqrt() / (n as f64).sqrt();
        assert!(
            (mean - 1.0).abs() < 3.0 * se,
            "dropout mean {mean} outside 3 standard errors of 1"
        );
    }

    #[test]
    fn backward_zero_gradient_gives_zero_grads() {
        let cfg = config(&[3, 5, 2], 0.0);
        let params = NetworkParams::init_he(&cfg, 3);
        let cache = forward(&cfg, &params, &[0.2, -0.4, 0.6], Mode::Eval, 0).unwrap();
        let (grads, dx) = backward(&cfg, &params, &cache, &[0.0, 0.0]).unwrap();
        assert!(grads
            .layers
            .iter()
            .all(|l| l.weights.iter().all(|&w| w == 0.0) && l.biases.iter().all(|&b| b == 0.0)));
        assert!(dx.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn backward_is_linear_in_output_gradient() {
        let cfg = config(&[3, 5, 2], 0.0);
        let params = NetworkParams::init_he(&cfg, 5);
        let cache = forward(&cfg, &params, &[0.2, -0.4, 0.6], Mode::Eval, 0).unwrap();
        let g = [0.7, -0.3];
        let (g1, _) = backward(&cfg, &params, &cache, &g).unwrap();
        let scaled = [g[0] * 2.5, g[1] * 2.5];
        let (g2, _) = backward(&cfg, &params, &cache, &scaled).unwrap();
        for (a, b) in g1.layers.iter().zip(&g2.layers) {
            for (x, y) in a.weights.iter().zip(&b.weights) {
                assert!((x * 2.5 - y).abs() < 1e-12);
            }
            for (x, y) in a.biases.iter().zip(&b.biases) {
                assert!((x * 2.5 - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stale_cache_is_usage_error() {
        let cfg_a = config(&[3, 5, 2], 0.0);
        let cfg_b = config(&[4, 5, 2], 0.0);
        let params_a = NetworkParams::init_he(&cfg_a, 0);
        let params_b = NetworkParams::init_he(&cfg_b, 0);
        let cache = forward(&cfg_a, &params_a, &[0.1, 0.2, 0.3], Mode::Eval, 0).unwrap();
        let err = backward(&cfg_b, &params_b, &cache, &[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    /// Central finite differences over a random 2-layer network.
    #[test]
    fn backward_matches_finite_differences() {
        let cfg = config(&[4, 6, 3], 0.0);
        let params = NetworkParams::init_he(&cfg, 42);
        let input = [0.3, -0.9, 0.5, 1.2];
        let label = 1;

        let loss_of = |p: &NetworkParams| {
            let cache = forward(&cfg, p, &input, Mode::Eval, 0).unwrap();
            softmax_cross_entropy(cache.output(), label, None).unwrap().0
        };

        let cache = forward(&cfg, &params, &input, Mode::Eval, 0).unwrap();
        let (_, grad_logits) = softmax_cross_entropy(cache.output(), label, None).unwrap();
        let (grads, _) = backward(&cfg, &params, &cache, &grad_logits).unwrap();

        let eps = 1e-5;
        let mut max_rel = 0.0f64;
        for l in 0..params.layers.len() {
            for i in 0..params.layers[l].weights.len() {
                let mut plus = params.clone();
                plus.layers[l].weights[i] += eps;
                let mut minus = params.clone();
                minus.layers[l].weights[i] -= eps;
                let numeric = (loss_of(&plus) - loss_of(&minus)) / (2.0 * eps);
                let analytic = grads.layers[l].weights[i];
                let denom = analytic.abs().max(numeric.abs()).max(1e-8);
                max_rel = max_rel.max((analytic - numeric).abs() / denom);
            }
            for i in 0..params.layers[l].biases.len() {
                let mut plus = params.clone();
                plus.layers[l].biases[i] += eps;
                let mut minus = params.clone();
                minus.layers[l].biases[i] -= eps;
                let numeric = (loss_of(&plus) - loss_of(&minus)) / (2.0 * eps);
                let analytic = grads.layers[l].biases[i];
                let denom = analytic.abs().max(numeric.abs()).max(1e-8);
                max_rel = max_rel.max((analytic - numeric).abs() / denom);
            }
        }
        assert!(max_rel < 1e-4, "max relative error {max_rel}");
    }

    #[test]
    fn backward_through_dropout_matches_realized_computation() {
        // With a fixed mask seed the realized function is deterministic, so
        // finite differences must agree even in train mode.
        let cfg = config(&[3, 6, 2], 0.5);
        let params = NetworkParams::init_he(&cfg, 9);
        let input = [0.4, -0.2, 0.8];
        let mask_seed = 123;

        let loss_of = |p: &NetworkParams| {
            let cache = forward(&cfg, p, &input, Mode::Train, mask_seed).unwrap();
            softmax_cross_entropy(cache.output(), 0, None).unwrap().0
        };

        let cache = forward(&cfg, &params, &input, Mode::Train, mask_seed).unwrap();
        let (_, grad_logits) = softmax_cross_entropy(cache.output(), 0, None).unwrap();
        let (grads, _) = backward(&cfg, &params, &cache, &grad_logits).unwrap();

        let eps = 1e-5;
        for l in 0..params.layers.len() {
            for i in 0..params.layers[l].weights.len() {
                let mut plus = params.clone();
                plus.layers[l].weights[i] += eps;
                let mut minus = params.clone();
                minus.layers[l].weights[i] -= eps;
                let numeric = (loss_of(&plus) - loss_of(&minus)) / (2.0 * eps);
                let analytic = grads.layers[l].weights[i];
                let denom = analytic.abs().max(numeric.abs()).max(1e-8);
                assert!(
                    (analytic - numeric).abs() / denom < 1e-4,
                    "layer {l} weight {i}: analytic {analytic} vs numeric {numeric}"
                );
            }
        }
    }
}
