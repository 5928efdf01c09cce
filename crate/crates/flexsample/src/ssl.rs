//! Self-supervised encoder pretraining on unlabeled feature vectors.
//!
//! Two stochastic augmentations of the same sample form a positive pair; the
//! other samples in the batch (both views) act as negatives. The network is a
//! small MLP whose last layer is a projection head used only by the loss; the
//! layers before it are returned as the pretrained encoder.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::net::{
    adam_step, backward, forward, softmax_cross_entropy, AdamConfig, AdamState, Gradients, Mode,
    NetworkConfig, NetworkParams,
};

/// Stochastic vector augmentations, applied as `mask ∘ (scale·x + noise)`.
///
/// Noise is per-coordinate Gaussian with standard deviation
/// `noise_sigma * feature_std[j]`, so its strength tracks the data scale.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct AugmentationConfig {
    /// Gaussian noise strength relative to the per-coordinate data std.
    pub noise_sigma: f64,
    /// Uniform global scale factor interval `[lo, hi]`; must bracket 1.
    pub scale_jitter: [f64; 2],
    /// Probability of zeroing each coordinate independently.
    pub mask_prob: f64,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        Self {
            noise_sigma: 0.5,
            scale_jitter: [0.9, 1.1],
            mask_prob: 0.3,
        }
    }
}

impl AugmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::Config(format!(
                "noise_sigma must be non-negative, got {}",
                self.noise_sigma
            )));
        }
        let [lo, hi] = self.scale_jitter;
        if !(lo.is_finite() && hi.is_finite()) || !(0.0 < lo && lo <= 1.0 && 1.0 <= hi) {
            return Err(Error::Config(format!(
                "scale_jitter must satisfy 0 < lo <= 1 <= hi, got [{lo}, {hi}]"
            )));
        }
        if !(0.0..1.0).contains(&self.mask_prob) {
            return Err(Error::Config(format!(
                "mask_prob must be in [0, 1), got {}",
                self.mask_prob
            )));
        }
        Ok(())
    }
}

/// One stochastic view of `feature`.
///
/// Draw order is fixed (scale, then one noise draw per coordinate, then one
/// mask draw per coordinate) so outputs are reproducible from the rng state.
/// Components with a zero parameter consume no randomness.
pub fn augment(
    feature: &[f64],
    feature_std: &[f64],
    config: &AugmentationConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    config.validate()?;
    if feature.len() != feature_std.len() {
        return Err(Error::Input(format!(
            "feature dim {} does not match feature_std dim {}",
            feature.len(),
            feature_std.len()
        )));
    }

    let [lo, hi] = config.scale_jitter;
    let scale = if lo < hi { rng.random_range(lo..hi) } else { lo };
    let mut out: Vec<f64> = feature.iter().map(|&x| scale * x).collect();
    if config.noise_sigma > 0.0 {
        for (v, &sd) in out.iter_mut().zip(feature_std) {
            let z: f64 = rng.sample(StandardNormal);
            *v += config.noise_sigma * sd * z;
        }
    }
    if config.mask_prob > 0.0 {
        for v in &mut out {
            if rng.random::<f64>() < config.mask_prob {
                *v = 0.0;
            }
        }
    }
    Ok(out)
}

/// Loss and input gradients of one contrastive term.
#[derive(Debug, Clone)]
pub struct InfoNceGrad {
    pub loss: f64,
    pub anchor: Vec<f64>,
    pub positive: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

/// Contrastive loss of one anchor against its positive and a set of negatives:
/// cross entropy over dot-product similarities scaled by `1/temperature`, with
/// the positive as the target. Gradients are exact.
///
/// Callers are expected to pass unit-normalized embeddings; the function
/// itself works on whatever vectors it is given.
pub fn info_nce_loss(
    anchor: &[f64],
    positive: &[f64],
    negatives: &[Vec<f64>],
    temperature: f64,
) -> Result<InfoNceGrad> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(Error::Config(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    if negatives.is_empty() {
        return Err(Error::Usage("need at least one negative".into()));
    }
    let d = anchor.len();
    if positive.len() != d || negatives.iter().any(|n| n.len() != d) {
        return Err(Error::Input(
            "anchor, positive, and negatives must share one dimension".into(),
        ));
    }
    let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
    if !finite(anchor) || !finite(positive) || !negatives.iter().all(|n| finite(n)) {
        return Err(Error::Input("non-finite embedding".into()));
    }

    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut logits = Vec::with_capacity(1 + negatives.len());
    logits.push(dot(anchor, positive) / temperature);
    for n in negatives {
        logits.push(dot(anchor, n) / temperature);
    }
    let (loss, dlogits) = softmax_cross_entropy(&logits, 0, None)?;

    let mut d_anchor = vec![0.0; d];
    for (k, v) in std::iter::once(positive)
        .chain(negatives.iter().map(|n| n.as_slice()))
        .enumerate()
    {
        let c = dlogits[k] / temperature;
        for (g, &x) in d_anchor.iter_mut().zip(v) {
            *g += c * x;
        }
    }
    let scale_by = |c: f64| anchor.iter().map(|&x| c * x).collect::<Vec<f64>>();
    let d_positive = scale_by(dlogits[0] / temperature);
    let d_negatives = (0..negatives.len())
        .map(|k| scale_by(dlogits[k + 1] / temperature))
        .collect();

    Ok(InfoNceGrad {
        loss,
        anchor: d_anchor,
        positive: d_positive,
        negatives: d_negatives,
    })
}

/// Unit vector and original norm. The norm is clamped to `1e-12` so zero
/// vectors normalize to zero instead of NaN.
pub fn l2_normalize(v: &[f64]) -> (Vec<f64>, f64) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    (v.iter().map(|x| x / norm).collect(), norm)
}

/// Gradient through [`l2_normalize`]: maps `dL/d(unit)` back to `dL/dv` by
/// removing the radial component and dividing by the norm.
pub fn l2_normalize_backward(unit: &[f64], norm: f64, grad_unit: &[f64]) -> Vec<f64> {
    let radial: f64 = grad_unit.iter().zip(unit).map(|(g, u)| g * u).sum();
    grad_unit
        .iter()
        .zip(unit)
        .map(|(g, u)| (g - radial * u) / norm)
        .collect()
}

/// Hyperparameters of the contrastive pretraining stage.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ContrastiveConfig {
    pub temperature: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// In-batch negatives are truncated to this many per anchor.
    pub negatives_per_anchor: usize,
    pub hidden_dim: usize,
    pub embedding_dim: usize,
    pub projection_dim: usize,
    pub augmentation: AugmentationConfig,
}

impl Default for ContrastiveConfig {
    fn default() -> Self {
        Self {
            temperature: 0.5,
            epochs: 100,
            batch_size: 32,
            learning_rate: 1e-3,
            negatives_per_anchor: 32,
            hidden_dim: 64,
            embedding_dim: 32,
            projection_dim: 16,
            augmentation: AugmentationConfig::default(),
        }
    }
}

impl ContrastiveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::Config(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if self.batch_size < 2 {
            return Err(Error::Config(format!(
                "batch_size must be at least 2, got {}",
                self.batch_size
            )));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.negatives_per_anchor == 0 {
            return Err(Error::Config("negatives_per_anchor must be >= 1".into()));
        }
        if self.hidden_dim == 0 || self.embedding_dim == 0 || self.projection_dim == 0 {
            return Err(Error::Config("network dims must be positive".into()));
        }
        self.augmentation.validate()
    }

    /// Architecture of the full pretraining network (projection head last).
    /// The contrastive net runs without dropout.
    pub fn network(&self, input_dim: usize) -> Result<NetworkConfig> {
        NetworkConfig::new(
            vec![
                input_dim,
                self.hidden_dim,
                self.embedding_dim,
                self.projection_dim,
            ],
            0.0,
        )
    }

    /// Architecture of the encoder alone, as returned by [`pretrain_encoder`].
    pub fn encoder_network(&self, input_dim: usize) -> Result<NetworkConfig> {
        NetworkConfig::new(vec![input_dim, self.hidden_dim, self.embedding_dim], 0.0)
    }
}

/// Pretrained encoder plus the mean per-anchor loss of every epoch.
#[derive(Debug, Clone)]
pub struct PretrainOutcome {
    pub encoder_config: NetworkConfig,
    pub encoder: NetworkParams,
    pub epoch_losses: Vec<f64>,
}

/// Trains the contrastive network on `features` and returns the encoder (all
/// layers except the projection head). Deterministic in `seed`.
///
/// Per batch, every view acts once as an anchor; each embedding's gradient
/// sums its anchor, positive, and negative roles before one backward pass.
/// A trailing chunk of a single sample has no in-batch negative and is
/// skipped.
pub fn pretrain_encoder(
    features: &[Vec<f64>],
    config: &ContrastiveConfig,
    seed: u64,
) -> Result<PretrainOutcome> {
    config.validate()?;
    if features.len() < 2 {
        return Err(Error::Input(format!(
            "need at least 2 samples to form negatives, got {}",
            features.len()
        )));
    }
    let dim = features[0].len();
    if features.iter().any(|f| f.len() != dim) {
        return Err(Error::Input("features must share one dimension".into()));
    }

    let net = config.network(dim)?;
    let mut params = NetworkParams::init_he(&net, derive_seed(seed, 1));
    let mut adam = AdamState::new(&params, AdamConfig::with_lr(config.learning_rate));
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2));

    // Population std per coordinate, the scale reference for noise.
    let n = features.len() as f64;
    let mut mean = vec![0.0; dim];
    for f in features {
        for (m, x) in mean.iter_mut().zip(f) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut feature_std = vec![0.0; dim];
    for f in features {
        for (s, (x, m)) in feature_std.iter_mut().zip(f.iter().zip(&mean)) {
            let d = x - m;
            *s += d * d;
        }
    }
    for s in &mut feature_std {
        *s = (*s / n).sqrt();
    }

    let mut order: Vec<usize> = (0..features.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut anchors = 0usize;
        for batch in order.chunks(config.batch_size) {
            if batch.len() < 2 {
                continue;
            }
            let views = 2 * batch.len();

            // Forward both augmented views of every sample.
            let mut caches = Vec::with_capacity(views);
            let mut units = Vec::with_capacity(views);
            let mut norms = Vec::with_capacity(views);
            for &i in batch {
                for _ in 0..2 {
                    let view = augment(&features[i], &feature_std, &config.augmentation, &mut rng)?;
                    let cache = forward(&net, &params, &view, Mode::Eval, 0)?;
                    let (unit, norm) = l2_normalize(cache.output());
                    caches.push(cache);
                    units.push(unit);
                    norms.push(norm);
                }
            }

            // Every view is an anchor once; its positive is the partner view
            // and its negatives are the other samples' views in batch order.
            let mut d_units = vec![vec![0.0; config.projection_dim]; views];
            for a in 0..views {
                let partner = a ^ 1;
                let mut neg_idx = Vec::with_capacity(config.negatives_per_anchor);
                for v in 0..views {
                    if v != a && v != partner {
                        neg_idx.push(v);
                        if neg_idx.len() == config.negatives_per_anchor {
                            break;
                        }
                    }
                }
                let negatives: Vec<Vec<f64>> =
                    neg_idx.iter().map(|&v| units[v].clone()).collect();
                let term =
                    info_nce_loss(&units[a], &units[partner], &negatives, config.temperature)?;
                loss_sum += term.loss;
                anchors += 1;
                for (g, t) in d_units[a].iter_mut().zip(&term.anchor) {
                    *g += t;
                }
                for (g, t) in d_units[partner].iter_mut().zip(&term.positive) {
                    *g += t;
                }
                for (&v, t) in neg_idx.iter().zip(&term.negatives) {
                    for (g, x) in d_units[v].iter_mut().zip(t) {
                        *g += x;
                    }
                }
            }

            let mut grads = Gradients::zeros_like(&params);
            for v in 0..views {
                let d_out = l2_normalize_backward(&units[v], norms[v], &d_units[v]);
                let (g, _) = backward(&net, &params, &caches[v], &d_out)?;
                grads.accumulate(&g);
            }
            grads.scale(1.0 / views as f64);
            adam_step(&mut params, &grads, &mut adam)?;
        }
        epoch_losses.push(if anchors > 0 {
            loss_sum / anchors as f64
        } else {
            0.0
        });
    }

    Ok(PretrainOutcome {
        encoder_config: config.encoder_network(dim)?,
        encoder: NetworkParams {
            layers: params.layers[..2].to_vec(),
        },
        epoch_losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(got: &[f64], want: &[f64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < tol, "got {g}, want {w}");
        }
    }

    /// Axis-aligned unit vectors, one negative, T = 0.5; constants frozen
    /// from a scalar evaluation of the loss and its chain rule.
    #[test]
    fn info_nce_matches_hand_oracle() {
        let r = info_nce_loss(&[1.0, 0.0], &[1.0, 0.0], &[vec![0.0, 1.0]], 0.5).unwrap();
        assert!((r.loss - 0.12692801104297263).abs() < 1e-14);
        assert_close(&r.anchor, &[-0.23840584404423537, 0.23840584404423509], 1e-14);
        assert_close(&r.positive, &[-0.23840584404423537, 0.0], 1e-14);
        assert_close(&r.negatives[0], &[0.23840584404423509, 0.0], 1e-14);
    }

    /// Non-trivial unit vectors, two negatives, T = 0.7; same frozen source.
    #[test]
    fn info_nce_matches_two_negative_oracle() {
        let a = [0.6, -0.8, 0.0];
        let p = [0.0, -1.0, 0.0];
        let negs = vec![vec![1.0, 0.0, 0.0], vec![-0.36, 0.48, 0.8]];
        let r = info_nce_loss(&a, &p, &negs, 0.7).unwrap();
        assert!((r.loss - 0.63488893782440037).abs() < 1e-14);
        assert_close(
            &r.anchor,
            &[0.53208145838338683, 0.72062083068751603, 0.081973640132230033],
            1e-14,
        );
        assert_close(&r.positive, &[-0.4028619879649068, 0.53714931728654236, 0.0], 1e-14);
        assert_close(&r.negatives[0], &[0.34138175786573421, -0.4551756771543124, 0.0], 1e-14);
        assert_close(
            &r.negatives[1],
            &[0.061480230099172521, -0.081973640132230033, 0.0],
            1e-14,
        );
    }

    #[test]
    fn info_nce_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..5).map(|_| rng.random_range(-1.0..1.0)).collect()
        };
        let anchor = draw(&mut rng);
        let positive = draw(&mut rng);
        let negatives: Vec<Vec<f64>> = (0..3).map(|_| draw(&mut rng)).collect();
        let t = 0.5;

        let base = info_nce_loss(&anchor, &positive, &negatives, t).unwrap();
        let eps = 1e-6;
        let check = |analytic: f64, plus: f64, minus: f64| {
            let numeric = (plus - minus) / (2.0 * eps);
            assert!(
                (analytic - numeric).abs() < 1e-8,
                "analytic {analytic} vs numeric {numeric}"
            );
        };
        let shifted = |v: &[f64], j: usize, e: f64| {
            let mut out = v.to_vec();
            out[j] += e;
            out
        };
        for j in 0..anchor.len() {
            let plus = info_nce_loss(&shifted(&anchor, j, eps), &positive, &negatives, t).unwrap();
            let minus =
                info_nce_loss(&shifted(&anchor, j, -eps), &positive, &negatives, t).unwrap();
            check(base.anchor[j], plus.loss, minus.loss);

            let plus = info_nce_loss(&anchor, &shifted(&positive, j, eps), &negatives, t).unwrap();
            let minus =
                info_nce_loss(&anchor, &shifted(&positive, j, -eps), &negatives, t).unwrap();
            check(base.positive[j], plus.loss, minus.loss);

            for k in 0..negatives.len() {
                let mut n = negatives.clone();
                n[k][j] += eps;
                let plus = info_nce_loss(&anchor, &positive, &n, t).unwrap();
                n[k][j] -= 2.0 * eps;
                let minus = info_nce_loss(&anchor, &positive, &n, t).unwrap();
                check(base.negatives[k][j], plus.loss, minus.loss);
            }
        }
    }

    #[test]
    fn info_nce_sharpens_with_lower_temperature() {
        // Positive closer than the negative: a sharper softmax is more
        // confident about the right answer, so the loss drops.
        let a = [1.0, 0.0];
        let p = [0.9, (1.0f64 - 0.81).sqrt()];
        let negs = vec![vec![0.0, 1.0]];
        let hot = info_nce_loss(&a, &p, &negs, 1.0).unwrap().loss;
        let cold = info_nce_loss(&a, &p, &negs, 0.1).unwrap().loss;
        assert!(cold < hot, "cold {cold} should beat hot {hot}");
    }

    #[test]
    fn info_nce_permuting_negatives_permutes_gradients() {
        let a = [0.6, -0.8];
        let p = [1.0, 0.0];
        let n1 = vec![0.0, 1.0];
        let n2 = vec![-0.6, 0.8];
        let fwd = info_nce_loss(&a, &p, &[n1.clone(), n2.clone()], 0.5).unwrap();
        let rev = info_nce_loss(&a, &p, &[n2, n1], 0.5).unwrap();
        assert!((fwd.loss - rev.loss).abs() < 1e-15);
        assert_close(&fwd.negatives[0], &rev.negatives[1], 1e-15);
        assert_close(&fwd.negatives[1], &rev.negatives[0], 1e-15);
    }

    /// Equal similarity to the positive and all three negatives makes the
    /// softmax uniform over four candidates.
    #[test]
    fn info_nce_uniform_similarities_give_ln_group_size() {
        let a = [1.0, 0.0, 0.0, 0.0];
        let p = [0.0, 1.0, 0.0, 0.0];
        let negs = vec![
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, -1.0, 0.0, 0.0],
        ];
        let r = info_nce_loss(&a, &p, &negs, 0.5).unwrap();
        assert!((r.loss - 4.0f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn info_nce_rejects_degenerate_calls() {
        assert!(matches!(
            info_nce_loss(&[1.0], &[1.0], &[], 0.5),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            info_nce_loss(&[1.0], &[1.0, 0.0], &[vec![1.0]], 0.5),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            info_nce_loss(&[1.0], &[1.0], &[vec![1.0]], 0.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn normalize_gives_unit_norm_and_keeps_direction() {
        let (unit, norm) = l2_normalize(&[3.0, 4.0]);
        assert!((norm - 5.0).abs() < 1e-15);
        assert_close(&unit, &[0.6, 0.8], 1e-15);

        let (zero, _) = l2_normalize(&[0.0, 0.0]);
        assert_close(&zero, &[0.0, 0.0], 1e-15);
    }

    #[test]
    fn normalize_backward_matches_finite_differences() {
        let v = [0.8, -1.3, 2.1, 0.4];
        let g = [0.3, -0.7, 0.2, 1.1];
        // scalar objective: g · normalize(v)
        let value = |v: &[f64]| {
            let (u, _) = l2_normalize(v);
            u.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>()
        };
        let (unit, norm) = l2_normalize(&v);
        let analytic = l2_normalize_backward(&unit, norm, &g);
        let eps = 1e-6;
        for j in 0..v.len() {
            let mut plus = v;
            plus[j] += eps;
            let mut minus = v;
            minus[j] -= eps;
            let numeric = (value(&plus) - value(&minus)) / (2.0 * eps);
            assert!(
                (analytic[j] - numeric).abs() < 1e-8,
                "coordinate {j}: analytic {} vs numeric {numeric}",
                analytic[j]
            );
        }
    }

    #[test]
    fn augment_is_identity_with_null_parameters() {
        let cfg = AugmentationConfig {
            noise_sigma: 0.0,
            scale_jitter: [1.0, 1.0],
            mask_prob: 0.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = vec![1.5, -2.0, 0.0, 3.25];
        let y = augment(&x, &[1.0; 4], &cfg, &mut rng).unwrap();
        assert_eq!(y, x);
    }

    #[test]
    fn augment_is_deterministic_in_rng_state() {
        let cfg = AugmentationConfig::default();
        let x = vec![1.0, -1.0, 2.0];
        let sd = vec![0.5, 0.5, 0.5];
        let mut a = ChaCha8Rng::seed_from_u64(77);
        let mut b = ChaCha8Rng::seed_from_u64(77);
        assert_eq!(
            augment(&x, &sd, &cfg, &mut a).unwrap(),
            augment(&x, &sd, &cfg, &mut b).unwrap()
        );
    }

    #[test]
    fn augment_mask_rate_matches_probability() {
        let cfg = AugmentationConfig {
            noise_sigma: 0.0,
            scale_jitter: [1.0, 1.0],
            mask_prob: 0.3,
        };
        let x = vec![1.0; 50];
        let sd = vec![1.0; 50];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let trials = 2_000;
        let mut zeroed = 0usize;
        for _ in 0..trials {
            let y = augment(&x, &sd, &cfg, &mut rng).unwrap();
            zeroed += y.iter().filter(|&&v| v == 0.0).count();
        }
        let n = (trials * 50) as f64;
        let rate = zeroed as f64 / n;
        let se = (0.3f64 * 0.7 / n).sqrt();
        assert!(
            (rate - 0.3).abs() < 4.0 * se,
            "mask rate {rate} outside 4 standard errors of 0.3"
        );
    }

    /// With unit feature std, the injected noise has std `noise_sigma`; the
    /// sample std over n Gaussian draws has standard error sigma/sqrt(2n).
    #[test]
    fn augment_noise_std_matches_statistical_oracle() {
        let cfg = AugmentationConfig {
            noise_sigma: 0.1,
            scale_jitter: [1.0, 1.0],
            mask_prob: 0.0,
        };
        let x = vec![0.0, 5.0];
        let sd = vec![1.0, 0.0];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let trials = 10_000;
        let mut sq = 0.0;
        for _ in 0..trials {
            let y = augment(&x, &sd, &cfg, &mut rng).unwrap();
            sq += y[0] * y[0];
            // zero-std coordinate gets no noise at all
            assert_eq!(y[1], 5.0);
        }
        let emp_sd = (sq / trials as f64).sqrt();
        let se = 0.1 / (2.0 * trials as f64).sqrt();
        assert!(
            (emp_sd - 0.1).abs() < 3.0 * se,
            "empirical noise std {emp_sd} outside 3 standard errors of 0.1"
        );
    }

    /// Two well-separated clusters; a short pretraining run must reduce the
    /// contrastive loss and stay bit-deterministic across reruns.
    #[test]
    fn pretraining_reduces_loss_and_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut features = Vec::new();
        for i in 0..40 {
            let center = if i % 2 == 0 { 4.0 } else { -4.0 };
            features.push(
                (0..6)
                    .map(|_| {
                        let z: f64 = rng.sample(StandardNormal);
                        center + 0.5 * z
                    })
                    .collect::<Vec<f64>>(),
            );
        }
        let config = ContrastiveConfig {
            epochs: 25,
            batch_size: 10,
            learning_rate: 5e-3,
            hidden_dim: 16,
            embedding_dim: 8,
            projection_dim: 4,
            ..ContrastiveConfig::default()
        };
        let a = pretrain_encoder(&features, &config, 3).unwrap();
        let b = pretrain_encoder(&features, &config, 3).unwrap();
        assert_eq!(a.encoder, b.encoder);
        assert_eq!(a.epoch_losses, b.epoch_losses);

        assert!(a.encoder.is_finite());
        assert_eq!(a.encoder.layers.len(), 2);
        assert_eq!(a.encoder.layers[0].in_dim, 6);
        assert_eq!(a.encoder.layers[1].out_dim, 8);
        let first = a.epoch_losses[0];
        let last = *a.epoch_losses.last().unwrap();
        assert!(
            last < first,
            "loss should drop: first {first}, last {last}"
        );
    }

    #[test]
    fn pretraining_skips_singleton_trailing_chunk() {
        // 5 samples with batch 2 leaves a singleton chunk every epoch.
        let features: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, 1.0]).collect();
        let config = ContrastiveConfig {
            epochs: 2,
            batch_size: 2,
            hidden_dim: 4,
            embedding_dim: 3,
            projection_dim: 2,
            ..ContrastiveConfig::default()
        };
        let out = pretrain_encoder(&features, &config, 0).unwrap();
        assert_eq!(out.epoch_losses.len(), 2);
        assert!(out.epoch_losses.iter().all(|l| l.is_finite()));
    }

    #[test]
    fn pretraining_rejects_tiny_or_ragged_input() {
        let config = ContrastiveConfig::default();
        assert!(matches!(
            pretrain_encoder(&[vec![1.0, 2.0]], &config, 0),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            pretrain_encoder(&[vec![1.0, 2.0], vec![1.0]], &config, 0),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn zero_epochs_returns_untouched_initialization() {
        let features: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, -(i as f64)]).collect();
        let config = ContrastiveConfig {
            epochs: 0,
            hidden_dim: 5,
            embedding_dim: 4,
            projection_dim: 3,
            ..ContrastiveConfig::default()
        };
        let out = pretrain_encoder(&features, &config, 11).unwrap();
        let fresh = NetworkParams::init_he(&config.network(2).unwrap(), derive_seed(11, 1));
        assert_eq!(out.encoder.layers, fresh.layers[..2]);
        assert!(out.epoch_losses.is_empty());
    }

    /// Four well-separated Gaussian clusters: classifying each training point
    /// by its nearest class centroid in embedding space must beat the 1/4
    /// chance rate by a wide margin.
    #[test]
    fn centroid_probe_on_embeddings_beats_chance() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let centers = [
            [6.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 6.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 6.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 6.0, 0.0],
        ];
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for _ in 0..20 {
                let f: Vec<f64> = center
                    .iter()
                    .map(|&m| {
                        let z: f64 = rng.sample(StandardNormal);
                        m + 0.6 * z
                    })
                    .collect();
                features.push(f);
                labels.push(c);
            }
        }
        let config = ContrastiveConfig {
            epochs: 15,
            batch_size: 16,
            learning_rate: 2e-3,
            hidden_dim: 12,
            embedding_dim: 6,
            projection_dim: 4,
            ..ContrastiveConfig::default()
        };
        let out = pretrain_encoder(&features, &config, 5).unwrap();

        let embed = |x: &[f64]| -> Vec<f64> {
            forward(&out.encoder_config, &out.encoder, x, Mode::Eval, 0)
                .unwrap()
                .output()
                .to_vec()
        };
        let embeddings: Vec<Vec<f64>> = features.iter().map(|f| embed(f)).collect();
        let mut means = vec![vec![0.0; 6]; 4];
        for (e, &c) in embeddings.iter().zip(&labels) {
            for (m, v) in means[c].iter_mut().zip(e) {
                *m += v / 20.0;
            }
        }
        let dist2 = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
        };
        let correct = embeddings
            .iter()
            .zip(&labels)
            .filter(|(e, &c)| {
                let best = (0..4)
                    .min_by(|&i, &j| dist2(e, &means[i]).total_cmp(&dist2(e, &means[j])))
                    .unwrap();
                best == c
            })
            .count();
        let accuracy = correct as f64 / labels.len() as f64;
        assert!(
            accuracy > 0.5,
            "nearest-centroid accuracy {accuracy} should clear chance 0.25 easily"
        );
    }

    /// The contrastive loss should trend down on the default synthetic
    /// benchmark. Training progress is noisy, so a 3-of-5 seed majority is
    /// asserted instead of every seed.
    #[test]
    fn benchmark_pretraining_improves_loss_for_seed_majority() {
        let spec = crate::data::BenchmarkSpec::default();
        let dataset = crate::data::generate_dataset(&spec.to_dataset_config().unwrap()).unwrap();
        let split = crate::data::split_dataset(&dataset, 10, 20, 99).unwrap();
        let features: Vec<Vec<f64>> = split
            .train
            .iter()
            .map(|&id| dataset.get(id).unwrap().feature.clone())
            .collect();
        let config = ContrastiveConfig {
            epochs: 6,
            learning_rate: 1e-3,
            ..ContrastiveConfig::default()
        };
        let mut improved = 0;
        for seed in 0..5 {
            let out = pretrain_encoder(&features, &config, seed).unwrap();
            if *out.epoch_losses.last().unwrap() < out.epoch_losses[0] {
                improved += 1;
            }
        }
        assert!(improved >= 3, "loss improved for only {improved} of 5 seeds");
    }
}

#[cfg(test)]
mod prop_tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        /// When the positive is at least as similar as every negative, the
        /// loss cannot exceed the uniform-softmax value ln(1 + m).
        #[test]
        fn loss_bounded_when_positive_dominates(
            seed in 0u64..1000,
            m in 1usize..6,
            t in 0.2f64..2.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw = || -> Vec<f64> {
                let v: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
                l2_normalize(&v).0
            };
            let anchor = draw();
            let mut candidates: Vec<Vec<f64>> = (0..=m).map(|_| draw()).collect();
            let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
            // the most anchor-similar candidate becomes the positive
            let best = (0..candidates.len())
                .max_by(|&i, &j| {
                    dot(&anchor, &candidates[i]).total_cmp(&dot(&anchor, &candidates[j]))
                })
                .unwrap();
            let positive = candidates.swap_remove(best);
            let r = info_nce_loss(&anchor, &positive, &candidates, t).unwrap();
            prop_assert!(r.loss > 0.0);
            prop_assert!(r.loss <= ((1 + m) as f64).ln() + 1e-12);
        }
    }
}
