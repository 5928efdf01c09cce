//! Standard long-tail countermeasures the flexible pipeline is compared
//! against: class-balanced resampling, inverse-frequency reweighting, focal
//! loss, and effective-number reweighting.
//!
//! All weight vectors are rescaled to mean 1 so swapping schemes does not
//! change the effective learning rate.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::net::{softmax, softmax_cross_entropy};

/// Draws `draws` ids with replacement, class-uniform: first a class (uniform
/// over classes), then a member of that class (uniform within it). Expected
/// class frequencies are flat regardless of the imbalance.
pub fn balanced_resample(
    ids: &[u64],
    labels: &[usize],
    num_classes: usize,
    draws: usize,
    seed: u64,
) -> Result<Vec<u64>> {
    if ids.len() != labels.len() {
        return Err(Error::Input(format!(
            "{} ids vs {} labels",
            ids.len(),
            labels.len()
        )));
    }
    let mut per_class: Vec<Vec<u64>> = vec![Vec::new(); num_classes];
    for (&id, &label) in ids.iter().zip(labels) {
        if label >= num_classes {
            return Err(Error::Input(format!("label {label} outside 0..{num_classes}")));
        }
        per_class[label].push(id);
    }
    for (c, members) in per_class.iter().enumerate() {
        if members.is_empty() {
            return Err(Error::Config(format!(
                "class {c} has no samples to resample from"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..draws)
        .map(|_| {
            let c = rng.random_range(0..num_classes);
            let members = &per_class[c];
            members[rng.random_range(0..members.len())]
        })
        .collect())
}

/// Weights proportional to `1 / n_c`, rescaled to mean 1.
pub fn inverse_frequency_weights(class_counts: &[usize]) -> Result<Vec<f64>> {
    if class_counts.is_empty() {
        return Err(Error::Input("no class counts".into()));
    }
    if class_counts.iter().any(|&n| n == 0) {
        return Err(Error::Config("every class needs at least one sample".into()));
    }
    let raw: Vec<f64> = class_counts.iter().map(|&n| 1.0 / n as f64).collect();
    let scale = class_counts.len() as f64 / raw.iter().sum::<f64>();
    Ok(raw.into_iter().map(|w| scale * w).collect())
}

/// Effective sample count `(1 - beta^n) / (1 - beta)`: how many of `n`
/// overlapping samples carry new information. Approaches `n` as `beta -> 0`
/// and saturates at `1 / (1 - beta)` for large `n`.
pub fn effective_number(beta: f64, n: usize) -> Result<f64> {
    if !(beta.is_finite() && (0.0..1.0).contains(&beta)) {
        return Err(Error::Config(format!("beta must be in [0, 1), got {beta}")));
    }
    if n == 0 {
        return Err(Error::Input("effective number needs n >= 1".into()));
    }
    Ok((1.0 - beta.powi(n as i32)) / (1.0 - beta))
}

/// Weights proportional to the inverse effective number of each class,
/// rescaled to mean 1. `beta = 0` degenerates to uniform weights.
pub fn class_balanced_weights(class_counts: &[usize], beta: f64) -> Result<Vec<f64>> {
    if class_counts.is_empty() {
        return Err(Error::Input("no class counts".into()));
    }
    let raw: Vec<f64> = class_counts
        .iter()
        .map(|&n| Ok(1.0 / effective_number(beta, n)?))
        .collect::<Result<_>>()?;
    let scale = class_counts.len() as f64 / raw.iter().sum::<f64>();
    Ok(raw.into_iter().map(|w| scale * w).collect())
}

/// Cross entropy with the well-classified part discounted by
/// `(1 - p_label)^gamma`. Returns the loss and its gradient in the logits.
///
/// `gamma = 0` delegates to the plain cross entropy, bit for bit.
pub fn focal_loss(
    logits: &[f64],
    label: usize,
    gamma: f64,
    class_weight: Option<f64>,
) -> Result<(f64, Vec<f64>)> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::Config(format!(
            "gamma must be non-negative, got {gamma}"
        )));
    }
    if gamma == 0.0 {
        return softmax_cross_entropy(logits, label, class_weight);
    }
    if logits.len() < 2 {
        return Err(Error::Input(format!(
            "need at least 2 classes, got {}",
            logits.len()
        )));
    }
    if label >= logits.len() {
        return Err(Error::Input(format!(
            "label {label} outside 0..{}",
            logits.len()
        )));
    }
    if logits.iter().any(|z| !z.is_finite()) {
        return Err(Error::Input("non-finite logit".into()));
    }
    let w = match class_weight {
        Some(w) if w.is_finite() && w > 0.0 => w,
        Some(w) => {
            return Err(Error::Input(format!(
                "class weight must be positive, got {w}"
            )))
        }
        None => 1.0,
    };

    let p = softmax(logits);
    let pt = p[label];
    let q = (1.0 - pt).max(0.0);
    if q == 0.0 {
        // perfectly classified: the focal factor zeroes both loss and grad
        return Ok((0.0, vec![0.0; logits.len()]));
    }
    let log_pt = pt.ln();
    let loss = -w * q.powf(gamma) * log_pt;
    // d/dz_j = w * [gamma * pt * ln(pt) * q^(gamma-1) - q^gamma] * (1[j=label] - p_j)
    let coef = w * (gamma * pt * log_pt * q.powf(gamma - 1.0) - q.powf(gamma));
    let grad = p
        .iter()
        .enumerate()
        .map(|(j, &pj)| {
            let indicator = if j == label { 1.0 } else { 0.0 };
            coef * (indicator - pj)
        })
        .collect();
    Ok((loss, grad))
}
