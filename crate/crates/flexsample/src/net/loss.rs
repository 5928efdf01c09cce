//! Softmax cross-entropy with optional class weighting.

use crate::error::{Error, Result};

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Cross-entropy of `logits` against `label`, optionally scaled by a per-class
/// weight. Returns the loss and the gradient with respect to the logits,
/// `weight * (softmax(logits) - onehot(label))`.
pub fn softmax_cross_entropy(
    logits: &[f64],
    label: usize,
    class_weight: Option<f64>,
) -> Result<(f64, Vec<f64>)> {
    let c = logits.len();
    if c < 2 {
        return Err(Error::Input(format!("need at least 2 classes, got {c}")));
    }
    if label >= c {
        return Err(Error::Input(format!(
            "label {label} out of range for {c} classes"
        )));
    }
    let weight = class_weight.unwrap_or(1.0);
    if !(weight.is_finite() && weight > 0.0) {
        return Err(Error::Input(format!(
            "class weight must be positive and finite, got {weight}"
        )));
    }

    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum_exp: f64 = logits.iter().map(|&z| (z - max).exp()).sum();
    let log_sum_exp = max + sum_exp.ln();
    let loss = weight * (log_sum_exp - logits[label]);

    let mut grad: Vec<f64> = logits
        .iter()
        .map(|&z| weight * ((z - max).exp() / sum_exp))
        .collect();
    grad[label] -= weight;

    Ok((loss, grad))
}
