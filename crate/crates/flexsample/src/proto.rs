//! Prototype-guided subset selection.
//!
//! Class prototypes are mean embeddings; a sample's typicality is its
//! Euclidean distance to its class prototype. The anchor subset keeps the
//! closest samples per class under a softened long-tail profile, so the
//! selected set is both smaller and less imbalanced than the full train set.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Mean embedding of one class plus the number of samples averaged.
#[derive(Debug, Clone, PartialEq)]
pub struct Prototype {
    pub class_id: usize,
    pub mean_feature: Vec<f64>,
    /// At least 1; an empty class cannot produce a prototype.
    pub population: usize,
}

/// Mean embedding per class, ascending by class id. Every class in
/// `0..num_classes` must appear in `labels` at least once.
pub fn compute_prototypes(
    labels: &[usize],
    embeddings: &[Vec<f64>],
    num_classes: usize,
) -> Result<Vec<Prototype>> {
    if labels.len() != embeddings.len() {
        return Err(Error::Input(format!(
            "{} labels vs {} embeddings",
            labels.len(),
            embeddings.len()
        )));
    }
    if embeddings.is_empty() || num_classes == 0 {
        return Err(Error::Input("no embeddings to average".into()));
    }
    let dim = embeddings[0].len();
    let mut sums = vec![vec![0.0; dim]; num_classes];
    let mut counts = vec![0usize; num_classes];
    for (&label, e) in labels.iter().zip(embeddings) {
        if label >= num_classes {
            return Err(Error::Input(format!(
                "label {label} outside 0..{num_classes}"
            )));
        }
        if e.len() != dim {
            return Err(Error::Input("embeddings must share one dimension".into()));
        }
        if e.iter().any(|x| !x.is_finite()) {
            return Err(Error::Input("non-finite embedding".into()));
        }
        for (s, x) in sums[label].iter_mut().zip(e) {
            *s += x;
        }
        counts[label] += 1;
    }
    sums.into_iter()
        .zip(counts)
        .enumerate()
        .map(|(c, (mut sum, n))| {
            if n == 0 {
                return Err(Error::Input(format!(
                    "class {c} has no embeddings to build a prototype from"
                )));
            }
            for s in &mut sum {
                *s /= n as f64;
            }
            Ok(Prototype {
                class_id: c,
                mean_feature: sum,
                population: n,
            })
        })
        .collect()
}

/// Euclidean distance between a prototype and an embedding.
pub fn prototype_distance(prototype: &Prototype, embedding: &[f64]) -> Result<f64> {
    if prototype.mean_feature.len() != embedding.len() {
        return Err(Error::Usage(format!(
            "prototype dim {} vs embedding dim {}",
            prototype.mean_feature.len(),
            embedding.len()
        )));
    }
    Ok(prototype
        .mean_feature
        .iter()
        .zip(embedding)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Per-class subset sizes plus the profile they realize.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorPlan {
    pub targets: Vec<usize>,
    pub scaling: f64,
    /// Ratio of the realized head target to the realized tail target.
    pub achieved_ratio: f64,
}

/// Subset sizes under a scaling factor `s`: the head keeps `s * N_0` samples
/// and the imbalance ratio softens from `r` to `r * s`, following
/// `round(s * N_0 * (r * s)^(-c/(k-1)))` clamped to `[1, N_c]`. The tail
/// target equals the tail count, so the rarest class is never thinned.
pub fn anchor_counts(
    class_counts: &[usize],
    imbalance_ratio: f64,
    scaling: f64,
) -> Result<AnchorPlan> {
    let k = class_counts.len();
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 classes, got {k}")));
    }
    if class_counts.iter().any(|&n| n == 0) {
        return Err(Error::Input("every class needs at least one sample".into()));
    }
    if !(imbalance_ratio.is_finite() && imbalance_ratio >= 1.0) {
        return Err(Error::Config(format!(
            "imbalance ratio must be >= 1, got {imbalance_ratio}"
        )));
    }
    if !(scaling.is_finite() && scaling > 0.0 && scaling <= 1.0) {
        return Err(Error::Config(format!(
            "scaling must be in (0, 1], got {scaling}"
        )));
    }
    let softened = imbalance_ratio * scaling;
    if softened < 1.0 {
        return Err(Error::Config(format!(
            "scaling {scaling} would invert the profile: r*s = {softened} < 1"
        )));
    }

    let head = scaling * class_counts[0] as f64;
    let exp_base = -1.0 / (k as f64 - 1.0);
    let targets: Vec<usize> = class_counts
        .iter()
        .enumerate()
        .map(|(c, &available)| {
            let raw = head * softened.powf(exp_base * c as f64);
            (raw.round() as usize).clamp(1, available)
        })
        .collect();
    let achieved_ratio = targets[0] as f64 / targets[k - 1] as f64;
    Ok(AnchorPlan {
        targets,
        scaling,
        achieved_ratio,
    })
}

/// How to pick each class's subset once its size is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    /// Closest to the class prototype.
    Anchor,
    /// Farthest from the class prototype.
    Edge,
    /// Uniform without replacement.
    Random,
}

impl std::str::FromStr for SelectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "anchor" => Ok(SelectionMode::Anchor),
            "edge" => Ok(SelectionMode::Edge),
            "random" => Ok(SelectionMode::Random),
            other => Err(Error::Usage(format!(
                "unknown selection mode '{other}' (expected anchor, edge, or random)"
            ))),
        }
    }
}

/// A realized subset: per-class selected ids plus everything left over.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSubset {
    /// Selected ids per class, ascending.
    pub selected: Vec<Vec<u64>>,
    /// Ids not selected (the future query pool), ascending.
    pub unsampled: Vec<u64>,
    pub plan: AnchorPlan,
}

impl AnchorSubset {
    /// All selected ids across classes, ascending.
    pub fn selected_ids(&self) -> Vec<u64> {
        let mut ids: Vec<u64> = self.selected.iter().flatten().copied().collect();
        ids.sort_unstable();
        ids
    }
}

/// Fills the plan's per-class targets from `ids`/`labels`/`embeddings`
/// (parallel slices). Distance ties break toward the smaller id, and random
/// mode is deterministic in `seed`.
pub fn select_subset(
    ids: &[u64],
    labels: &[usize],
    embeddings: &[Vec<f64>],
    prototypes: &[Prototype],
    plan: &AnchorPlan,
    mode: SelectionMode,
    seed: u64,
) -> Result<AnchorSubset> {
    let k = prototypes.len();
    if ids.len() != labels.len() || ids.len() != embeddings.len() {
        return Err(Error::Input(format!(
            "ids/labels/embeddings lengths differ: {}/{}/{}",
            ids.len(),
            labels.len(),
            embeddings.len()
        )));
    }
    if plan.targets.len() != k {
        return Err(Error::Input(format!(
            "plan covers {} classes but {k} prototypes given",
            plan.targets.len()
        )));
    }
    if let Some(p) = prototypes.iter().enumerate().find(|(c, p)| p.class_id != *c) {
        return Err(Error::Input(format!(
            "prototype at position {} belongs to class {}",
            p.0, p.1.class_id
        )));
    }

    // (distance, id) per class, or just ids for random mode.
    let mut per_class: Vec<Vec<(f64, u64)>> = vec![Vec::new(); k];
    for ((&id, &label), e) in ids.iter().zip(labels).zip(embeddings) {
        if label >= k {
            return Err(Error::Input(format!("label {label} outside 0..{k}")));
        }
        let d = prototype_distance(&prototypes[label], e)?;
        if !d.is_finite() {
            return Err(Error::Input(format!("non-finite distance for id {id}")));
        }
        per_class[label].push((d, id));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut selected = Vec::with_capacity(k);
    let mut unsampled = Vec::new();
    for (c, mut members) in per_class.into_iter().enumerate() {
        let target = plan.targets[c];
        if members.len() < target {
            return Err(Error::Usage(format!(
                "class {c} has {} samples but the plan asks for {target}; \
                 targets must be pre-clamped to the class counts",
                members.len()
            )));
        }
        match mode {
            SelectionMode::Anchor => {
                members.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            }
            SelectionMode::Edge => {
                members.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
            }
            SelectionMode::Random => {
                members.sort_by_key(|m| m.1);
                // partial Fisher-Yates: the first `target` slots are the draw
                for i in 0..target.min(members.len().saturating_sub(1)) {
                    let j = rand::Rng::random_range(&mut rng, i..members.len());
                    members.swap(i, j);
                }
            }
        }
        let mut keep: Vec<u64> = members[..target].iter().map(|m| m.1).collect();
        keep.sort_unstable();
        unsampled.extend(members[target..].iter().map(|m| m.1));
        selected.push(keep);
    }
    unsampled.sort_unstable();

    Ok(AnchorSubset {
        selected,
        unsampled,
        plan: plan.clone(),
    })
}
