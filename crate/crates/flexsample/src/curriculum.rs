//! Accuracy-driven acquisition of unsampled training data.
//!
//! While the classifier trains on the anchor subset, classes it handles
//! poorly get proportionally higher acquisition priority. When validation
//! accuracy plateaus, an uncertainty-ranked batch of pool samples is folded
//! into the train set; training stops once the pool is gone and the plateau
//! persists, or at a hard epoch cap.

use std::collections::BTreeSet;

use crate::derive_seed;
use crate::error::{Error, Result};
use crate::net::{forward, softmax, Mode, NetworkConfig, NetworkParams};

/// Per-class acquisition priorities derived from accuracy.
///
/// `raw` is the miss rate floored at `1e-3` so solved classes stay
/// reachable; `normalized` rescales it by `delta` to sum to the number of
/// classes (mean priority 1).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ClassProbabilities {
    pub raw: Vec<f64>,
    pub delta: f64,
    pub normalized: Vec<f64>,
}

pub fn class_probs_from_accuracy(accuracies: &[f64]) -> Result<ClassProbabilities> {
    if accuracies.is_empty() {
        return Err(Error::Input("no class accuracies".into()));
    }
    if accuracies.iter().any(|a| !(0.0..=1.0).contains(a)) {
        return Err(Error::Input(format!(
            "accuracies must lie in [0, 1], got {accuracies:?}"
        )));
    }
    let raw: Vec<f64> = accuracies.iter().map(|a| (1.0 - a).max(1e-3)).collect();
    let delta = accuracies.len() as f64 / raw.iter().sum::<f64>();
    let normalized = raw.iter().map(|p| delta * p).collect();
    Ok(ClassProbabilities {
        raw,
        delta,
        normalized,
    })
}

/// Per-class acquisition sizes for one query round: a `budget` fraction of
/// each class's pool, weighted by its priority and capped by availability.
pub fn query_quotas(pool_counts: &[usize], priorities: &[f64], budget: f64) -> Result<Vec<usize>> {
    if pool_counts.len() != priorities.len() {
        return Err(Error::Input(format!(
            "{} pool counts vs {} priorities",
            pool_counts.len(),
            priorities.len()
        )));
    }
    if !(budget.is_finite() && budget > 0.0 && budget <= 1.0) {
        return Err(Error::Config(format!(
            "budget must be in (0, 1], got {budget}"
        )));
    }
    Ok(pool_counts
        .iter()
        .zip(priorities)
        .map(|(&u, &p)| ((p * budget * u as f64).round() as usize).min(u))
        .collect())
}

/// One instance's stochastic class-probability vectors, one per forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub draws: Vec<Vec<f64>>,
}

/// Repeated stochastic forward passes per instance, softmaxed.
///
/// Each draw runs in train mode with its own derived mask seed, so with a
/// positive dropout rate the spread across draws reflects the model's
/// parameter uncertainty. A zero rate is allowed and makes all of an
/// instance's draws identical. Instances are independent: the draws for
/// instance `i` do not depend on the rest of the batch.
pub fn posterior_draws(
    config: &NetworkConfig,
    params: &NetworkParams,
    inputs: &[Vec<f64>],
    draws: usize,
    seed: u64,
) -> Result<Vec<PosteriorDraws>> {
    if draws < 2 {
        return Err(Error::Config(format!(
            "need at least 2 draws to measure disagreement, got {draws}"
        )));
    }
    inputs
        .iter()
        .enumerate()
        .map(|(i, input)| {
            let instance_seed = derive_seed(seed, i as u64);
            let draws = (0..draws)
                .map(|t| {
                    let cache = forward(
                        config,
                        params,
                        input,
                        Mode::Train,
                        derive_seed(instance_seed, t as u64),
                    )?;
                    Ok(softmax(cache.output()))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(PosteriorDraws { draws })
        })
        .collect()
}

/// Disagreement between stochastic predictions: entropy of the mean
/// distribution minus the mean entropy of the individual draws. Zero when
/// every draw agrees; large when draws are confident but contradictory.
pub fn bald_mutual_information(draws: &[Vec<f64>]) -> Result<f64> {
    if draws.is_empty() {
        return Err(Error::Input("no posterior draws".into()));
    }
    let k = draws[0].len();
    if k < 2 {
        return Err(Error::Input("distributions need at least 2 classes".into()));
    }
    for d in draws {
        if d.len() != k {
            return Err(Error::Input("draws must share one dimension".into()));
        }
        if d.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::Input(format!("not a distribution: {d:?}")));
        }
        let sum: f64 = d.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Input(format!(
                "distribution sums to {sum}, expected 1"
            )));
        }
    }

    // 0 * ln 0 = 0 by continuity
    let entropy = |p: &[f64]| -> f64 {
        -p.iter()
            .filter(|&&x| x > 0.0)
            .map(|&x| x * x.ln())
            .sum::<f64>()
    };
    let n = draws.len() as f64;
    let mean: Vec<f64> = (0..k)
        .map(|j| draws.iter().map(|d| d[j]).sum::<f64>() / n)
        .collect();
    let mean_entropy = draws.iter().map(|d| entropy(d)).sum::<f64>() / n;
    // cancellation can leave a tiny negative residue; information is >= 0
    Ok((entropy(&mean) - mean_entropy).max(0.0))
}

/// A pool sample with its acquisition score.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryCandidate {
    pub id: u64,
    pub label: usize,
    pub score: f64,
}

/// One query round's outcome: the per-class quotas that were computed and the
/// ids that filled them (ascending).
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySelection {
    pub quotas: Vec<usize>,
    pub selected: Vec<u64>,
}

/// Budgeted, priority-weighted acquisition from the pool.
///
/// Each class's quota is the `budget` fraction of its own pool size, scaled
/// by its priority and capped by availability; the quota is then filled by
/// descending score, ties toward the smaller id. An empty candidate list is
/// a valid no-op and returns an empty selection.
pub fn rank_and_query(
    candidates: &[QueryCandidate],
    probs: &ClassProbabilities,
    budget: f64,
) -> Result<QuerySelection> {
    let k = probs.normalized.len();
    let mut per_class: Vec<Vec<(f64, u64)>> = vec![Vec::new(); k];
    for c in candidates {
        if c.label >= k {
            return Err(Error::Input(format!("label {} outside 0..{k}", c.label)));
        }
        if !c.score.is_finite() {
            return Err(Error::Input(format!("non-finite score for id {}", c.id)));
        }
        per_class[c.label].push((c.score, c.id));
    }
    let pool_counts: Vec<usize> = per_class.iter().map(|m| m.len()).collect();
    let quotas = query_quotas(&pool_counts, &probs.normalized, budget)?;

    let mut selected = Vec::new();
    for (members, &quota) in per_class.iter_mut().zip(&quotas) {
        members.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        selected.extend(members.iter().take(quota).map(|m| m.1));
    }
    selected.sort_unstable();
    Ok(QuerySelection { quotas, selected })
}

/// Patience thresholds and the hard cap of the training loop.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct CurriculumLimits {
    /// Epochs without improvement (and without a fresher query) before a
    /// query round fires.
    pub query_patience: usize,
    /// Epochs without improvement before training stops, once the pool is
    /// empty.
    pub stop_patience: usize,
    pub max_epochs: usize,
    /// Fraction of each class's pool considered per query round.
    pub query_budget: f64,
    /// Minimum metric gain that counts as improvement.
    pub improvement_eps: f64,
}

impl Default for CurriculumLimits {
    fn default() -> Self {
        Self {
            query_patience: 10,
            stop_patience: 20,
            max_epochs: 100,
            query_budget: 0.10,
            improvement_eps: 1e-6,
        }
    }
}

impl CurriculumLimits {
    pub fn validate(&self) -> Result<()> {
        if self.query_patience == 0 || self.stop_patience == 0 || self.max_epochs == 0 {
            return Err(Error::Config(
                "patience values and max_epochs must be positive".into(),
            ));
        }
        if !(self.query_budget.is_finite()
            && self.query_budget > 0.0
            && self.query_budget <= 1.0)
        {
            return Err(Error::Config(format!(
                "query_budget must be in (0, 1], got {}",
                self.query_budget
            )));
        }
        if !(self.improvement_eps.is_finite() && self.improvement_eps >= 0.0) {
            return Err(Error::Config(format!(
                "improvement_eps must be non-negative, got {}",
                self.improvement_eps
            )));
        }
        Ok(())
    }
}

/// What the training loop should do after the epoch just recorded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurriculumDecision {
    Continue,
    /// Acquire a batch from the pool, then keep training.
    Query { budget: f64 },
    Stop(StopReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EpochCap,
    Plateau,
}

/// One acquisition round, as recorded in run manifests.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QueryEvent {
    /// 0-based epoch index the round fired after.
    pub epoch: usize,
    pub quotas: Vec<usize>,
    pub selected: Vec<u64>,
}

/// Train/pool membership, the monitored-metric history, and the plateau
/// clocks derived from it.
///
/// The metric is "higher is better". A query resets the query clock only;
/// the stop clock keeps counting from the last genuine improvement. The
/// train set and pool stay disjoint; every applied query moves ids from the
/// pool into the train set and is logged.
#[derive(Debug, Clone, PartialEq)]
pub struct CurriculumState {
    train_ids: Vec<u64>,
    pool_ids: Vec<u64>,
    history: Vec<f64>,
    best: f64,
    best_epoch: usize,
    last_query_epoch: Option<usize>,
    query_events: Vec<QueryEvent>,
}

impl CurriculumState {
    pub fn new(train_ids: Vec<u64>, pool_ids: Vec<u64>) -> Result<Self> {
        let train: BTreeSet<u64> = train_ids.iter().copied().collect();
        let pool: BTreeSet<u64> = pool_ids.iter().copied().collect();
        if train.len() != train_ids.len() || pool.len() != pool_ids.len() {
            return Err(Error::Input("duplicate ids in train set or pool".into()));
        }
        if let Some(id) = train.intersection(&pool).next() {
            return Err(Error::Input(format!(
                "id {id} is in both the train set and the pool"
            )));
        }
        let mut state = Self {
            train_ids,
            pool_ids,
            history: Vec::new(),
            best: f64::NEG_INFINITY,
            best_epoch: 0,
            last_query_epoch: None,
            query_events: Vec::new(),
        };
        state.train_ids.sort_unstable();
        state.pool_ids.sort_unstable();
        Ok(state)
    }

    /// Like [`new`](Self::new), but the first query cannot fire before
    /// `warmup` epochs have run, regardless of how early the metric goes
    /// stale. Warm-up epochs still count toward the epoch cap and the stop
    /// clock.
    pub fn with_warmup(
        train_ids: Vec<u64>,
        pool_ids: Vec<u64>,
        warmup: usize,
        limits: &CurriculumLimits,
    ) -> Result<Self> {
        limits.validate()?;
        let mut state = Self::new(train_ids, pool_ids)?;
        // A phantom query at (warmup - patience) holds the query clock back
        // exactly until the warm-up ends; shorter warm-ups need no phantom.
        if warmup > limits.query_patience {
            state.last_query_epoch = Some(warmup - limits.query_patience);
        }
        Ok(state)
    }

    pub fn train_ids(&self) -> &[u64] {
        &self.train_ids
    }

    pub fn pool_ids(&self) -> &[u64] {
        &self.pool_ids
    }

    pub fn pool_is_empty(&self) -> bool {
        self.pool_ids.is_empty()
    }

    pub fn query_events(&self) -> &[QueryEvent] {
        &self.query_events
    }

    pub fn epochs_run(&self) -> usize {
        self.history.len()
    }

    pub fn queries_made(&self) -> usize {
        self.query_events.len()
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }

    pub fn best_metric(&self) -> f64 {
        self.best
    }

    /// 0-based epoch of the last genuine improvement.
    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    /// Moves an acquired selection from the pool into the train set and logs
    /// the round. Every selected id must currently be in the pool.
    pub fn apply_query(&mut self, quotas: Vec<usize>, selected: Vec<u64>) -> Result<()> {
        let pool: BTreeSet<u64> = self.pool_ids.iter().copied().collect();
        let unique: BTreeSet<u64> = selected.iter().copied().collect();
        if unique.len() != selected.len() {
            return Err(Error::Input("duplicate ids in query selection".into()));
        }
        if let Some(id) = unique.iter().find(|id| !pool.contains(id)) {
            return Err(Error::Input(format!("selected id {id} is not in the pool")));
        }
        self.pool_ids.retain(|id| !unique.contains(id));
        self.train_ids.extend(&selected);
        self.train_ids.sort_unstable();
        self.query_events.push(QueryEvent {
            epoch: self.history.len().saturating_sub(1),
            quotas,
            selected,
        });
        Ok(())
    }
}

/// Records one epoch's metric and decides what happens next.
///
/// Checks run in a fixed order: the epoch cap wins over a plateau stop, which
/// wins over a query. When `Query` is returned the state's query clock is
/// already advanced, so the caller only has to acquire the batch and call
/// [`CurriculumState::apply_query`].
pub fn curriculum_step(
    state: &mut CurriculumState,
    metric: f64,
    limits: &CurriculumLimits,
) -> Result<CurriculumDecision> {
    limits.validate()?;
    if !metric.is_finite() {
        return Err(Error::Numeric(format!(
            "monitored metric must be finite, got {metric}"
        )));
    }

    let epoch = state.history.len();
    state.history.push(metric);
    if metric > state.best + limits.improvement_eps || state.history.len() == 1 {
        state.best = metric;
        state.best_epoch = epoch;
    }

    if state.history.len() >= limits.max_epochs {
        return Ok(CurriculumDecision::Stop(StopReason::EpochCap));
    }
    let stop_clock = epoch - state.best_epoch;
    if state.pool_is_empty() && stop_clock >= limits.stop_patience {
        return Ok(CurriculumDecision::Stop(StopReason::Plateau));
    }
    let query_reference = match state.last_query_epoch {
        Some(q) => q.max(state.best_epoch),
        None => state.best_epoch,
    };
    // additive form: a warm-up phantom query may sit ahead of the clock
    if !state.pool_is_empty() && epoch >= query_reference + limits.query_patience {
        state.last_query_epoch = Some(epoch);
        return Ok(CurriculumDecision::Query {
            budget: limits.query_budget,
        });
    }
    Ok(CurriculumDecision::Continue)
}
