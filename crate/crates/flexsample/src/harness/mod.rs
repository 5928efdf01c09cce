//! Experiment orchestration.
//!
//! One trial is a seeded end-to-end run of a single method. The flexible
//! pipeline pretrains an encoder, selects an anchor subset near the class
//! prototypes, warm-trains on it, and grows the train set by querying the
//! leftover pool whenever validation plateaus. Baselines train on the full
//! train split with their sampler or loss and stop on the same plateau rule.
//! Every trial produces a [`RunRecord`]; [`aggregate_trials`] rolls records
//! up into the mean-and-spread report, and [`emit_report`] persists both.
//!
//! Determinism contract: a record is a pure function of the config plus the
//! trial seed (wall-clock time excepted). The dataset and its split come from
//! the dataset seed alone, so all trials of one experiment see identical
//! data and differ only in training randomness.

mod config;
mod report;

pub use config::{ClassifierConfig, ExperimentConfig, Method, PretrainKind, QueryStrategy};
pub use report::{
    aggregate_trials, emit_report, read_metrics_csv, render_table, Aggregate, EpochRecord,
    MetricsReport, MetricsRow, RunRecord, TrialMetrics,
};

use std::collections::HashSet;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::{
    balanced_resample, class_balanced_weights, focal_loss, inverse_frequency_weights,
};
use crate::curriculum::{
    bald_mutual_information, class_probs_from_accuracy, curriculum_step, posterior_draws,
    rank_and_query, CurriculumDecision, CurriculumState, QueryCandidate, QueryEvent, StopReason,
};
use crate::data::{generate_dataset, ingest_csv, split_dataset, Dataset, SplitSet};
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::net::{
    adam_step, backward, forward, softmax_cross_entropy, AdamConfig, AdamState, Gradients, Mode,
    NetworkConfig, NetworkParams,
};
use crate::proto::{anchor_counts, compute_prototypes, select_subset};
use crate::ssl::pretrain_encoder;

// Seed streams, one per stochastic stage. Each stage derives its rng from its
// own stream, so changing how much randomness one stage consumes never shifts
// any other stage.
const STREAM_SPLIT: u64 = 1;
const STREAM_SSL: u64 = 2;
const STREAM_CE_PRETRAIN: u64 = 3;
const STREAM_SELECT: u64 = 4;
const STREAM_INIT: u64 = 5;
const STREAM_SHUFFLE: u64 = 6;
const STREAM_MASKS: u64 = 7;
const STREAM_RESAMPLE: u64 = 8;
const STREAM_QUERY: u64 = 9;

/// Validation classes thinner than this fall back to train-set accuracy when
/// difficulty probabilities are computed; smaller samples are too noisy to
/// steer quotas.
const MIN_VAL_PER_CLASS: usize = 5;

/// Class-count cutoffs of the shot-based accuracy groups, applied to the full
/// train split's counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct GroupThresholds {
    /// Classes with strictly more training samples than this are "head".
    pub hi: usize,
    /// Classes with strictly fewer training samples than this are "tail";
    /// counts in `[lo, hi]` are "medium".
    pub lo: usize,
}

impl Default for GroupThresholds {
    fn default() -> Self {
        Self { hi: 100, lo: 20 }
    }
}

impl GroupThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.hi > self.lo && self.lo > 0) {
            return Err(Error::Config(format!(
                "group thresholds need hi > lo > 0, got hi = {}, lo = {}",
                self.hi, self.lo
            )));
        }
        Ok(())
    }
}

/// Accuracy of one parameter set on one id list. `per_class[c]` is `None`
/// when class `c` has no sample in the list.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalOutcome {
    pub top1: f64,
    pub per_class: Vec<Option<f64>>,
}

/// Argmax-decodes every listed sample in eval mode and tallies the hits.
pub fn evaluate(
    net: &NetworkConfig,
    params: &NetworkParams,
    dataset: &Dataset,
    ids: &[u64],
) -> Result<EvalOutcome> {
    if ids.is_empty() {
        return Err(Error::Input("cannot evaluate on an empty id list".into()));
    }
    let k = dataset.num_classes();
    let mut correct = vec![0usize; k];
    let mut total = vec![0usize; k];
    for &id in ids {
        let sample = dataset
            .get(id)
            .ok_or_else(|| Error::Input(format!("id {id} is not in the dataset")))?;
        let cache = forward(net, params, &sample.feature, Mode::Eval, 0)?;
        total[sample.label] += 1;
        if argmax(cache.output()) == sample.label {
            correct[sample.label] += 1;
        }
    }
    let hits: usize = correct.iter().sum();
    let per_class = correct
        .iter()
        .zip(&total)
        .map(|(&c, &t)| (t > 0).then(|| c as f64 / t as f64))
        .collect();
    Ok(EvalOutcome {
        top1: hits as f64 / ids.len() as f64,
        per_class,
    })
}

fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Unweighted group means of per-class accuracy. A group without any class
/// that has a defined accuracy reports `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMetrics {
    pub head: Option<f64>,
    pub medium: Option<f64>,
    pub tail: Option<f64>,
    /// Unweighted mean over every class with a defined accuracy.
    pub all: Option<f64>,
}

pub fn group_metrics(
    per_class: &[Option<f64>],
    train_counts: &[usize],
    thresholds: &GroupThresholds,
) -> Result<GroupMetrics> {
    thresholds.validate()?;
    if per_class.len() != train_counts.len() {
        return Err(Error::Input(format!(
            "{} accuracies vs {} class counts",
            per_class.len(),
            train_counts.len()
        )));
    }
    let mean_of = |member: &dyn Fn(usize) -> bool| -> Option<f64> {
        let values: Vec<f64> = per_class
            .iter()
            .zip(train_counts)
            .filter(|(_, &n)| member(n))
            .filter_map(|(a, _)| *a)
            .collect();
        (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
    };
    Ok(GroupMetrics {
        head: mean_of(&|n| n > thresholds.hi),
        medium: mean_of(&|n| (thresholds.lo..=thresholds.hi).contains(&n)),
        tail: mean_of(&|n| n < thresholds.lo),
        all: mean_of(&|_| true),
    })
}

/// Per-sample training loss of the epoch loop.
enum LossKind {
    Ce,
    /// Per-class weights, rescaled to mean 1 by the constructors in use.
    Weighted(Vec<f64>),
    Focal { gamma: f64 },
}

impl LossKind {
    fn apply(&self, logits: &[f64], label: usize) -> Result<(f64, Vec<f64>)> {
        match self {
            LossKind::Ce => softmax_cross_entropy(logits, label, None),
            LossKind::Weighted(w) => softmax_cross_entropy(logits, label, Some(w[label])),
            LossKind::Focal { gamma } => focal_loss(logits, label, *gamma, None),
        }
    }
}

/// Owns the classifier parameters, optimizer, and the training-side rng
/// streams of one trial.
struct Trainer {
    net: NetworkConfig,
    params: NetworkParams,
    adam: AdamState,
    loss: LossKind,
    batch_size: usize,
    shuffle_rng: ChaCha8Rng,
    mask_base: u64,
    /// Monotone across the whole trial, so every dropout mask is distinct
    /// regardless of epoch boundaries or optimizer resets.
    mask_counter: u64,
}

impl Trainer {
    fn new(
        net: NetworkConfig,
        params: NetworkParams,
        learning_rate: f64,
        loss: LossKind,
        batch_size: usize,
        seed: u64,
    ) -> Self {
        let adam = AdamState::new(&params, AdamConfig::with_lr(learning_rate));
        Self {
            net,
            params,
            adam,
            loss,
            batch_size,
            shuffle_rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, STREAM_SHUFFLE)),
            mask_base: derive_seed(seed, STREAM_MASKS),
            mask_counter: 0,
        }
    }

    /// Fresh optimizer moments at a new learning rate; parameters keep
    /// training from where they are.
    fn reset_optimizer(&mut self, learning_rate: f64) {
        self.adam = AdamState::new(&self.params, AdamConfig::with_lr(learning_rate));
    }

    /// One pass over `ids` (shuffled here unless the caller pre-ordered
    /// them), mini-batched with mean-gradient steps. Returns the mean
    /// per-sample loss.
    fn train_epoch(&mut self, dataset: &Dataset, ids: &[u64], shuffle: bool) -> Result<f64> {
        if ids.is_empty() {
            return Err(Error::Input("cannot train on an empty id list".into()));
        }
        let mut order = ids.to_vec();
        if shuffle {
            order.shuffle(&mut self.shuffle_rng);
        }
        let mut loss_sum = 0.0;
        for batch in order.chunks(self.batch_size) {
            let mut grads = Gradients::zeros_like(&self.params);
            for &id in batch {
                let sample = dataset
                    .get(id)
                    .ok_or_else(|| Error::Input(format!("id {id} is not in the dataset")))?;
                let mask_seed = derive_seed(self.mask_base, self.mask_counter);
                self.mask_counter += 1;
                let cache = forward(&self.net, &self.params, &sample.feature, Mode::Train, mask_seed)?;
                let (loss, d_logits) = self.loss.apply(cache.output(), sample.label)?;
                loss_sum += loss;
                let (g, _) = backward(&self.net, &self.params, &cache, &d_logits)?;
                grads.accumulate(&g);
            }
            grads.scale(1.0 / batch.len() as f64);
            adam_step(&mut self.params, &grads, &mut self.adam)?;
        }
        Ok(loss_sum / order.len() as f64)
    }
}

/// Dataset plus split. The split seed derives from the dataset seed, not the
/// trial seed, so every trial of an experiment shares the same data.
pub fn load_dataset(config: &ExperimentConfig) -> Result<(Dataset, SplitSet)> {
    let dataset = match &config.dataset_csv {
        Some(path) => ingest_csv(path)?,
        None => generate_dataset(&config.dataset.to_dataset_config()?)?,
    };
    let split = split_dataset(
        &dataset,
        config.dataset.val_reserve,
        config.dataset.test_reserve,
        derive_seed(config.dataset.seed, STREAM_SPLIT),
    )?;
    Ok((dataset, split))
}

/// The ratio reported in metrics rows: the configured value for synthetic
/// data, the realized head/tail count quotient for ingested data.
fn dataset_ratio(config: &ExperimentConfig, dataset: &Dataset) -> f64 {
    if config.dataset_csv.is_none() {
        return config.dataset.imbalance_ratio;
    }
    let counts = dataset.class_counts();
    counts[0] as f64 / counts[counts.len() - 1] as f64
}

fn assert_disjoint(train_ids: &[u64], reserved: &HashSet<u64>) -> Result<()> {
    if let Some(id) = train_ids.iter().find(|id| reserved.contains(id)) {
        return Err(Error::Usage(format!(
            "training set contains reserved evaluation id {id}"
        )));
    }
    Ok(())
}

/// Everything the epoch loops hand back to the record builder.
struct TrialOutcome {
    epochs: Vec<EpochRecord>,
    query_events: Vec<QueryEvent>,
    stop_reason: StopReason,
    best_epoch: usize,
    /// Parameter snapshot from the best validation epoch; final test metrics
    /// come from this, not from the last epoch.
    best_params: NetworkParams,
    subset_class_counts: Option<Vec<usize>>,
    pretrain_epoch_losses: Option<Vec<f64>>,
}

/// Runs all of an experiment's trials with seeds `seed .. seed + trials` over
/// one shared dataset and split.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let (dataset, split) = load_dataset(config)?;
    (0..config.trials)
        .map(|t| run_trial_on(config, &dataset, &split, config.seed + t as u64))
        .collect()
}

/// Runs a single seeded trial, building the dataset from the config.
pub fn run_trial(config: &ExperimentConfig, trial_seed: u64) -> Result<RunRecord> {
    config.validate()?;
    let (dataset, split) = load_dataset(config)?;
    run_trial_on(config, &dataset, &split, trial_seed)
}

fn run_trial_on(
    config: &ExperimentConfig,
    dataset: &Dataset,
    split: &SplitSet,
    trial_seed: u64,
) -> Result<RunRecord> {
    let started = Instant::now();
    let net = NetworkConfig::new(
        vec![
            dataset.feature_dim(),
            config.classifier.hidden_dim,
            config.classifier.embedding_dim,
            dataset.num_classes(),
        ],
        config.classifier.dropout,
    )?;
    let outcome = match config.method {
        Method::Flexible => run_flexible(config, dataset, split, &net, trial_seed)?,
        baseline => run_baseline(config, dataset, split, &net, baseline, trial_seed)?,
    };

    let train_counts = dataset.class_counts_for(&split.train);
    let final_test = evaluate(&net, &outcome.best_params, dataset, &split.test)?;
    let groups = group_metrics(&final_test.per_class, &train_counts, &config.groups)?;
    Ok(RunRecord {
        config: config.clone(),
        trial_seed,
        ratio: dataset_ratio(config, dataset),
        train_class_counts: train_counts,
        subset_class_counts: outcome.subset_class_counts,
        pretrain_epoch_losses: outcome.pretrain_epoch_losses,
        query_events: outcome.query_events,
        stop_reason: outcome.stop_reason,
        best_epoch: outcome.best_epoch,
        test_metrics: TrialMetrics {
            top1: final_test.top1,
            head: groups.head,
            medium: groups.medium,
            tail: groups.tail,
            all: groups.all,
        },
        test_per_class: final_test.per_class,
        epochs: outcome.epochs,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    })
}

fn run_baseline(
    config: &ExperimentConfig,
    dataset: &Dataset,
    split: &SplitSet,
    net: &NetworkConfig,
    method: Method,
    trial_seed: u64,
) -> Result<TrialOutcome> {
    let train_counts = dataset.class_counts_for(&split.train);
    let loss = match method {
        Method::Ce | Method::Rs => LossKind::Ce,
        Method::Rw => LossKind::Weighted(inverse_frequency_weights(&train_counts)?),
        Method::Cb => LossKind::Weighted(class_balanced_weights(&train_counts, config.beta)?),
        Method::Focal => LossKind::Focal {
            gamma: config.gamma,
        },
        Method::Flexible => {
            return Err(Error::Usage(
                "flexible is not a baseline; dispatch bug".into(),
            ))
        }
    };
    let params = NetworkParams::init_he(net, derive_seed(trial_seed, STREAM_INIT));
    let mut trainer = Trainer::new(
        net.clone(),
        params,
        config.classifier.learning_rate,
        loss,
        config.classifier.batch_size,
        trial_seed,
    );
    let train_labels: Vec<usize> = split
        .train
        .iter()
        .map(|&id| dataset.get(id).expect("split id in dataset").label)
        .collect();
    let resample_base = derive_seed(trial_seed, STREAM_RESAMPLE);
    let reserved: HashSet<u64> = split.val.iter().chain(&split.test).copied().collect();

    // Empty pool: the plateau rule becomes a plain early stop and a query can
    // never fire.
    let mut state = CurriculumState::new(split.train.clone(), Vec::new())?;
    let mut epochs = Vec::new();
    let mut best_params = trainer.params.clone();
    let stop_reason = loop {
        let epoch = state.epochs_run();
        if method == Method::Rs {
            let drawn = balanced_resample(
                &split.train,
                &train_labels,
                dataset.num_classes(),
                split.train.len(),
                derive_seed(resample_base, epoch as u64),
            )?;
            assert_disjoint(&drawn, &reserved)?;
            trainer.train_epoch(dataset, &drawn, false)?;
        } else {
            assert_disjoint(&split.train, &reserved)?;
            trainer.train_epoch(dataset, &split.train, true)?;
        }
        let val = evaluate(net, &trainer.params, dataset, &split.val)?;
        let test = evaluate(net, &trainer.params, dataset, &split.test)?;
        if epoch == 0 || val.top1 > state.best_metric() + config.curriculum.improvement_eps {
            best_params = trainer.params.clone();
        }
        epochs.push(EpochRecord {
            epoch,
            val_top1: val.top1,
            test_top1: test.top1,
            val_per_class: val.per_class,
            test_per_class: test.per_class,
        });
        match curriculum_step(&mut state, epochs[epoch].val_top1, &config.curriculum)? {
            CurriculumDecision::Stop(reason) => break reason,
            CurriculumDecision::Continue | CurriculumDecision::Query { .. } => {}
        }
    };
    Ok(TrialOutcome {
        epochs,
        query_events: Vec::new(),
        stop_reason,
        best_epoch: state.best_epoch(),
        best_params,
        subset_class_counts: None,
        pretrain_epoch_losses: None,
    })
}

fn run_flexible(
    config: &ExperimentConfig,
    dataset: &Dataset,
    split: &SplitSet,
    net: &NetworkConfig,
    trial_seed: u64,
) -> Result<TrialOutcome> {
    let k = dataset.num_classes();
    let train_counts = dataset.class_counts_for(&split.train);
    let mut features = Vec::with_capacity(split.train.len());
    let mut labels = Vec::with_capacity(split.train.len());
    for &id in &split.train {
        let sample = dataset.get(id).expect("split id in dataset");
        features.push(sample.feature.clone());
        labels.push(sample.label);
    }

    let (encoder_config, encoder, pretrain_epoch_losses) = match config.pretrain {
        PretrainKind::Ssl => {
            let out = pretrain_encoder(&features, &config.ssl, derive_seed(trial_seed, STREAM_SSL))?;
            (out.encoder_config, out.encoder, out.epoch_losses)
        }
        PretrainKind::Ce => ce_pretrain(config, dataset, split, trial_seed)?,
    };
    let embeddings: Vec<Vec<f64>> = features
        .iter()
        .map(|f| Ok(forward(&encoder_config, &encoder, f, Mode::Eval, 0)?.output().to_vec()))
        .collect::<Result<_>>()?;

    let prototypes = compute_prototypes(&labels, &embeddings, k)?;
    let train_ratio = train_counts[0] as f64 / train_counts[k - 1] as f64;
    let plan = anchor_counts(&train_counts, train_ratio, config.scaling)?;
    let subset = select_subset(
        &split.train,
        &labels,
        &embeddings,
        &prototypes,
        &plan,
        config.selection,
        derive_seed(trial_seed, STREAM_SELECT),
    )?;

    let mut state = CurriculumState::with_warmup(
        subset.selected_ids(),
        subset.unsampled.clone(),
        config.warmup_epochs,
        &config.curriculum,
    )?;
    let subset_class_counts = dataset.class_counts_for(state.train_ids());

    // The classifier inherits the pretrained encoder; only its output layer
    // starts fresh.
    let mut params = NetworkParams::init_he(net, derive_seed(trial_seed, STREAM_INIT));
    params.layers[0] = encoder.layers[0].clone();
    params.layers[1] = encoder.layers[1].clone();
    let mut trainer = Trainer::new(
        net.clone(),
        params,
        config.classifier.learning_rate,
        LossKind::Ce,
        config.classifier.batch_size,
        trial_seed,
    );

    let val_counts = dataset.class_counts_for(&split.val);
    let reserved: HashSet<u64> = split.val.iter().chain(&split.test).copied().collect();
    let query_base = derive_seed(trial_seed, STREAM_QUERY);
    let mut epochs: Vec<EpochRecord> = Vec::new();
    let mut best_params = trainer.params.clone();
    let stop_reason = loop {
        let epoch = state.epochs_run();
        assert_disjoint(state.train_ids(), &reserved)?;
        trainer.train_epoch(dataset, state.train_ids(), true)?;
        let val = evaluate(net, &trainer.params, dataset, &split.val)?;
        let test = evaluate(net, &trainer.params, dataset, &split.test)?;
        if epoch == 0 || val.top1 > state.best_metric() + config.curriculum.improvement_eps {
            best_params = trainer.params.clone();
        }
        epochs.push(EpochRecord {
            epoch,
            val_top1: val.top1,
            test_top1: test.top1,
            val_per_class: val.per_class.clone(),
            test_per_class: test.per_class,
        });
        match curriculum_step(&mut state, val.top1, &config.curriculum)? {
            CurriculumDecision::Stop(reason) => break reason,
            CurriculumDecision::Continue => {}
            CurriculumDecision::Query { budget } => {
                let round_seed = derive_seed(query_base, state.queries_made() as u64);
                let difficulty = difficulty_accuracies(
                    net,
                    &trainer.params,
                    dataset,
                    &val,
                    &val_counts,
                    state.train_ids(),
                )?;
                let probs = class_probs_from_accuracy(&difficulty)?;
                let candidates =
                    score_pool(config, net, &trainer.params, dataset, state.pool_ids(), round_seed)?;
                let selection = rank_and_query(&candidates, &probs, budget)?;
                let acquired = !selection.selected.is_empty();
                state.apply_query(selection.quotas, selection.selected)?;
                if acquired {
                    trainer.reset_optimizer(config.classifier.requery_learning_rate);
                }
            }
        }
    };
    Ok(TrialOutcome {
        epochs,
        query_events: state.query_events().to_vec(),
        stop_reason,
        best_epoch: state.best_epoch(),
        best_params,
        subset_class_counts: Some(subset_class_counts),
        pretrain_epoch_losses: Some(pretrain_epoch_losses),
    })
}

/// Supervised stand-in for the contrastive stage: the same architecture
/// trains with plain cross entropy for the same epoch budget, and its first
/// two layers become the encoder. Runs without dropout, like the contrastive
/// net.
fn ce_pretrain(
    config: &ExperimentConfig,
    dataset: &Dataset,
    split: &SplitSet,
    trial_seed: u64,
) -> Result<(NetworkConfig, NetworkParams, Vec<f64>)> {
    let stage_seed = derive_seed(trial_seed, STREAM_CE_PRETRAIN);
    let net = NetworkConfig::new(
        vec![
            dataset.feature_dim(),
            config.ssl.hidden_dim,
            config.ssl.embedding_dim,
            dataset.num_classes(),
        ],
        0.0,
    )?;
    let params = NetworkParams::init_he(&net, derive_seed(stage_seed, STREAM_INIT));
    let mut trainer = Trainer::new(
        net,
        params,
        config.ssl.learning_rate,
        LossKind::Ce,
        config.ssl.batch_size,
        stage_seed,
    );
    let mut losses = Vec::with_capacity(config.ssl.epochs);
    for _ in 0..config.ssl.epochs {
        losses.push(trainer.train_epoch(dataset, &split.train, true)?);
    }
    let encoder_config = config.ssl.encoder_network(dataset.feature_dim())?;
    let mut encoder = NetworkParams::zeros(&encoder_config);
    encoder.layers[0] = trainer.params.layers[0].clone();
    encoder.layers[1] = trainer.params.layers[1].clone();
    Ok((encoder_config, encoder, losses))
}

/// Per-class accuracies the difficulty probabilities are computed from:
/// validation accuracy when every class keeps at least [`MIN_VAL_PER_CLASS`]
/// validation samples, else accuracy on the current train set. Classes
/// absent from the fallback set count as fully difficult.
fn difficulty_accuracies(
    net: &NetworkConfig,
    params: &NetworkParams,
    dataset: &Dataset,
    val: &EvalOutcome,
    val_counts: &[usize],
    train_ids: &[u64],
) -> Result<Vec<f64>> {
    let source = if val_counts.iter().all(|&n| n >= MIN_VAL_PER_CLASS) {
        val.per_class.clone()
    } else {
        evaluate(net, params, dataset, train_ids)?.per_class
    };
    Ok(source.iter().map(|a| a.unwrap_or(0.0)).collect())
}

/// Scores every pool instance for one query round.
fn score_pool(
    config: &ExperimentConfig,
    net: &NetworkConfig,
    params: &NetworkParams,
    dataset: &Dataset,
    pool_ids: &[u64],
    seed: u64,
) -> Result<Vec<QueryCandidate>> {
    let labels: Vec<usize> = pool_ids
        .iter()
        .map(|&id| dataset.get(id).expect("pool id in dataset").label)
        .collect();
    match config.querying {
        QueryStrategy::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(pool_ids
                .iter()
                .zip(&labels)
                .map(|(&id, &label)| QueryCandidate {
                    id,
                    label,
                    score: rng.random(),
                })
                .collect())
        }
        QueryStrategy::MutualInformation => {
            let inputs: Vec<Vec<f64>> = pool_ids
                .iter()
                .map(|&id| dataset.get(id).expect("pool id in dataset").feature.clone())
                .collect();
            let draws = posterior_draws(net, params, &inputs, config.posterior_samples, seed)?;
            pool_ids
                .iter()
                .zip(&labels)
                .zip(&draws)
                .map(|((&id, &label), d)| {
                    Ok(QueryCandidate {
                        id,
                        label,
                        score: bald_mutual_information(&d.draws)?,
                    })
                })
                .collect()
        }
    }
}
