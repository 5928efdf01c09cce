//! Long-tailed vector datasets: Pareto class counts, Gaussian sub-mode
//! generation, stratified splits, and CSV ingestion/export.
//!
//! The CSV wire format is `id,label,f1,...,fd` (UTF-8, header row, decimal
//! floats). Ingested class labels are remapped densely to `0..k` in
//! count-descending order so class `0` is always the head.

use std::collections::HashMap;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::derive_seed;
use crate::error::{Error, Result};

/// Per-class sample counts on a Pareto profile: `N_c = round(N0 * r^(-c/(k-1)))`
/// with both endpoints forced exact (`N_0 = n0`, `N_{k-1} = round(n0 / r)`) and
/// a floor of one sample per class.
pub fn pareto_counts(k: usize, r: f64, n0: usize) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Config(format!("need k >= 2 classes, got {k}")));
    }
    if !(r.is_finite() && r >= 1.0) {
        return Err(Error::Config(format!("imbalance ratio must be >= 1, got {r}")));
    }
    if (n0 as f64) < r {
        return Err(Error::Config(format!(
            "head count {n0} is below the imbalance ratio {r}; tail would be empty"
        )));
    }

    let exp_base = -1.0 / (k as f64 - 1.0);
    let mut counts: Vec<usize> = (0..k)
        .map(|c| {
            let raw = n0 as f64 * r.powf(exp_base * c as f64);
            (raw.round() as usize).max(1)
        })
        .collect();
    counts[0] = n0;
    counts[k - 1] = (((n0 as f64) / r).round() as usize).max(1);
    Ok(counts)
}

/// Whether a class is a single tight cluster or a multi-mode mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Archetype {
    Compact,
    Diverse,
}

/// Generating distribution of one class: an equal-weight Gaussian mixture over
/// `sub_mode_means` with isotropic `sub_mode_std`.
#[derive(Debug, Clone)]
pub struct ClassSpec {
    pub class_id: usize,
    pub sub_mode_means: Vec<Vec<f64>>,
    pub sub_mode_std: f64,
    pub archetype: Archetype,
}

impl ClassSpec {
    pub fn new(class_id: usize, sub_mode_means: Vec<Vec<f64>>, sub_mode_std: f64) -> Result<Self> {
        if sub_mode_means.is_empty() {
            return Err(Error::Config(format!(
                "class {class_id} needs at least one sub-mode"
            )));
        }
        if !(sub_mode_std.is_finite() && sub_mode_std > 0.0) {
            return Err(Error::Config(format!(
                "class {class_id} sub_mode_std must be positive, got {sub_mode_std}"
            )));
        }
        let archetype = if sub_mode_means.len() >= 2 {
            Archetype::Diverse
        } else {
            Archetype::Compact
        };
        Ok(Self {
            class_id,
            sub_mode_means,
            sub_mode_std,
            archetype,
        })
    }
}

/// Full recipe for a synthetic long-tailed dataset.
#[derive(Debug, Clone)]
pub struct DatasetConfig {
    pub num_classes: usize,
    pub imbalance_ratio: f64,
    pub head_count: usize,
    pub feature_dim: usize,
    pub seed: u64,
    /// Extra per-class samples generated so a later split can reserve them
    /// for validation/test while train keeps the Pareto counts.
    pub val_reserve: usize,
    pub test_reserve: usize,
    pub class_specs: Vec<ClassSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub id: u64,
    pub feature: Vec<f64>,
    pub label: usize,
}

/// Id-addressed samples with dense labels in `0..num_classes`.
#[derive(Debug, Clone)]
pub struct Dataset {
    samples: Vec<Sample>,
    num_classes: usize,
    feature_dim: usize,
    by_id: HashMap<u64, usize>,
}

impl Dataset {
    /// Assembles a dataset from explicit samples. Ids must be unique, labels
    /// must lie in `0..num_classes`, and features must all have `feature_dim`
    /// coordinates; classes are allowed to be empty here (downstream
    /// operations that need populated classes check for themselves).
    pub fn from_samples(samples: Vec<Sample>, num_classes: usize, feature_dim: usize) -> Result<Self> {
        let mut by_id = HashMap::with_capacity(samples.len());
        for (i, s) in samples.iter().enumerate() {
            if s.label >= num_classes {
                return Err(Error::Input(format!(
                    "sample {} has label {} outside 0..{}",
                    s.id, s.label, num_classes
                )));
            }
            if s.feature.len() != feature_dim {
                return Err(Error::Input(format!(
                    "sample {} has dim {} (expected {})",
                    s.id,
                    s.feature.len(),
                    feature_dim
                )));
            }
            if by_id.insert(s.id, i).is_some() {
                return Err(Error::Input(format!("duplicate sample id {}", s.id)));
            }
        }
        Ok(Self {
            samples,
            num_classes,
            feature_dim,
            by_id,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn get(&self, id: u64) -> Option<&Sample> {
        self.by_id.get(&id).map(|&i| &self.samples[i])
    }

    /// Sample count per class over the whole dataset.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_classes];
        for s in &self.samples {
            counts[s.label] += 1;
        }
        counts
    }

    /// Sample count per class restricted to `ids`.
    pub fn class_counts_for(&self, ids: &[u64]) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_classes];
        for &id in ids {
            if let Some(s) = self.get(id) {
                counts[s.label] += 1;
            }
        }
        counts
    }

    /// All ids in ascending order.
    pub fn ids(&self) -> Vec<u64> {
        let mut ids: Vec<u64> = self.samples.iter().map(|s| s.id).collect();
        ids.sort_unstable();
        ids
    }

    /// Per-coordinate standard deviation over the given ids (population form).
    pub fn feature_std(&self, ids: &[u64]) -> Vec<f64> {
        let d = self.feature_dim;
        let n = ids.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for &id in ids {
            let s = self.get(id).expect("id in dataset");
            for (m, x) in mean.iter_mut().zip(&s.feature) {
                *m += x;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; d];
        for &id in ids {
            let s = self.get(id).expect("id in dataset");
            for j in 0..d {
                let dx = s.feature[j] - mean[j];
                var[j] += dx * dx;
            }
        }
        var.into_iter().map(|v| (v / n).sqrt()).collect()
    }
}

/// Draws the dataset described by `config`: for each class, the Pareto count
/// plus the fixed val/test reserves, sampled from the class's equal-weight
/// Gaussian sub-mode mixture. Byte-deterministic in `config.seed`.
pub fn generate_dataset(config: &DatasetConfig) -> Result<Dataset> {
    let k = config.num_classes;
    if config.class_specs.len() != k {
        return Err(Error::Config(format!(
            "expected {k} class specs, got {}",
            config.class_specs.len()
        )));
    }
    for (c, spec) in config.class_specs.iter().enumerate() {
        if spec.class_id != c {
            return Err(Error::Config(format!(
                "class spec at position {c} has class_id {}",
                spec.class_id
            )));
        }
        for m in &spec.sub_mode_means {
            if m.len() != config.feature_dim {
                return Err(Error::Config(format!(
                    "class {c} sub-mode dim {} does not match feature_dim {}",
                    m.len(),
                    config.feature_dim
                )));
            }
        }
    }

    let base = pareto_counts(k, config.imbalance_ratio, config.head_count)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut samples = Vec::new();
    let mut next_id = 0u64;
    for (c, spec) in config.class_specs.iter().enumerate() {
        let total = base[c] + config.val_reserve + config.test_reserve;
        for _ in 0..total {
            let mode = rng.random_range(0..spec.sub_mode_means.len());
            let mean = &spec.sub_mode_means[mode];
            let feature: Vec<f64> = mean
                .iter()
                .map(|&m| {
                    let z: f64 = rng.sample(StandardNormal);
                    m + spec.sub_mode_std * z
                })
                .collect();
            samples.push(Sample {
                id: next_id,
                feature,
                label: c,
            });
            next_id += 1;
        }
    }
    Dataset::from_samples(samples, k, config.feature_dim)
}

/// Train/val/test id lists; pairwise disjoint, val/test stratified per class.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSet {
    pub train: Vec<u64>,
    pub val: Vec<u64>,
    pub test: Vec<u64>,
}

/// Stratified split: per class, `val_per_class` then `test_per_class` ids are
/// drawn at random (seeded) and the remainder goes to train. Splits are stored
/// sorted ascending.
pub fn split_dataset(
    dataset: &Dataset,
    val_per_class: usize,
    test_per_class: usize,
    seed: u64,
) -> Result<SplitSet> {
    let mut per_class: Vec<Vec<u64>> = vec![Vec::new(); dataset.num_classes()];
    for s in dataset.samples() {
        per_class[s.label].push(s.id);
    }
    let reserved = val_per_class + test_per_class;
    for (c, ids) in per_class.iter().enumerate() {
        if ids.len() <= reserved {
            return Err(Error::Config(format!(
                "class {c} has {} samples, need more than {reserved} for the requested split",
                ids.len()
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = SplitSet {
        train: Vec::new(),
        val: Vec::new(),
        test: Vec::new(),
    };
    for ids in &mut per_class {
        ids.sort_unstable();
        // partial Fisher-Yates: the first `reserved` slots become val/test
        for i in 0..reserved.min(ids.len() - 1) {
            let j = rng.random_range(i..ids.len());
            ids.swap(i, j);
        }
        split.val.extend(&ids[..val_per_class]);
        split.test.extend(&ids[val_per_class..reserved]);
        split.train.extend(&ids[reserved..]);
    }
    split.train.sort_unstable();
    split.val.sort_unstable();
    split.test.sort_unstable();
    Ok(split)
}

/// Reads a dataset from `id,label,f1,...,fd` CSV. Original labels may be any
/// non-negative integers; they are remapped densely to `0..k` ordered by
/// descending class count (ties by ascending original label).
pub fn ingest_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Ingest {
                row: 0,
                msg: format!("{other:?}"),
            },
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Ingest {
            row: 0,
            msg: format!("unreadable header: {e}"),
        })?
        .clone();
    if headers.len() < 3 || &headers[0] != "id" || &headers[1] != "label" {
        return Err(Error::Ingest {
            row: 0,
            msg: "header must be id,label,f1,...,fd with at least one feature column".into(),
        });
    }
    let dim = headers.len() - 2;

    let mut raw: Vec<(u64, u64, Vec<f64>)> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| Error::Ingest {
            row,
            msg: format!("unparseable record: {e}"),
        })?;
        if record.len() != dim + 2 {
            return Err(Error::Ingest {
                row,
                msg: format!("expected {} fields, got {}", dim + 2, record.len()),
            });
        }
        let id: u64 = record[0].trim().parse().map_err(|_| Error::Ingest {
            row,
            msg: format!("bad id {:?}", &record[0]),
        })?;
        let label: u64 = record[1].trim().parse().map_err(|_| Error::Ingest {
            row,
            msg: format!("bad label {:?}", &record[1]),
        })?;
        let mut feature = Vec::with_capacity(dim);
        for j in 0..dim {
            let v: f64 = record[j + 2].trim().parse().map_err(|_| Error::Ingest {
                row,
                msg: format!("bad feature {:?} in column f{}", &record[j + 2], j + 1),
            })?;
            if !v.is_finite() {
                return Err(Error::Ingest {
                    row,
                    msg: format!("non-finite feature in column f{}", j + 1),
                });
            }
            feature.push(v);
        }
        raw.push((id, label, feature));
    }
    if raw.is_empty() {
        return Err(Error::Ingest {
            row: 0,
            msg: "file contains no samples".into(),
        });
    }

    // Dense remap, count-descending, ties by ascending original label.
    let mut counts: HashMap<u64, usize> = HashMap::new();
    for (_, label, _) in &raw {
        *counts.entry(*label).or_insert(0) += 1;
    }
    let mut order: Vec<(u64, usize)> = counts.into_iter().collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let remap: HashMap<u64, usize> = order
        .iter()
        .enumerate()
        .map(|(new, (orig, _))| (*orig, new))
        .collect();
    let num_classes = remap.len();

    let samples: Vec<Sample> = raw
        .into_iter()
        .map(|(id, label, feature)| Sample {
            id,
            feature,
            label: remap[&label],
        })
        .collect();
    Dataset::from_samples(samples, num_classes, dim).map_err(|e| match e {
        Error::Input(msg) => Error::Ingest { row: 0, msg },
        other => other,
    })
}

/// Writes a dataset in the same CSV format `ingest_csv` reads. Floats use the
/// shortest decimal representation that round-trips exactly.
pub fn export_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(format!("{other:?}")),
        },
    })?;

    let mut header = vec!["id".to_string(), "label".to_string()];
    header.extend((1..=dataset.feature_dim()).map(|j| format!("f{j}")));
    writer
        .write_record(&header)
        .map_err(|e| Error::io(path, std::io::Error::other(e)))?;

    for s in dataset.samples() {
        let mut record = vec![s.id.to_string(), s.label.to_string()];
        record.extend(s.feature.iter().map(|v| format!("{v}")));
        writer
            .write_record(&record)
            .map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Knobs for the default synthetic long-tailed benchmark: a diverse multi-mode
/// head class, compact tail classes, and a Pareto count profile.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct BenchmarkSpec {
    pub num_classes: usize,
    pub feature_dim: usize,
    pub head_count: usize,
    pub imbalance_ratio: f64,
    pub seed: u64,
    /// Scale applied to the unit-Gaussian draw of every sub-mode mean.
    pub separation: f64,
    pub head_sub_modes: usize,
    pub head_std: f64,
    pub mid_std: f64,
    pub tail_std: f64,
    pub val_reserve: usize,
    pub test_reserve: usize,
}

impl Default for BenchmarkSpec {
    fn default() -> Self {
        Self {
            num_classes: 8,
            feature_dim: 32,
            head_count: 1000,
            imbalance_ratio: 100.0,
            seed: 0,
            separation: 0.8,
            head_sub_modes: 4,
            head_std: 2.0,
            mid_std: 0.9,
            tail_std: 0.6,
            val_reserve: 10,
            test_reserve: 20,
        }
    }
}

impl BenchmarkSpec {
    /// Expands the spec into a concrete [`DatasetConfig`]: sub-mode means are
    /// drawn once per seed from a unit Gaussian scaled by `separation`;
    /// class 0 is diverse (`head_sub_modes` modes), the last two classes are
    /// compact with `tail_std`, the rest compact with `mid_std`.
    pub fn to_dataset_config(&self) -> Result<DatasetConfig> {
        let k = self.num_classes;
        if k < 2 {
            return Err(Error::Config(format!("need k >= 2 classes, got {k}")));
        }
        if self.head_sub_modes == 0 {
            return Err(Error::Config("head_sub_modes must be >= 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, 0x5eed_0001));
        let draw_mean = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..self.feature_dim)
                .map(|_| {
                    let z: f64 = rng.sample(StandardNormal);
                    self.separation * z
                })
                .collect()
        };

        let mut class_specs = Vec::with_capacity(k);
        for c in 0..k {
            let (n_modes, std) = if c == 0 {
                (self.head_sub_modes, self.head_std)
            } else if c >= k - 2 {
                (1, self.tail_std)
            } else {
                (1, self.mid_std)
            };
            let means = (0..n_modes).map(|_| draw_mean(&mut rng)).collect();
            class_specs.push(ClassSpec::new(c, means, std)?);
        }

        Ok(DatasetConfig {
            num_classes: k,
            imbalance_ratio: self.imbalance_ratio,
            head_count: self.head_count,
            feature_dim: self.feature_dim,
            seed: derive_seed(self.seed, 0x5eed_0002),
            val_reserve: self.val_reserve,
            test_reserve: self.test_reserve,
            class_specs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn pareto_no_imbalance_is_flat() {
        let counts = pareto_counts(5, 1.0, 123).unwrap();
        assert_eq!(counts, vec![123; 5]);
    }

    #[test]
    fn pareto_endpoints_follow_ratio_definition() {
        let counts = pareto_counts(8, 100.0, 1000).unwrap();
        assert_eq!(counts[0], 1000);
        assert_eq!(counts[7], 10);
    }

    #[test]
    fn pareto_matches_formula_oracle() {
        let (k, r, n0) = (8usize, 100.0f64, 1000usize);
        let counts = pareto_counts(k, r, n0).unwrap();
        let oracle: Vec<usize> = (0..k)
            .map(|c| {
                ((n0 as f64 * r.powf(-(c as f64) / (k as f64 - 1.0))).round() as usize).max(1)
            })
            .collect();
        assert_eq!(counts, oracle);
    }

    #[test]
    fn pareto_head_below_ratio_is_config_error() {
        let err = pareto_counts(4, 50.0, 40).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    fn tiny_config() -> DatasetConfig {
        DatasetConfig {
            num_classes: 2,
            imbalance_ratio: 4.0,
            head_count: 40,
            feature_dim: 3,
            seed: 7,
            val_reserve: 2,
            test_reserve: 3,
            class_specs: vec![
                ClassSpec::new(0, vec![vec![1.0, 0.0, -1.0], vec![-1.0, 0.0, 1.0]], 0.5).unwrap(),
                ClassSpec::new(1, vec![vec![4.0, 4.0, 4.0]], 0.25).unwrap(),
            ],
        }
    }

    #[test]
    fn generation_is_seed_deterministic() {
        let config = tiny_config();
        let a = generate_dataset(&config).unwrap();
        let b = generate_dataset(&config).unwrap();
        assert_eq!(a.samples(), b.samples());
    }

    #[test]
    fn generation_counts_are_pareto_plus_reserves() {
        let config = tiny_config();
        let ds = generate_dataset(&config).unwrap();
        let base = pareto_counts(2, 4.0, 40).unwrap();
        let counts = ds.class_counts();
        assert_eq!(counts[0], base[0] + 5);
        assert_eq!(counts[1], base[1] + 5);
    }

    #[test]
    fn generation_dim_mismatch_is_config_error() {
        let mut config = tiny_config();
        config.class_specs[1].sub_mode_means[0].pop();
        let err = generate_dataset(&config).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn single_mode_class_mean_matches_spec() {
        let mean = vec![2.0, -1.0, 0.5, 3.0];
        let std = 0.5;
        let config = DatasetConfig {
            num_classes: 2,
            imbalance_ratio: 1.0,
            head_count: 1000,
            feature_dim: 4,
            seed: 99,
            val_reserve: 0,
            test_reserve: 0,
            class_specs: vec![
                ClassSpec::new(0, vec![mean.clone()], std).unwrap(),
                ClassSpec::new(1, vec![vec![0.0; 4]], std).unwrap(),
            ],
        };
        let ds = generate_dataset(&config).unwrap();
        let class0: Vec<&Sample> = ds.samples().iter().filter(|s| s.label == 0).collect();
        assert_eq!(class0.len(), 1000);
        let tol = 3.0 * std / (1000f64).sqrt();
        for j in 0..4 {
            let emp: f64 = class0.iter().map(|s| s.feature[j]).sum::<f64>() / 1000.0;
            assert!(
                (emp - mean[j]).abs() < tol,
                "coordinate {j}: empirical {emp} vs spec {}",
                mean[j]
            );
        }
    }

    #[test]
    fn degenerate_split_puts_everything_in_train() {
        let ds = generate_dataset(&tiny_config()).unwrap();
        let split = split_dataset(&ds, 0, 0, 1).unwrap();
        assert_eq!(split.train, ds.ids());
        assert!(split.val.is_empty() && split.test.is_empty());
    }

    #[test]
    fn split_sizes_are_exact_and_partition_holds() {
        let ds = generate_dataset(&tiny_config()).unwrap();
        let split = split_dataset(&ds, 2, 3, 5).unwrap();
        assert_eq!(ds.class_counts_for(&split.val), vec![2, 2]);
        assert_eq!(ds.class_counts_for(&split.test), vec![3, 3]);

        // brute-force set comparison
        let train: HashSet<u64> = split.train.iter().copied().collect();
        let val: HashSet<u64> = split.val.iter().copied().collect();
        let test: HashSet<u64> = split.test.iter().copied().collect();
        assert!(train.is_disjoint(&val));
        assert!(train.is_disjoint(&test));
        assert!(val.is_disjoint(&test));
        let mut union: Vec<u64> = train.union(&val).chain(test.iter()).copied().collect();
        union.sort_unstable();
        assert_eq!(union, ds.ids());
    }

    #[test]
    fn split_with_insufficient_population_is_config_error() {
        let ds = generate_dataset(&tiny_config()).unwrap();
        // class 1 has 10 + 5 = 15 samples; ask for all of them
        let err = split_dataset(&ds, 10, 5, 0).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn ingest_header_only_is_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        std::fs::write(&path, "id,label,f1,f2\n").unwrap();
        let err = ingest_csv(&path).unwrap_err();
        assert!(matches!(err, Error::Ingest { .. }));
    }

    #[test]
    fn ingest_remaps_labels_count_descending() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("three.csv");
        std::fs::write(&path, "id,label,f1\n0,5,1.5\n1,5,2.5\n2,9,3.5\n").unwrap();
        let ds = ingest_csv(&path).unwrap();
        assert_eq!(ds.num_classes(), 2);
        let labels: Vec<usize> = ds.samples().iter().map(|s| s.label).collect();
        assert_eq!(labels, vec![0, 0, 1]);
    }

    #[test]
    fn ingest_ragged_row_reports_row_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ragged.csv");
        std::fs::write(&path, "id,label,f1,f2\n0,1,0.5,0.5\n1,1,0.25\n").unwrap();
        match ingest_csv(&path).unwrap_err() {
            Error::Ingest { row, .. } => assert_eq!(row, 2),
            other => panic!("expected ingestion error, got {other:?}"),
        }
    }

    #[test]
    fn ingest_non_numeric_field_reports_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "id,label,f1\n0,1,0.5\n1,oops,0.5\n").unwrap();
        match ingest_csv(&path).unwrap_err() {
            Error::Ingest { row, .. } => assert_eq!(row, 2),
            other => panic!("expected ingestion error, got {other:?}"),
        }
    }

    #[test]
    fn export_then_ingest_round_trips_exactly() {
        let ds = generate_dataset(&tiny_config()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("roundtrip.csv");
        export_csv(&ds, &path).unwrap();
        let back = ingest_csv(&path).unwrap();
        assert_eq!(back.len(), ds.len());
        assert_eq!(back.num_classes(), ds.num_classes());
        for s in ds.samples() {
            let t = back.get(s.id).expect("id survives round trip");
            assert_eq!(t.label, s.label);
            assert_eq!(t.feature, s.feature);
        }
    }

    #[test]
    fn benchmark_spec_builds_expected_archetypes() {
        let spec = BenchmarkSpec::default();
        let config = spec.to_dataset_config().unwrap();
        assert_eq!(config.class_specs.len(), 8);
        assert_eq!(config.class_specs[0].archetype, Archetype::Diverse);
        assert_eq!(config.class_specs[0].sub_mode_means.len(), 4);
        for c in 1..8 {
            assert_eq!(config.class_specs[c].archetype, Archetype::Compact);
        }
        assert_eq!(config.class_specs[6].sub_mode_std, spec.tail_std);
        assert_eq!(config.class_specs[7].sub_mode_std, spec.tail_std);
        assert_eq!(config.class_specs[3].sub_mode_std, spec.mid_std);
    }
}
