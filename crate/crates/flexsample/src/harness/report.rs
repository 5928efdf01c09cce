//! Trial records, cross-trial aggregation, and the files a run leaves behind.
//!
//! An experiment directory holds three artifact kinds:
//! - `metrics.csv`: one row per trial with the fixed column order
//!   `method,ratio,trial_seed,top1,head,medium,tail,all,epochs_run,queries`
//!   and `na` for undefined group accuracies,
//! - `run_<seed>.ron`: the complete manifest of one trial,
//! - `epochs_<seed>.csv`: per-epoch accuracy curves for external plotting.
//!
//! Manifests are byte-reproducible from config plus seed except for the
//! `wall_clock_seconds` line.

use std::path::{Path, PathBuf};

use crate::curriculum::{QueryEvent, StopReason};
use crate::error::{Error, Result};

use super::config::ExperimentConfig;

/// Validation and test accuracy after one training epoch.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub val_top1: f64,
    pub test_top1: f64,
    pub val_per_class: Vec<Option<f64>>,
    pub test_per_class: Vec<Option<f64>>,
}

/// Final test-split numbers of one trial, from the best-validation parameter
/// snapshot. Group entries are `None` when no member class has a defined
/// accuracy.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrialMetrics {
    pub top1: f64,
    pub head: Option<f64>,
    pub medium: Option<f64>,
    pub tail: Option<f64>,
    pub all: Option<f64>,
}

/// The full story of one trial: resolved config, data profile, training
/// curves, query log, and final metrics.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub trial_seed: u64,
    /// Head/tail imbalance of the dataset this trial saw.
    pub ratio: f64,
    pub train_class_counts: Vec<usize>,
    /// Realized anchor-subset counts; `None` for baselines.
    pub subset_class_counts: Option<Vec<usize>>,
    /// Mean pretraining loss per epoch; `None` for baselines.
    pub pretrain_epoch_losses: Option<Vec<f64>>,
    pub query_events: Vec<QueryEvent>,
    pub stop_reason: StopReason,
    /// 0-based epoch whose validation accuracy was best.
    pub best_epoch: usize,
    pub test_metrics: TrialMetrics,
    pub test_per_class: Vec<Option<f64>>,
    pub epochs: Vec<EpochRecord>,
    pub wall_clock_seconds: f64,
}

impl RunRecord {
    pub fn epochs_run(&self) -> usize {
        self.epochs.len()
    }

    pub fn queries(&self) -> usize {
        self.query_events.len()
    }
}

/// Mean and population standard deviation of one metric across trials.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
}

fn aggregate(values: &[f64]) -> Aggregate {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Aggregate {
        mean,
        std: var.sqrt(),
    }
}

fn aggregate_defined(values: impl Iterator<Item = Option<f64>>) -> Option<Aggregate> {
    let defined: Vec<f64> = values.flatten().collect();
    (!defined.is_empty()).then(|| aggregate(&defined))
}

/// Cross-trial summary of one experiment.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MetricsReport {
    pub method: super::Method,
    pub ratio: f64,
    pub trials: usize,
    pub top1: Aggregate,
    pub head: Option<Aggregate>,
    pub medium: Option<Aggregate>,
    pub tail: Option<Aggregate>,
    pub all: Option<Aggregate>,
    pub epochs_run: Aggregate,
    pub queries: Aggregate,
}

fn seedless(config: &ExperimentConfig) -> ExperimentConfig {
    let mut c = config.clone();
    c.seed = 0;
    c
}

/// Rolls trial records up into means and population standard deviations.
/// The records must come from one experiment: identical configs up to the
/// base seed.
pub fn aggregate_trials(records: &[RunRecord]) -> Result<MetricsReport> {
    let first = records
        .first()
        .ok_or_else(|| Error::Input("need at least one run record".into()))?;
    let reference = seedless(&first.config);
    if records.iter().any(|r| seedless(&r.config) != reference) {
        return Err(Error::Usage(
            "records mix experiment configs; aggregate one experiment at a time".into(),
        ));
    }
    let of = |f: &dyn Fn(&RunRecord) -> f64| -> Aggregate {
        aggregate(&records.iter().map(f).collect::<Vec<_>>())
    };
    Ok(MetricsReport {
        method: first.config.method,
        ratio: first.ratio,
        trials: records.len(),
        top1: of(&|r| r.test_metrics.top1),
        head: aggregate_defined(records.iter().map(|r| r.test_metrics.head)),
        medium: aggregate_defined(records.iter().map(|r| r.test_metrics.medium)),
        tail: aggregate_defined(records.iter().map(|r| r.test_metrics.tail)),
        all: aggregate_defined(records.iter().map(|r| r.test_metrics.all)),
        epochs_run: of(&|r| r.epochs_run() as f64),
        queries: of(&|r| r.queries() as f64),
    })
}

/// One row of a metrics CSV, as written and as parsed back.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub method: String,
    pub ratio: f64,
    pub trial_seed: u64,
    pub top1: f64,
    pub head: Option<f64>,
    pub medium: Option<f64>,
    pub tail: Option<f64>,
    pub all: Option<f64>,
    pub epochs_run: usize,
    pub queries: usize,
}

impl MetricsRow {
    fn from_record(record: &RunRecord) -> Self {
        Self {
            method: record.config.method.name().to_string(),
            ratio: record.ratio,
            trial_seed: record.trial_seed,
            top1: record.test_metrics.top1,
            head: record.test_metrics.head,
            medium: record.test_metrics.medium,
            tail: record.test_metrics.tail,
            all: record.test_metrics.all,
            epochs_run: record.epochs_run(),
            queries: record.queries(),
        }
    }
}

const METRICS_COLUMNS: [&str; 10] = [
    "method",
    "ratio",
    "trial_seed",
    "top1",
    "head",
    "medium",
    "tail",
    "all",
    "epochs_run",
    "queries",
];

fn opt_cell(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v}"),
        None => "na".into(),
    }
}

fn write_metrics_csv(rows: &[MetricsRow], path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    })?;
    let io_err = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    writer.write_record(METRICS_COLUMNS).map_err(io_err)?;
    for row in rows {
        writer
            .write_record([
                row.method.clone(),
                format!("{}", row.ratio),
                format!("{}", row.trial_seed),
                format!("{}", row.top1),
                opt_cell(row.head),
                opt_cell(row.medium),
                opt_cell(row.tail),
                opt_cell(row.all),
                format!("{}", row.epochs_run),
                format!("{}", row.queries),
            ])
            .map_err(io_err)?;
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Parses a metrics CSV written by [`emit_report`].
pub fn read_metrics_csv(path: impl AsRef<Path>) -> Result<Vec<MetricsRow>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
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
    if headers.iter().ne(METRICS_COLUMNS) {
        return Err(Error::Ingest {
            row: 0,
            msg: format!(
                "expected columns {}, got {}",
                METRICS_COLUMNS.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| Error::Ingest {
            row,
            msg: format!("unparseable record: {e}"),
        })?;
        let field = |i: usize| record.get(i).unwrap_or("").trim();
        let num = |i: usize| -> Result<f64> {
            field(i).parse().map_err(|_| Error::Ingest {
                row,
                msg: format!("bad {} value {:?}", METRICS_COLUMNS[i], field(i)),
            })
        };
        let opt = |i: usize| -> Result<Option<f64>> {
            if field(i) == "na" {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        let int = |i: usize| -> Result<usize> {
            field(i).parse().map_err(|_| Error::Ingest {
                row,
                msg: format!("bad {} value {:?}", METRICS_COLUMNS[i], field(i)),
            })
        };
        rows.push(MetricsRow {
            method: field(0).to_string(),
            ratio: num(1)?,
            trial_seed: field(2).parse().map_err(|_| Error::Ingest {
                row,
                msg: format!("bad trial_seed value {:?}", field(2)),
            })?,
            top1: num(3)?,
            head: opt(4)?,
            medium: opt(5)?,
            tail: opt(6)?,
            all: opt(7)?,
            epochs_run: int(8)?,
            queries: int(9)?,
        });
    }
    Ok(rows)
}

fn write_epochs_csv(record: &RunRecord, path: &Path) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
    })?;
    let io_err = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    let k = record.train_class_counts.len();
    let mut header = vec!["epoch".to_string(), "split".to_string(), "top1".to_string()];
    header.extend((0..k).map(|c| format!("class{c}")));
    writer.write_record(&header).map_err(io_err)?;
    for e in &record.epochs {
        for (split, top1, per_class) in [
            ("val", e.val_top1, &e.val_per_class),
            ("test", e.test_top1, &e.test_per_class),
        ] {
            let mut row = vec![e.epoch.to_string(), split.to_string(), format!("{top1}")];
            row.extend(per_class.iter().map(|a| opt_cell(*a)));
            writer.write_record(&row).map_err(io_err)?;
        }
    }
    writer.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Writes the experiment's artifacts into `out_dir` (created if missing) and
/// returns the paths written: `metrics.csv`, one `run_<seed>.ron` and
/// `epochs_<seed>.csv` per record, and `summary.txt` with the aggregate
/// table.
pub fn emit_report(
    report: &MetricsReport,
    records: &[RunRecord],
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    if records.is_empty() {
        return Err(Error::Input("no records to write".into()));
    }
    let mut written = Vec::new();

    let rows: Vec<MetricsRow> = records.iter().map(MetricsRow::from_record).collect();
    let metrics_path = out_dir.join("metrics.csv");
    write_metrics_csv(&rows, &metrics_path)?;
    written.push(metrics_path);

    for record in records {
        let manifest_path = out_dir.join(format!("run_{}.ron", record.trial_seed));
        let pretty = ron::ser::to_string_pretty(record, ron::ser::PrettyConfig::default())
            .map_err(|e| Error::Usage(format!("manifest serialization failed: {e}")))?;
        std::fs::write(&manifest_path, pretty).map_err(|e| Error::io(&manifest_path, e))?;
        written.push(manifest_path);

        let epochs_path = out_dir.join(format!("epochs_{}.csv", record.trial_seed));
        write_epochs_csv(record, &epochs_path)?;
        written.push(epochs_path);
    }

    debug_assert_eq!(report.trials, records.len());
    let summary_path = out_dir.join("summary.txt");
    std::fs::write(&summary_path, render_table(&rows)).map_err(|e| Error::io(&summary_path, e))?;
    written.push(summary_path);
    Ok(written)
}

/// Formats metrics rows as a mean-and-spread table, one line per
/// (method, ratio) group, in first-appearance order.
pub fn render_table(rows: &[MetricsRow]) -> String {
    let mut groups: Vec<((String, u64), Vec<&MetricsRow>)> = Vec::new();
    for row in rows {
        let key = (row.method.clone(), row.ratio.to_bits());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(row),
            None => groups.push((key, vec![row])),
        }
    }

    let mut out = String::new();
    out.push_str(&format!(
        "{:<8} {:>8} {:>6}  {:>15} {:>15} {:>15} {:>15} {:>15} {:>13} {:>11}\n",
        "method", "ratio", "trials", "top1", "head", "medium", "tail", "all", "epochs", "queries"
    ));
    for ((method, ratio_bits), members) in groups {
        let ratio = f64::from_bits(ratio_bits);
        // display rounding only; grouping uses the exact value
        let ratio_text = if ratio.fract() == 0.0 {
            format!("{ratio:.0}")
        } else {
            format!("{ratio:.2}")
        };
        let cell = |get: &dyn Fn(&MetricsRow) -> Option<f64>| -> String {
            let values: Vec<f64> = members.iter().filter_map(|r| get(r)).collect();
            if values.is_empty() {
                return "na".into();
            }
            let a = aggregate(&values);
            format!("{:.4}±{:.4}", a.mean, a.std)
        };
        out.push_str(&format!(
            "{:<8} {:>8} {:>6}  {:>15} {:>15} {:>15} {:>15} {:>15} {:>13} {:>11}\n",
            method,
            ratio_text,
            members.len(),
            cell(&|r| Some(r.top1)),
            cell(&|r| r.head),
            cell(&|r| r.medium),
            cell(&|r| r.tail),
            cell(&|r| r.all),
            {
                let a = aggregate(&members.iter().map(|r| r.epochs_run as f64).collect::<Vec<_>>());
                format!("{:.1}±{:.1}", a.mean, a.std)
            },
            {
                let a = aggregate(&members.iter().map(|r| r.queries as f64).collect::<Vec<_>>());
                format!("{:.1}±{:.1}", a.mean, a.std)
            },
        ));
    }
    out
}
