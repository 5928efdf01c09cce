//! C ABI over the flexsample library.
//!
//! Conventions:
//! - Every fallible call returns a [`FlexStatus`]; `0` is success. On any
//!   failure the calling thread's error message is replaced; fetch it with
//!   [`flex_last_error_message`].
//! - Out-parameters are written only on success.
//! - [`FlexDataset`] is an opaque handle: create it with one of the
//!   constructors, read it through the accessors, release it exactly once
//!   with [`flex_dataset_free`]. Handles are immutable after construction
//!   and safe to read from several threads.
//! - Panics never cross the boundary; they surface as `FLEX_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use flexsample::baselines::{class_balanced_weights, inverse_frequency_weights};
use flexsample::curriculum::{bald_mutual_information, class_probs_from_accuracy};
use flexsample::data::{export_csv, generate_dataset, ingest_csv, pareto_counts, Dataset};
use flexsample::harness::{aggregate_trials, emit_report, run_experiment, ExperimentConfig};
use flexsample::Error;

/// Outcome of a C-ABI call. Nonzero values are errors; the per-thread
/// message from `flex_last_error_message` carries the details.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlexStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// A configuration value violates its contract.
    InvalidConfig = 3,
    /// A runtime input violates a precondition.
    InvalidInput = 4,
    /// The API was called in an unsupported way.
    Usage = 5,
    /// A numerical problem surfaced mid-computation.
    Numeric = 6,
    /// A data file could not be parsed.
    Ingest = 7,
    /// A filesystem operation failed.
    Io = 8,
    /// An internal panic was caught at the boundary.
    Panic = 9,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("interior NULs removed");
    });
}

fn fail(err: &Error) -> FlexStatus {
    set_error(&err.to_string());
    match err {
        Error::Config(_) => FlexStatus::InvalidConfig,
        Error::Input(_) => FlexStatus::InvalidInput,
        Error::Usage(_) => FlexStatus::Usage,
        Error::Numeric(_) => FlexStatus::Numeric,
        Error::Ingest { .. } => FlexStatus::Ingest,
        Error::Io { .. } => FlexStatus::Io,
    }
}

fn null_arg(name: &str) -> FlexStatus {
    set_error(&format!("{name} must not be null"));
    FlexStatus::NullPointer
}

/// Runs the body with a panic guard so unwinding never crosses into C.
fn guarded(body: impl FnOnce() -> FlexStatus) -> FlexStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic caught at the C boundary");
            FlexStatus::Panic
        }
    }
}

unsafe fn utf8_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, FlexStatus> {
    if ptr.is_null() {
        return Err(null_arg(name));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(&format!("{name} is not valid UTF-8"));
        FlexStatus::InvalidUtf8
    })
}

/// Library version as a static NUL-terminated string; never null, never
/// freed by the caller.
#[no_mangle]
pub extern "C" fn flex_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the calling thread's last error message (NUL-terminated) into
/// `buffer` and returns the full message size in bytes including the NUL.
/// Call with a null buffer or zero capacity to query the required size; a
/// too-small buffer receives a truncated but still NUL-terminated copy.
///
/// # Safety
/// `buffer`, when non-null, must point to `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn flex_last_error_message(buffer: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes_with_nul();
        if !buffer.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity);
            slice::from_raw_parts_mut(buffer as *mut u8, n).copy_from_slice(&bytes[..n]);
            *buffer.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Long-tailed class sizes: `out_counts[c] = round(head_count *
/// imbalance_ratio^(-c/(num_classes-1)))` with exact endpoints and a floor
/// of one sample.
///
/// # Safety
/// `out_counts` must point to `num_classes` writable elements.
#[no_mangle]
pub unsafe extern "C" fn flex_pareto_counts(
    num_classes: usize,
    imbalance_ratio: f64,
    head_count: usize,
    out_counts: *mut usize,
) -> FlexStatus {
    guarded(|| {
        if out_counts.is_null() {
            return null_arg("out_counts");
        }
        match pareto_counts(num_classes, imbalance_ratio, head_count) {
            Ok(counts) => {
                slice::from_raw_parts_mut(out_counts, num_classes).copy_from_slice(&counts);
                FlexStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Difficulty-normalized sampling priorities from per-class accuracies in
/// `[0, 1]`; the outputs are non-negative and sum to `num_classes`.
///
/// # Safety
/// Both pointers must cover `num_classes` elements; `out_probabilities`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn flex_class_probabilities(
    accuracies: *const f64,
    num_classes: usize,
    out_probabilities: *mut f64,
) -> FlexStatus {
    guarded(|| {
        if accuracies.is_null() {
            return null_arg("accuracies");
        }
        if out_probabilities.is_null() {
            return null_arg("out_probabilities");
        }
        let accuracies = slice::from_raw_parts(accuracies, num_classes);
        match class_probs_from_accuracy(accuracies) {
            Ok(probs) => {
                slice::from_raw_parts_mut(out_probabilities, num_classes)
                    .copy_from_slice(&probs.normalized);
                FlexStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Disagreement between stochastic predictions: entropy of the mean
/// distribution minus the mean entropy. `draws` is row-major with
/// `num_draws` rows of `num_classes` probabilities, each row summing to 1.
///
/// # Safety
/// `draws` must cover `num_draws * num_classes` elements;
/// `out_information` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flex_bald_mutual_information(
    draws: *const f64,
    num_draws: usize,
    num_classes: usize,
    out_information: *mut f64,
) -> FlexStatus {
    guarded(|| {
        if draws.is_null() {
            return null_arg("draws");
        }
        if out_information.is_null() {
            return null_arg("out_information");
        }
        let flat = slice::from_raw_parts(draws, num_draws * num_classes);
        let rows: Vec<Vec<f64>> = flat.chunks(num_classes).map(|c| c.to_vec()).collect();
        match bald_mutual_information(&rows) {
            Ok(information) => {
                *out_information = information;
                FlexStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Per-class loss weights proportional to `1 / count`, rescaled to mean 1.
///
/// # Safety
/// Both pointers must cover `num_classes` elements; `out_weights` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn flex_inverse_frequency_weights(
    class_counts: *const usize,
    num_classes: usize,
    out_weights: *mut f64,
) -> FlexStatus {
    guarded(|| {
        if class_counts.is_null() {
            return null_arg("class_counts");
        }
        if out_weights.is_null() {
            return null_arg("out_weights");
        }
        let counts = slice::from_raw_parts(class_counts, num_classes);
        match inverse_frequency_weights(counts) {
            Ok(weights) => {
                slice::from_raw_parts_mut(out_weights, num_classes).copy_from_slice(&weights);
                FlexStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Per-class loss weights proportional to the inverse effective sample
/// number `(1 - beta^n) / (1 - beta)`, rescaled to mean 1.
///
/// # Safety
/// Both pointers must cover `num_classes` elements; `out_weights` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn flex_effective_number_weights(
    class_counts: *const usize,
    num_classes: usize,
    beta: f64,
    out_weights: *mut f64,
) -> FlexStatus {
    guarded(|| {
        if class_counts.is_null() {
            return null_arg("class_counts");
        }
        if out_weights.is_null() {
            return null_arg("out_weights");
        }
        let counts = slice::from_raw_parts(class_counts, num_classes);
        match class_balanced_weights(counts, beta) {
            Ok(weights) => {
                slice::from_raw_parts_mut(out_weights, num_classes).copy_from_slice(&weights);
                FlexStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Opaque handle to an id-addressed sample collection.
pub struct FlexDataset {
    inner: Dataset,
}

unsafe fn dataset_ref<'a>(ptr: *const FlexDataset) -> Option<&'a Dataset> {
    ptr.as_ref().map(|d| &d.inner)
}

/// Loads a dataset from `id,label,f1,...,fd` CSV. On success the handle in
/// `out_dataset` is owned by the caller and must be released with
/// `flex_dataset_free`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out_dataset` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flex_dataset_from_csv(
    path: *const c_char,
    out_dataset: *mut *mut FlexDataset,
) -> FlexStatus {
    guarded(|| {
        if out_dataset.is_null() {
            return null_arg("out_dataset");
        }
        let path = match utf8_arg(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        match ingest_csv(path) {
            Ok(inner) => {
                *out_dataset = Box::into_raw(Box::new(FlexDataset { inner }));
                FlexStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Generates the default synthetic long-tailed benchmark (8 classes, head
/// count 1000, 32 features, diverse head and compact tails) with the given
/// imbalance ratio and seed. Release the handle with `flex_dataset_free`.
///
/// # Safety
/// `out_dataset` must be writable.
#[no_mangle]
pub unsafe extern "C" fn flex_dataset_generate_default(
    imbalance_ratio: f64,
    seed: u64,
    out_dataset: *mut *mut FlexDataset,
) -> FlexStatus {
    guarded(|| {
        if out_dataset.is_null() {
            return null_arg("out_dataset");
        }
        let mut spec = ExperimentConfig::default().dataset;
        spec.imbalance_ratio = imbalance_ratio;
        spec.seed = seed;
        let built = spec.to_dataset_config().and_then(|c| generate_dataset(&c));
        match built {
            Ok(inner) => {
                *out_dataset = Box::into_raw(Box::new(FlexDataset { inner }));
                FlexStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn flex_dataset_len(dataset: *const FlexDataset) -> usize {
    dataset_ref(dataset).map_or(0, |d| d.len())
}

/// Number of classes; 0 for a null handle.
///
/// # Safety
/// `dataset` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn flex_dataset_num_classes(dataset: *const FlexDataset) -> usize {
    dataset_ref(dataset).map_or(0, |d| d.num_classes())
}

/// Writes the per-class sample counts into `out_counts`.
///
/// # Safety
/// `dataset` must be a live handle; `out_counts` must cover
/// `flex_dataset_num_classes(dataset)` writable elements.
#[no_mangle]
pub unsafe extern "C" fn flex_dataset_class_counts(
    dataset: *const FlexDataset,
    out_counts: *mut usize,
) -> FlexStatus {
    guarded(|| {
        let Some(dataset) = dataset_ref(dataset) else {
            return null_arg("dataset");
        };
        if out_counts.is_null() {
            return null_arg("out_counts");
        }
        let counts = dataset.class_counts();
        slice::from_raw_parts_mut(out_counts, counts.len()).copy_from_slice(&counts);
        FlexStatus::Ok
    })
}

/// Writes the dataset as `id,label,f1,...,fd` CSV, the format
/// `flex_dataset_from_csv` reads.
///
/// # Safety
/// `dataset` must be a live handle; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn flex_dataset_export_csv(
    dataset: *const FlexDataset,
    path: *const c_char,
) -> FlexStatus {
    guarded(|| {
        let Some(dataset) = dataset_ref(dataset) else {
            return null_arg("dataset");
        };
        let path = match utf8_arg(path, "path") {
            Ok(p) => p,
            Err(status) => return status,
        };
        match export_csv(dataset, path) {
            Ok(()) => FlexStatus::Ok,
            Err(e) => fail(&e),
        }
    })
}

/// Releases a dataset handle. Null is a no-op; passing the same handle
/// twice is undefined behavior.
///
/// # Safety
/// `dataset` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn flex_dataset_free(dataset: *mut FlexDataset) {
    if !dataset.is_null() {
        drop(Box::from_raw(dataset));
    }
}

/// Parses an experiment config from TOML text, runs every trial, writes
/// `metrics.csv` plus per-trial manifests into `out_dir`, and stores the
/// cross-trial mean test top-1 accuracy in `out_mean_top1` (which may be
/// null if the caller only wants the files).
///
/// # Safety
/// `config_toml` and `out_dir` must be NUL-terminated strings;
/// `out_mean_top1` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn flex_run_experiment_toml(
    config_toml: *const c_char,
    out_dir: *const c_char,
    out_mean_top1: *mut f64,
) -> FlexStatus {
    guarded(|| {
        let config_toml = match utf8_arg(config_toml, "config_toml") {
            Ok(t) => t,
            Err(status) => return status,
        };
        let out_dir = match utf8_arg(out_dir, "out_dir") {
            Ok(d) => d,
            Err(status) => return status,
        };
        let run = || -> Result<f64, Error> {
            let config: ExperimentConfig = toml::from_str(config_toml)
                .map_err(|e| Error::Config(format!("config TOML: {e}")))?;
            config.validate()?;
            let records = run_experiment(&config)?;
            let report = aggregate_trials(&records)?;
            emit_report(&report, &records, out_dir)?;
            Ok(report.top1.mean)
        };
        match run() {
            Ok(mean) => {
                if !out_mean_top1.is_null() {
                    *out_mean_top1 = mean;
                }
                FlexStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}
