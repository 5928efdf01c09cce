#ifndef FLEXSAMPLE_H
#define FLEXSAMPLE_H

/* Generated by cbindgen from the flexsample-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Outcome of a C-ABI call. Nonzero values are errors; the per-thread
// message from `flex_last_error_message` carries the details.
typedef enum FlexStatus {
  FLEX_STATUS_OK = 0,
  // A required pointer argument was null.
  FLEX_STATUS_NULL_POINTER = 1,
  // A string argument was not valid UTF-8.
  FLEX_STATUS_INVALID_UTF8 = 2,
  // A configuration value violates its contract.
  FLEX_STATUS_INVALID_CONFIG = 3,
  // A runtime input violates a precondition.
  FLEX_STATUS_INVALID_INPUT = 4,
  // The API was called in an unsupported way.
  FLEX_STATUS_USAGE = 5,
  // A numerical problem surfaced mid-computation.
  FLEX_STATUS_NUMERIC = 6,
  // A data file could not be parsed.
  FLEX_STATUS_INGEST = 7,
  // A filesystem operation failed.
  FLEX_STATUS_IO = 8,
  // An internal panic was caught at the boundary.
  FLEX_STATUS_PANIC = 9,
} FlexStatus;

// Opaque handle to an id-addressed sample collection.
typedef struct FlexDataset FlexDataset;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string; never null, never
// freed by the caller.
const char *flex_version(void);

// Copies the calling thread's last error message (NUL-terminated) into
// `buffer` and returns the full message size in bytes including the NUL.
// Call with a null buffer or zero capacity to query the required size; a
// too-small buffer receives a truncated but still NUL-terminated copy.
//
// # Safety
// `buffer`, when non-null, must point to `capacity` writable bytes.
size_t flex_last_error_message(char *buffer, size_t capacity);

// Long-tailed class sizes: `out_counts[c] = round(head_count *
// imbalance_ratio^(-c/(num_classes-1)))` with exact endpoints and a floor
// of one sample.
//
// # Safety
// `out_counts` must point to `num_classes` writable elements.
enum FlexStatus flex_pareto_counts(size_t num_classes,
                                   double imbalance_ratio,
                                   size_t head_count,
                                   size_t *out_counts);

// Difficulty-normalized sampling priorities from per-class accuracies in
// `[0, 1]`; the outputs are non-negative and sum to `num_classes`.
//
// # Safety
// Both pointers must cover `num_classes` elements; `out_probabilities`
// must be writable.
enum FlexStatus flex_class_probabilities(const double *accuracies,
                                         size_t num_classes,
                                         double *out_probabilities);

// Disagreement between stochastic predictions: entropy of the mean
// distribution minus the mean entropy. `draws` is row-major with
// `num_draws` rows of `num_classes` probabilities, each row summing to 1.
//
// # Safety
// `draws` must cover `num_draws * num_classes` elements;
// `out_information` must be writable.
enum FlexStatus flex_bald_mutual_information(const double *draws,
                                             size_t num_draws,
                                             size_t num_classes,
                                             double *out_information);

// Per-class loss weights proportional to `1 / count`, rescaled to mean 1.
//
// # Safety
// Both pointers must cover `num_classes` elements; `out_weights` must be
// writable.
enum FlexStatus flex_inverse_frequency_weights(const size_t *class_counts,
                                               size_t num_classes,
                                               double *out_weights);

// Per-class loss weights proportional to the inverse effective sample
// number `(1 - beta^n) / (1 - beta)`, rescaled to mean 1.
//
// # Safety
// Both pointers must cover `num_classes` elements; `out_weights` must be
// writable.
enum FlexStatus flex_effective_number_weights(const size_t *class_counts,
                                              size_t num_classes,
                                              double beta,
                                              double *out_weights);

// Loads a dataset from `id,label,f1,...,fd` CSV. On success the handle in
// `out_dataset` is owned by the caller and must be released with
// `flex_dataset_free`.
//
// # Safety
// `path` must be a NUL-terminated string; `out_dataset` must be writable.
enum FlexStatus flex_dataset_from_csv(const char *path, struct FlexDataset **out_dataset);

// Generates the default synthetic long-tailed benchmark (8 classes, head
// count 1000, 32 features, diverse head and compact tails) with the given
// imbalance ratio and seed. Release the handle with `flex_dataset_free`.
//
// # Safety
// `out_dataset` must be writable.
enum FlexStatus flex_dataset_generate_default(double imbalance_ratio,
                                              uint64_t seed,
                                              struct FlexDataset **out_dataset);

// Number of samples; 0 for a null handle.
//
// # Safety
// `dataset` must be null or a live handle.
size_t flex_dataset_len(const struct FlexDataset *dataset);

// Number of classes; 0 for a null handle.
//
// # Safety
// `dataset` must be null or a live handle.
size_t flex_dataset_num_classes(const struct FlexDataset *dataset);

// Writes the per-class sample counts into `out_counts`.
//
// # Safety
// `dataset` must be a live handle; `out_counts` must cover
// `flex_dataset_num_classes(dataset)` writable elements.
enum FlexStatus flex_dataset_class_counts(const struct FlexDataset *dataset, size_t *out_counts);

// Writes the dataset as `id,label,f1,...,fd` CSV, the format
// `flex_dataset_from_csv` reads.
//
// # Safety
// `dataset` must be a live handle; `path` must be a NUL-terminated string.
enum FlexStatus flex_dataset_export_csv(const struct FlexDataset *dataset, const char *path);

// Releases a dataset handle. Null is a no-op; passing the same handle
// twice is undefined behavior.
//
// # Safety
// `dataset` must be null or a handle not yet freed.
void flex_dataset_free(struct FlexDataset *dataset);

// Parses an experiment config from TOML text, runs every trial, writes
// `metrics.csv` plus per-trial manifests into `out_dir`, and stores the
// cross-trial mean test top-1 accuracy in `out_mean_top1` (which may be
// null if the caller only wants the files).
//
// # Safety
// `config_toml` and `out_dir` must be NUL-terminated strings;
// `out_mean_top1` must be null or writable.
enum FlexStatus flex_run_experiment_toml(const char *config_toml,
                                         const char *out_dir,
                                         double *out_mean_top1);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLEXSAMPLE_H */
