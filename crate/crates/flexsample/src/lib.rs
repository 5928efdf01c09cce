//! Curriculum-driven flexible sampling for long-tailed classification.
//!
//! The crate trains small dense networks on synthetic (or ingested) long-tailed
//! vector datasets and compares class-balancing strategies against a
//! curriculum pipeline: contrastive pretraining of an encoder, prototype-based
//! anchor selection at a reduced imbalance ratio, a cross-entropy warm-up on
//! the anchor subset, and difficulty-aware querying of new instances from the
//! unsampled pool ranked by mutual-information uncertainty.
//!
//! Modules:
//! - [`net`]: dense network substrate (manual forward/backward, Adam, losses)
//! - [`data`]: long-tailed synthetic data, splits, CSV ingestion/export
//! - [`ssl`]: contrastive encoder pretraining
//! - [`proto`]: class prototypes and anchor-subset selection
//! - [`curriculum`]: difficulty probabilities, uncertainty, query state machine
//! - [`baselines`]: re-sampling and re-weighting baselines
//! - [`harness`]: experiment orchestration, metrics, reports

pub mod baselines;
pub mod curriculum;
pub mod data;
pub mod error;
pub mod harness;
pub mod net;
pub mod proto;
pub mod ssl;

pub use error::{Error, Result};

/// Derives a named sub-seed from a base seed, splitmix64-style. Every
/// stochastic stage owns a distinct stream so stages stay independent and
/// reproducible.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(base ^ mix(stream))
}
