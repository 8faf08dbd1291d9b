//! Random streams, statistics and run bookkeeping shared by the other modules.

pub mod manifest;
pub mod rng;
pub mod stats;

pub use manifest::RunManifest;
pub use rng::{normal_quantile, substream, substream_for, NormalStream, StreamPurpose};
pub use stats::{loglog_fit, moments, paired_stats, pairwise_sum, LogLogFit, Moments, PairedStats};
