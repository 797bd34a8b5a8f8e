//! Benchmark harness: relative error and convergence metrics, the Gaussian
//! blob generator, an exhaustive MSSC solver for tiny instances, and
//! campaigns that run every algorithm repeatedly and summarize the results.

pub mod blobs;
pub mod campaign;
pub mod metrics;
pub mod oracle;

pub use blobs::{gen_blobs, BlobSpec, GroundTruth};
pub use campaign::{
    default_sample_size, mark_success, run_campaign, run_seed, summarize, Algorithm, Campaign, MetricRecord,
    RunSeries,
};
pub use metrics::{baseline_convergence_time, baseline_objective, median, relative_error, sample_std, Summary};
pub use oracle::{brute_force_mssc, partition_count, PARTITION_LIMIT};
