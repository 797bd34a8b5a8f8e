//! Parallel minimum sum-of-squares clustering on random samples.
//!
//! The [`engine`] runs the sample-based keep-the-best search in four parallel
//! regimes. [`baselines`] holds Forgy K-means and PBK-BDC for comparison, and
//! [`bench`] the metrics, blob generator and exhaustive oracle used to
//! evaluate them.

pub mod baselines;
pub mod bench;
pub mod data;
pub mod engine;
pub mod error;
pub mod io;
pub mod lloyd;
pub mod seeding;

pub use data::{
    assign_nearest, minmax_normalize, mssc_objective, squared_distance, Assignment, CentroidSet,
    Dataset, DistanceCounter, Kernel,
};
pub use engine::{run, ClusteringResult, EngineConfig, PhaseSplit, Strategy};
pub use error::{Error, Result};
