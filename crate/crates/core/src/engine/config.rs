use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lloyd::LloydConfig;
use crate::seeding::SeedConfig;

/// Split of the hybrid budget between the competitive and cooperative phases,
/// in the same unit as the stop condition that governs the run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhaseSplit {
    Seconds { competitive: f64, cooperative: f64 },
    Samples { competitive: u64, cooperative: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Strategy {
    /// One worker, row-parallel distance kernels.
    Inner,
    /// Independent workers, best incumbent picked at the end.
    Competitive,
    /// Every sample starts from the best incumbent published by any worker.
    Cooperative,
    /// Competitive phase followed by a cooperative phase.
    Hybrid(PhaseSplit),
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Inner => "inner",
            Strategy::Competitive => "competitive",
            Strategy::Cooperative => "cooperative",
            Strategy::Hybrid(_) => "hybrid",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// What the telemetry timestamps measure.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ClockKind {
    /// Seconds since the run started.
    #[default]
    Wall,
    /// Distance evaluations performed by the worker so far. Reproducible.
    Work,
}

impl FromStr for ClockKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wall" => Ok(ClockKind::Wall),
            "work" => Ok(ClockKind::Work),
            other => Err(Error::config(format!("unknown clock {other:?} (expected wall or work)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EngineConfig {
    pub k: usize,
    pub sample_size: usize,
    pub workers: usize,
    /// Wall-clock budget per worker, in seconds.
    pub time_limit: Option<f64>,
    /// Sample budget per worker.
    pub max_samples: Option<u64>,
    pub strategy: Strategy,
    pub master_seed: u64,
    pub lloyd: LloydConfig,
    pub seeding: SeedConfig,
    pub clock: ClockKind,
    /// Assign the full dataset to the final centroids.
    pub final_assignment: bool,
}

impl EngineConfig {
    pub fn new(k: usize, sample_size: usize, strategy: Strategy) -> Self {
        Self {
            k,
            sample_size,
            workers: 8,
            time_limit: None,
            max_samples: None,
            strategy,
            master_seed: 0,
            lloyd: LloydConfig::default(),
            seeding: SeedConfig::default(),
            clock: ClockKind::Wall,
            final_assignment: true,
        }
    }

    /// Workers that actually run: inner always uses a single one.
    pub fn effective_workers(&self) -> usize {
        match self.strategy {
            Strategy::Inner => 1,
            _ => self.workers,
        }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::config("k must be at least 1"));
        }
        if self.sample_size == 0 || self.sample_size > m {
            return Err(Error::config(format!(
                "sample size {} must lie in [1, {m}]",
                self.sample_size
            )));
        }
        if self.workers == 0 {
            return Err(Error::config("at least one worker is required"));
        }
        if let Some(t) = self.time_limit {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::config("time limit must be a positive number of seconds"));
            }
        }
        if self.max_samples == Some(0) {
            return Err(Error::config("max samples must be at least 1"));
        }
        if self.time_limit.is_none() && self.max_samples.is_none() {
            return Err(Error::config("either a time limit or a sample budget is required"));
        }
        self.lloyd.validate()?;
        self.seeding.validate()?;
        if let Strategy::Hybrid(split) = self.strategy {
            match split {
                PhaseSplit::Seconds {
                    competitive,
                    cooperative,
                } => {
                    let total = self
                        .time_limit
                        .ok_or_else(|| Error::config("a split in seconds needs a time limit"))?;
                    if !(competitive >= 0.0 && cooperative >= 0.0) {
                        return Err(Error::config("hybrid phase durations must be non-negative"));
                    }
                    if (competitive + cooperative - total).abs() > 1e-9 * total.max(1.0) {
                        return Err(Error::config(format!(
                            "hybrid phases {competitive} + {cooperative} must add up to the time limit {total}"
                        )));
                    }
                }
                PhaseSplit::Samples {
                    competitive,
                    cooperative,
                } => {
                    let total = self
                        .max_samples
                        .ok_or_else(|| Error::config("a split in samples needs a sample budget"))?;
                    if competitive + cooperative != total {
                        return Err(Error::config(format!(
                            "hybrid phases {competitive} + {cooperative} must add up to the sample budget {total}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}
