//! Sample-based clustering with keep-the-best incumbents.
//!
//! Every worker repeatedly draws a random sample, reseeds the degenerate
//! centers of its starting point with greedy k-means++, runs Lloyd on the
//! sample and keeps the result only if it lowers the worker's incumbent sample
//! objective. Strategies differ in where a worker's starting point comes from:
//!
//! * inner: one worker, row-parallel kernels;
//! * competitive: each worker starts from its own incumbent;
//! * cooperative: each worker starts from the best incumbent published so far;
//! * hybrid: competitive first, cooperative for the rest of the budget.
//!
//! With a time limit, workers run free on their own threads. With a sample
//! budget only, workers advance in lockstep rounds: every worker reads the
//! published best at the start of a round and publications are applied in
//! worker order after the round, which makes the whole run reproducible.

mod config;
mod shared;
mod worker;

use rayon::prelude::*;

pub use config::{ClockKind, EngineConfig, PhaseSplit, Strategy};
pub use shared::{BestSnapshot, Publication, SharedBest};
pub use worker::{draw_sample, worker_rng, worker_step, Clock, StepOutcome, TraceEntry, WorkerState};

use crate::data::{Assignment, CentroidSet, Dataset, DistanceCounter, Kernel};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct WorkerSummary {
    pub id: usize,
    /// Final incumbent sample objective; infinite if nothing was accepted.
    pub objective: f64,
    pub samples_processed: u64,
    pub trace: Vec<TraceEntry>,
    pub finished_at: f64,
    pub distance_evals: u64,
}

impl WorkerSummary {
    pub fn last_update(&self) -> Option<f64> {
        self.trace.last().map(|e| e.time)
    }
}

#[derive(Clone, Debug)]
pub struct ClusteringResult {
    pub centroids: CentroidSet,
    pub best_worker: usize,
    /// Incumbent sample objective of the selected worker. Absent for
    /// algorithms that do not work on samples.
    pub sample_objective: Option<f64>,
    pub full_objective: Option<f64>,
    pub assignment: Option<Assignment>,
    /// Earliest last-incumbent-update time over all workers.
    pub clustering_time: f64,
    /// Last-update time of the worker that stopped first.
    pub first_finisher_time: f64,
    /// Wall seconds for the whole call, final assignment included.
    pub elapsed: f64,
    pub workers: Vec<WorkerSummary>,
    /// Squared-distance evaluations across seeding, Lloyd and final assignment.
    pub distance_evals: u64,
    pub publications: Vec<Publication>,
}

impl ClusteringResult {
    pub fn samples_per_worker(&self) -> Vec<u64> {
        self.workers.iter().map(|w| w.samples_processed).collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum InitSource {
    Own,
    Shared,
}

fn init_source(cfg: &EngineConfig, state: &WorkerState, clock: &Clock) -> InitSource {
    match cfg.strategy {
        Strategy::Inner | Strategy::Competitive => InitSource::Own,
        Strategy::Cooperative => InitSource::Shared,
        Strategy::Hybrid(PhaseSplit::Seconds { competitive, .. }) => {
            if clock.elapsed() < competitive {
                InitSource::Own
            } else {
                InitSource::Shared
            }
        }
        Strategy::Hybrid(PhaseSplit::Samples { competitive, .. }) => {
            if state.samples_processed < competitive {
                InitSource::Own
            } else {
                InitSource::Shared
            }
        }
    }
}

fn publishes(cfg: &EngineConfig) -> bool {
    matches!(cfg.strategy, Strategy::Cooperative | Strategy::Hybrid(_))
}

fn should_stop(cfg: &EngineConfig, state: &WorkerState, clock: &Clock) -> bool {
    cfg.max_samples.is_some_and(|n| state.samples_processed >= n)
        || cfg.time_limit.is_some_and(|t| clock.elapsed() >= t)
}

/// Runs the configured strategy on `x`.
pub fn run(x: &Dataset, cfg: &EngineConfig) -> Result<ClusteringResult> {
    cfg.validate(x.m())?;
    let clock = Clock::start(cfg.clock);
    let shared = SharedBest::new(cfg.k, x.n());
    let mut workers: Vec<WorkerState> = (0..cfg.effective_workers())
        .map(|id| WorkerState::new(id, cfg.k, x.n(), cfg.master_seed))
        .collect();

    if cfg.time_limit.is_some() {
        run_free(x, cfg, &clock, &shared, &mut workers)?;
    } else {
        run_lockstep(x, cfg, &clock, &shared, &mut workers)?;
    }

    let (best_worker, centroids) = select_best(&workers)?;
    let final_counter = DistanceCounter::new();
    let (assignment, full_objective) = if cfg.final_assignment {
        let kernel = Kernel::new(&final_counter, worker::row_parallel(cfg));
        let (a, f) = if centroids.has_degenerate() {
            log::warn!(
                "best incumbent holds {} empty cluster(s); assigning to the remaining centers",
                centroids.degenerate_count()
            );
            kernel.assign_valid(x, &centroids)?
        } else {
            kernel.assign(x, &centroids)?
        };
        (Some(a), Some(f))
    } else {
        (None, None)
    };

    let summaries: Vec<WorkerSummary> = workers
        .iter()
        .map(|w| WorkerSummary {
            id: w.id,
            objective: w.objective,
            samples_processed: w.samples_processed,
            trace: w.trace.clone(),
            finished_at: w.finished_at.unwrap_or(f64::NAN),
            distance_evals: w.counter.get(),
        })
        .collect();
    let clustering_time = summaries
        .iter()
        .filter_map(WorkerSummary::last_update)
        .fold(f64::INFINITY, f64::min);
    let first_finisher_time = summaries
        .iter()
        .min_by(|a, b| a.finished_at.total_cmp(&b.finished_at))
        .and_then(WorkerSummary::last_update)
        .unwrap_or(f64::NAN);
    let distance_evals = summaries.iter().map(|w| w.distance_evals).sum::<u64>() + final_counter.get();

    Ok(ClusteringResult {
        centroids,
        best_worker,
        sample_objective: Some(workers[best_worker].objective),
        full_objective,
        assignment,
        clustering_time,
        first_finisher_time,
        elapsed: clock.elapsed(),
        workers: summaries,
        distance_evals,
        publications: shared.history(),
    })
}

fn run_free(
    x: &Dataset,
    cfg: &EngineConfig,
    clock: &Clock,
    shared: &SharedBest,
    workers: &mut [WorkerState],
) -> Result<()> {
    let drive = |state: &mut WorkerState| -> Result<()> {
        loop {
            let init = match init_source(cfg, state, clock) {
                InitSource::Own => state.incumbent.clone(),
                InitSource::Shared => shared.snapshot().centroids.clone(),
            };
            let step = worker_step(state, x, &init, cfg, clock)?;
            if step.accepted && publishes(cfg) {
                shared.offer(state.id, state.objective, &state.incumbent);
            }
            if should_stop(cfg, state, clock) {
                state.finished_at = Some(clock.stamp(&state.counter));
                return Ok(());
            }
        }
    };
    if let [only] = workers {
        return drive(only);
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = workers
            .iter_mut()
            .map(|state| scope.spawn(|| drive(state)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect::<Result<()>>()
    })
}

fn run_lockstep(
    x: &Dataset,
    cfg: &EngineConfig,
    clock: &Clock,
    shared: &SharedBest,
    workers: &mut [WorkerState],
) -> Result<()> {
    let rounds = cfg.max_samples.expect("sample budget without time limit");
    for _ in 0..rounds {
        let snapshot = shared.snapshot();
        let steps = workers
            .par_iter_mut()
            .map(|state| {
                let init = match init_source(cfg, state, clock) {
                    InitSource::Own => state.incumbent.clone(),
                    InitSource::Shared => snapshot.centroids.clone(),
                };
                worker_step(state, x, &init, cfg, clock)
            })
            .collect::<Result<Vec<_>>>()?;
        if publishes(cfg) {
            for (state, step) in workers.iter().zip(&steps) {
                if step.accepted {
                    shared.offer(state.id, state.objective, &state.incumbent);
                }
            }
        }
    }
    for state in workers.iter_mut() {
        state.finished_at = Some(clock.stamp(&state.counter));
    }
    Ok(())
}

/// Index of the smallest finite value; ties go to the lowest index.
fn argmin_finite(objectives: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, f) in objectives.into_iter().enumerate() {
        if f.is_finite() && best.is_none_or(|(_, b)| f < b) {
            best = Some((i, f));
        }
    }
    best.map(|(i, _)| i)
}

/// The worker with the lowest incumbent sample objective and its centroids.
pub fn select_best(workers: &[WorkerState]) -> Result<(usize, CentroidSet)> {
    let pos = argmin_finite(workers.iter().map(|w| w.objective)).ok_or(Error::NoSolution)?;
    Ok((workers[pos].id, workers[pos].incumbent.clone()))
}

/// Assigns the full dataset to `centroids` and returns the objective.
pub fn final_assignment(
    x: &Dataset,
    centroids: &CentroidSet,
    kernel: &Kernel<'_>,
) -> Result<(Assignment, f64)> {
    kernel.assign(x, centroids)
}
