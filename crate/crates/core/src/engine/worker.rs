use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ClockKind, EngineConfig, Strategy};
use crate::data::{CentroidSet, Dataset, DistanceCounter, Kernel};
use crate::error::{Error, Result};
use crate::lloyd::{kmeans_valid, LloydConfig};
use crate::seeding::reinit_degenerate;

/// Independent random stream for worker `id`; adding workers never perturbs
/// the streams of existing ones.
pub fn worker_rng(master_seed: u64, id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(id as u64);
    rng
}

/// `s` distinct rows of `x`, uniformly without replacement.
pub fn draw_sample<R: Rng + ?Sized>(x: &Dataset, s: usize, rng: &mut R) -> Result<Dataset> {
    if s == 0 || s > x.m() {
        return Err(Error::config(format!(
            "sample size {s} must lie in [1, {}]",
            x.m()
        )));
    }
    let rows = index::sample(rng, x.m(), s).into_vec();
    x.select(&rows)
}

#[derive(Clone, Copy, Debug)]
pub struct Clock {
    kind: ClockKind,
    start: Instant,
}

impl Clock {
    pub fn start(kind: ClockKind) -> Self {
        Self {
            kind,
            start: Instant::now(),
        }
    }

    pub fn kind(&self) -> ClockKind {
        self.kind
    }

    /// Wall seconds since the run began; drives time budgets.
    pub fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    /// Telemetry timestamp for a worker whose own evaluation count is `counter`.
    pub fn stamp(&self, counter: &DistanceCounter) -> f64 {
        match self.kind {
            ClockKind::Wall => self.elapsed(),
            ClockKind::Work => counter.get() as f64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEntry {
    pub time: f64,
    pub objective: f64,
}

/// One worker's incumbent and bookkeeping.
#[derive(Debug)]
pub struct WorkerState {
    pub id: usize,
    pub incumbent: CentroidSet,
    /// Sample objective of the incumbent; infinite until the first acceptance.
    pub objective: f64,
    pub samples_processed: u64,
    /// Accepted incumbents, in order.
    pub trace: Vec<TraceEntry>,
    /// Clock reading when the worker stopped.
    pub finished_at: Option<f64>,
    pub counter: DistanceCounter,
    pub(crate) rng: ChaCha8Rng,
}

impl WorkerState {
    pub fn new(id: usize, k: usize, n: usize, master_seed: u64) -> Self {
        Self {
            id,
            incumbent: CentroidSet::degenerate(k, n),
            objective: f64::INFINITY,
            samples_processed: 0,
            trace: Vec::new(),
            finished_at: None,
            counter: DistanceCounter::new(),
            rng: worker_rng(master_seed, id),
        }
    }

    pub fn last_update(&self) -> Option<f64> {
        self.trace.last().map(|e| e.time)
    }
}

/// Outcome of one worker step.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub sample_objective: f64,
    pub accepted: bool,
}

/// Processes one sample: draw it, reseed the degenerate centers of `init`,
/// run Lloyd, and keep the result iff it strictly beats the incumbent.
pub fn worker_step(
    state: &mut WorkerState,
    x: &Dataset,
    init: &CentroidSet,
    cfg: &EngineConfig,
    clock: &Clock,
) -> Result<StepOutcome> {
    let parallel = row_parallel(cfg);
    let kernel = Kernel::new(&state.counter, parallel);
    let sample = draw_sample(x, cfg.sample_size, &mut state.rng)?;
    let seeded = reinit_degenerate(init, &sample, &cfg.seeding, &mut state.rng, &kernel)?;
    let lloyd = LloydConfig {
        parallel_rows: parallel,
        ..cfg.lloyd
    };
    let out = kmeans_valid(&sample, &seeded, &lloyd, &state.counter)?;
    let (centroids, objective) = (out.centroids, out.objective);
    state.samples_processed += 1;

    let accepted = objective < state.objective;
    if accepted {
        debug_assert!(objective < state.objective, "incumbent must strictly improve");
        state.incumbent = centroids;
        state.objective = objective;
        let time = clock.stamp(&state.counter);
        if let Some(prev) = state.last_update() {
            debug_assert!(time >= prev, "trace timestamps go backwards");
        }
        state.trace.push(TraceEntry { time, objective });
    }
    Ok(StepOutcome {
        sample_objective: objective,
        accepted,
    })
}

pub(crate) fn row_parallel(cfg: &EngineConfig) -> bool {
    matches!(cfg.strategy, Strategy::Inner) || cfg.lloyd.parallel_rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::config::Strategy;

    fn line(xs: &[f64]) -> Dataset {
        Dataset::new(xs.to_vec(), 1).unwrap()
    }

    fn six() -> Dataset {
        line(&[0.0, 1.0, 2.0, 10.0, 11.0, 12.0])
    }

    fn cfg(k: usize, s: usize) -> EngineConfig {
        let mut cfg = EngineConfig::new(k, s, Strategy::Competitive);
        cfg.max_samples = Some(1);
        cfg
    }

    #[test]
    fn sample_of_full_size_is_a_permutation() {
        let x = six();
        let mut rng = worker_rng(1, 0);
        let s = draw_sample(&x, 6, &mut rng).unwrap();
        let mut vals: Vec<f64> = s.as_slice().to_vec();
        vals.sort_by(f64::total_cmp);
        assert_eq!(vals, x.as_slice());
    }

    #[test]
    fn sample_of_one_is_a_row() {
        let x = six();
        let mut rng = worker_rng(1, 0);
        let s = draw_sample(&x, 1, &mut rng).unwrap();
        assert_eq!(s.m(), 1);
        assert!(x.as_slice().contains(&s.row(0)[0]));
    }

    #[test]
    fn sampling_is_deterministic_per_stream() {
        let x = Dataset::new((0..100).map(f64::from).collect(), 1).unwrap();
        let mut a = worker_rng(9, 3);
        let first = draw_sample(&x, 10, &mut a).unwrap();
        let second = draw_sample(&x, 10, &mut a).unwrap();
        assert_ne!(first, second);
        let mut b = worker_rng(9, 3);
        assert_eq!(draw_sample(&x, 10, &mut b).unwrap(), first);
        let mut other = worker_rng(9, 4);
        assert_ne!(draw_sample(&x, 10, &mut other).unwrap(), first);
    }

    #[test]
    fn oversized_sample_is_a_config_error() {
        let mut rng = worker_rng(0, 0);
        assert!(matches!(draw_sample(&six(), 7, &mut rng), Err(Error::Config(_))));
        assert!(matches!(draw_sample(&six(), 0, &mut rng), Err(Error::Config(_))));
    }

    #[test]
    fn first_step_is_always_accepted() {
        let x = six();
        let cfg = cfg(2, 6);
        let clock = Clock::start(ClockKind::Work);
        let mut state = WorkerState::new(0, 2, 1, 11);
        let init = state.incumbent.clone();
        let out = worker_step(&mut state, &x, &init, &cfg, &clock).unwrap();
        assert!(out.accepted);
        assert_eq!(state.samples_processed, 1);
        assert_eq!(state.trace.len(), 1);
        assert_eq!(state.objective, out.sample_objective);
    }

    #[test]
    fn non_improving_step_keeps_incumbent() {
        let x = six();
        let cfg = cfg(2, 6);
        let clock = Clock::start(ClockKind::Work);
        let mut state = WorkerState::new(0, 2, 1, 11);
        let optimum = CentroidSet::from_rows(&[[1.0], [11.0]]).unwrap();
        state.incumbent = optimum.clone();
        state.objective = 4.0;
        // starting from the optimum, Lloyd returns objective 4 again: not < 4
        let out = worker_step(&mut state, &x, &optimum, &cfg, &clock).unwrap();
        assert!(!out.accepted);
        assert_eq!(out.sample_objective, 4.0);
        assert!(state.trace.is_empty());
        assert!(state.incumbent.bitwise_eq(&optimum));
        assert_eq!(state.samples_processed, 1);
    }

    #[test]
    fn repeated_steps_reach_global_optimum() {
        // global optimum for k = 2 on this line is 4 (brute force in bench::oracle)
        let x = six();
        let cfg = cfg(2, 6);
        let clock = Clock::start(ClockKind::Work);
        for seed in 0..20 {
            let mut state = WorkerState::new(0, 2, 1, seed);
            for _ in 0..5 {
                let init = state.incumbent.clone();
                worker_step(&mut state, &x, &init, &cfg, &clock).unwrap();
            }
            assert_eq!(state.objective, 4.0);
            for w in state.trace.windows(2) {
                assert!(w[1].objective < w[0].objective);
                assert!(w[1].time > w[0].time);
            }
        }
    }

    #[test]
    fn sample_without_enough_distinct_rows_leaves_degenerate() {
        let x = line(&[5.0, 5.0, 5.0, 5.0]);
        let cfg = cfg(3, 4);
        let clock = Clock::start(ClockKind::Work);
        let mut state = WorkerState::new(0, 3, 1, 1);
        let init = state.incumbent.clone();
        let out = worker_step(&mut state, &x, &init, &cfg, &clock).unwrap();
        assert!(out.accepted);
        assert_eq!(out.sample_objective, 0.0);
        assert_eq!(state.incumbent.degenerate_count(), 2);
    }
}
