//! Lloyd iterations on a sample.

use rayon::prelude::*;

use crate::data::{partition_rows, Assignment, CentroidSet, Dataset, DistanceCounter, Kernel};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LloydConfig {
    pub max_iters: usize,
    /// Stop once `(f_prev − f_cur) / f_prev` drops below this.
    pub rel_tol: f64,
    pub parallel_rows: bool,
}

impl Default for LloydConfig {
    fn default() -> Self {
        Self {
            max_iters: 300,
            rel_tol: 1e-4,
            parallel_rows: false,
        }
    }
}

impl LloydConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::config("max_iters must be at least 1"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::config("rel_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convergence {
    Tolerance,
    MaxIters,
    FixedPoint,
}

#[derive(Clone, Debug)]
pub struct LloydOutcome {
    /// Empty clusters at termination are flagged degenerate.
    pub centroids: CentroidSet,
    pub assignment: Assignment,
    /// Objective on the input sample.
    pub objective: f64,
    pub iterations: usize,
    pub converged_by: Convergence,
    /// Objective of every accepted centroid set, starting with the initial one.
    pub trace: Vec<f64>,
}

/// Runs Lloyd's algorithm on `sample` starting from `init`.
pub fn kmeans(
    sample: &Dataset,
    init: &CentroidSet,
    cfg: &LloydConfig,
    counter: &DistanceCounter,
) -> Result<LloydOutcome> {
    cfg.validate()?;
    let kernel = Kernel::new(counter, cfg.parallel_rows);
    let (mut assignment, mut objective) = kernel.assign(sample, init)?;
    let mut centroids = init.clone();
    let mut trace = vec![objective];
    let mut iterations = 0;

    let converged_by = loop {
        iterations += 1;
        let next = step_centroids(sample, &assignment, &centroids, cfg.parallel_rows);
        if next.bitwise_eq(&centroids) {
            break Convergence::FixedPoint;
        }
        let (next_assignment, next_objective) = kernel.assign(sample, &next)?;
        debug_assert!(
            next_objective <= objective + 1e-9 * objective.abs().max(f64::MIN_POSITIVE),
            "a Lloyd step raised the objective from {objective} to {next_objective}"
        );
        if next_objective > objective {
            // only reachable through rounding in the mean update; keep the better state
            break Convergence::Tolerance;
        }
        let improvement = objective - next_objective;
        let previous = objective;
        centroids = next;
        assignment = next_assignment;
        objective = next_objective;
        trace.push(objective);
        if improvement < cfg.rel_tol * previous {
            break Convergence::Tolerance;
        }
        if iterations >= cfg.max_iters {
            break Convergence::MaxIters;
        }
    };

    for (j, &count) in assignment.counts.iter().enumerate() {
        if count == 0 {
            centroids.mark_degenerate(j);
        }
    }
    Ok(LloydOutcome {
        centroids,
        assignment,
        objective,
        iterations,
        converged_by,
        trace,
    })
}

/// [`kmeans`] over the valid centers of `init` only. Degenerate centers are
/// carried through untouched and labels index the full center set.
pub fn kmeans_valid(
    sample: &Dataset,
    init: &CentroidSet,
    cfg: &LloydConfig,
    counter: &DistanceCounter,
) -> Result<LloydOutcome> {
    if !init.has_degenerate() {
        return kmeans(sample, init, cfg, counter);
    }
    let active = init.active();
    let valid = init
        .valid_centers()
        .ok_or_else(|| Error::InvalidData("every initial center is degenerate".into()))?;
    let out = kmeans(sample, &CentroidSet::from_dataset(&valid), cfg, counter)?;
    let mut centroids = init.clone();
    for (pos, &j) in active.iter().enumerate() {
        centroids.set_center(j, out.centroids.center(pos));
        if out.centroids.is_degenerate(pos) {
            centroids.mark_degenerate(j);
        }
    }
    let labels = out.assignment.labels.iter().map(|&pos| active[pos]).collect();
    Ok(LloydOutcome {
        assignment: Assignment::from_labels(labels, init.k()),
        centroids,
        ..out
    })
}

/// Per-cluster means of the assigned rows. Clusters without members are
/// flagged degenerate.
pub fn update_centroids(sample: &Dataset, assignment: &Assignment, k: usize) -> CentroidSet {
    let (sums, counts) = accumulate(sample, &assignment.labels, k, false);
    let n = sample.n();
    let mut centers = vec![0.0; k * n];
    let mut degenerate = vec![false; k];
    for j in 0..k {
        if counts[j] == 0 {
            degenerate[j] = true;
        } else {
            let count = counts[j] as f64;
            for d in 0..n {
                centers[j * n + d] = sums[j * n + d] / count;
            }
        }
    }
    CentroidSet::from_parts(centers, degenerate, n)
}

/// Mean update that keeps the previous coordinates of empty clusters.
fn step_centroids(
    sample: &Dataset,
    assignment: &Assignment,
    previous: &CentroidSet,
    parallel: bool,
) -> CentroidSet {
    let k = previous.k();
    let n = sample.n();
    let (sums, counts) = accumulate(sample, &assignment.labels, k, parallel);
    let mut centers = previous.as_slice().to_vec();
    for j in 0..k {
        if counts[j] > 0 {
            let count = counts[j] as f64;
            for d in 0..n {
                centers[j * n + d] = sums[j * n + d] / count;
            }
        }
    }
    CentroidSet::from_parts(centers, vec![false; k], n)
}

/// Per-cluster coordinate sums and counts, reduced over fixed row partitions
/// in partition order.
fn accumulate(sample: &Dataset, labels: &[usize], k: usize, parallel: bool) -> (Vec<f64>, Vec<usize>) {
    let n = sample.n();
    let part = partition_rows(sample.m());
    let partial = |(rows, labels): (&[f64], &[usize])| {
        let mut sums = vec![0.0; k * n];
        let mut counts = vec![0usize; k];
        for (row, &l) in rows.chunks_exact(n).zip(labels) {
            counts[l] += 1;
            for (s, v) in sums[l * n..(l + 1) * n].iter_mut().zip(row) {
                *s += v;
            }
        }
        (sums, counts)
    };
    let partials: Vec<(Vec<f64>, Vec<usize>)> = if parallel {
        sample
            .as_slice()
            .par_chunks(part * n)
            .zip(labels.par_chunks(part))
            .map(partial)
            .collect()
    } else {
        sample
            .as_slice()
            .chunks(part * n)
            .zip(labels.chunks(part))
            .map(partial)
            .collect()
    };
    let mut iter = partials.into_iter();
    let (mut sums, mut counts) = iter.next().expect("at least one partition");
    for (s, c) in iter {
        for (a, b) in sums.iter_mut().zip(&s) {
            *a += b;
        }
        for (a, b) in counts.iter_mut().zip(&c) {
            *a += b;
        }
    }
    (sums, counts)
}
