//! Greedy k-means++ seeding.
//!
//! Each new center is chosen by drawing `candidates_per_center` rows with
//! probability proportional to their squared distance from the nearest center
//! already placed (with replacement), and keeping the candidate that leaves the
//! smallest total cost on the sample.

use log::debug;
use rand::Rng;

use crate::data::{CentroidSet, Dataset, Kernel};
use crate::error::{Error, Result};

pub const DEFAULT_CANDIDATES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeedConfig {
    pub candidates_per_center: usize,
}

impl Default for SeedConfig {
    fn default() -> Self {
        Self {
            candidates_per_center: DEFAULT_CANDIDATES,
        }
    }
}

impl SeedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.candidates_per_center == 0 {
            return Err(Error::config("candidates_per_center must be at least 1"));
        }
        Ok(())
    }
}

/// Seeds `k` centers from the rows of `sample`.
///
/// If the sample has fewer than `k` distinct rows, the surplus centers come
/// back flagged degenerate.
pub fn kmeanspp_seed<R: Rng + ?Sized>(
    sample: &Dataset,
    k: usize,
    cfg: &SeedConfig,
    rng: &mut R,
    kernel: &Kernel<'_>,
) -> Result<CentroidSet> {
    if k == 0 {
        return Err(Error::config("k must be at least 1"));
    }
    reinit_degenerate(&CentroidSet::degenerate(k, sample.n()), sample, cfg, rng, kernel)
}

/// Replaces every degenerate center of `centroids` by greedy D² sampling on
/// `sample`, measured against the valid centers and those reseeded before it.
/// Valid centers are returned untouched.
pub fn reinit_degenerate<R: Rng + ?Sized>(
    centroids: &CentroidSet,
    sample: &Dataset,
    cfg: &SeedConfig,
    rng: &mut R,
    kernel: &Kernel<'_>,
) -> Result<CentroidSet> {
    cfg.validate()?;
    if centroids.n() != sample.n() {
        return Err(Error::DimensionMismatch {
            expected: sample.n(),
            found: centroids.n(),
        });
    }
    let mut out = centroids.clone();
    let mut pending: Vec<usize> = (0..out.k()).filter(|&j| out.is_degenerate(j)).collect();
    if pending.is_empty() {
        return Ok(out);
    }

    let m = sample.m();
    let mut closest = vec![f64::INFINITY; m];
    let mut scratch = vec![0.0; m];
    let mut active = out.active();
    if active.is_empty() {
        let first = rng.random_range(0..m);
        let j = pending.remove(0);
        out.set_center(j, sample.row(first));
        active.push(j);
    }
    for &j in &active {
        kernel.distances_to(sample, out.center(j), &mut scratch);
        for (c, d) in closest.iter_mut().zip(&scratch) {
            *c = c.min(*d);
        }
    }

    let mut best_dists = vec![0.0; m];
    for (placed, &j) in pending.iter().enumerate() {
        let total: f64 = closest.iter().sum();
        if total <= 0.0 {
            debug!(
                "sample exhausted its distinct rows; {} center(s) left degenerate",
                pending.len() - placed
            );
            break;
        }
        let mut best: Option<(usize, f64)> = None;
        for _ in 0..cfg.candidates_per_center {
            let cand = sample_weighted(&closest, total, rng);
            kernel.distances_to(sample, sample.row(cand), &mut scratch);
            let potential: f64 = closest.iter().zip(&scratch).map(|(c, d)| c.min(*d)).sum();
            if best.is_none_or(|(_, p)| potential < p) {
                best = Some((cand, potential));
                std::mem::swap(&mut best_dists, &mut scratch);
            }
        }
        let (row, _) = best.expect("at least one candidate");
        out.set_center(j, sample.row(row));
        for (c, d) in closest.iter_mut().zip(&best_dists) {
            *c = c.min(*d);
        }
    }
    Ok(out)
}

/// Index drawn with probability `weights[i] / total`; zero-weight rows are
/// never returned.
fn sample_weighted<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if target < acc {
                return i;
            }
        }
    }
    // rounding left `target` just past the final partial sum
    last_positive
}
