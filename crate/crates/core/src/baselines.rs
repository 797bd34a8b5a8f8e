//! Comparison algorithms: Forgy K-means on the full dataset, and PBK-BDC
//! (cluster fixed-size segments, then cluster the pooled segment centroids).

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::{CentroidSet, Dataset, DistanceCounter, Kernel};
use crate::engine::{Clock, ClockKind, ClusteringResult};
use crate::error::{Error, Result};
use crate::lloyd::{kmeans_valid, LloydConfig};

/// `k` distinct rows of `x` chosen uniformly. Rows that repeat an earlier
/// pick's coordinates come back degenerate, as do slots beyond `x.m()`.
pub fn forgy_init<R: Rng + ?Sized>(x: &Dataset, k: usize, rng: &mut R) -> CentroidSet {
    let picks = index::sample(rng, x.m(), k.min(x.m())).into_vec();
    let mut centroids = CentroidSet::degenerate(k, x.n());
    for (j, &row) in picks.iter().enumerate() {
        let coords = x.row(row);
        let duplicate = picks[..j]
            .iter()
            .any(|&prev| x.row(prev) == coords);
        if !duplicate {
            centroids.set_center(j, coords);
        }
    }
    centroids
}

/// Forgy-initialized Lloyd on the whole dataset.
pub fn forgy_kmeans<R: Rng + ?Sized>(
    x: &Dataset,
    k: usize,
    cfg: &LloydConfig,
    rng: &mut R,
    clock: ClockKind,
) -> Result<ClusteringResult> {
    if k == 0 || k > x.m() {
        return Err(Error::config(format!("k = {k} must lie in [1, {}]", x.m())));
    }
    let clock = Clock::start(clock);
    let counter = DistanceCounter::new();
    let init = forgy_init(x, k, rng);
    let out = kmeans_valid(x, &init, cfg, &counter)?;
    Ok(full_data_result(out.centroids, out.assignment, out.objective, &clock, &counter))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PbkConfig {
    /// Rows per segment.
    pub segment_size: usize,
    pub lloyd: LloydConfig,
}

#[derive(Clone, Debug)]
pub struct PbkOutcome {
    pub result: ClusteringResult,
    pub segments: usize,
    /// Valid segment centroids pooled before the final clustering.
    pub repository_size: usize,
}

/// PBK-BDC: shuffle, split into segments of `segment_size` rows, cluster every
/// segment (in parallel) from a Forgy start, pool the valid segment centroids
/// and cluster the pool into the final `k` centers.
pub fn pbk_bdc<R: Rng + ?Sized>(
    x: &Dataset,
    k: usize,
    cfg: &PbkConfig,
    rng: &mut R,
    clock: ClockKind,
) -> Result<PbkOutcome> {
    let p = cfg.segment_size;
    if p == 0 || p > x.m() {
        return Err(Error::config(format!("segment size {p} must lie in [1, {}]", x.m())));
    }
    if k == 0 || k > p {
        return Err(Error::config(format!("k = {k} must lie in [1, segment size {p}]")));
    }
    cfg.lloyd.validate()?;
    let clock = Clock::start(clock);
    let counter = DistanceCounter::new();

    let order = index::sample(rng, x.m(), x.m()).into_vec();
    let segments: Vec<&[usize]> = order.chunks(p).collect();
    let seeds: Vec<u64> = segments.iter().map(|_| rng.random()).collect();

    let segment_centroids = segments
        .par_iter()
        .zip(&seeds)
        .map(|(rows, &seed)| {
            let segment = x.select(rows)?;
            let mut seg_rng = ChaCha8Rng::seed_from_u64(seed);
            let init = forgy_init(&segment, k, &mut seg_rng);
            kmeans_valid(&segment, &init, &cfg.lloyd, &counter).map(|out| out.centroids)
        })
        .collect::<Result<Vec<_>>>()?;

    let pooled: Vec<f64> = segment_centroids
        .iter()
        .flat_map(|c| c.active().into_iter().flat_map(move |j| c.center(j).to_vec()))
        .collect();
    let repository = Dataset::new(pooled, x.n())?;
    let repository_size = repository.m();

    let init = forgy_init(&repository, k, rng);
    let pooled_out = kmeans_valid(&repository, &init, &cfg.lloyd, &counter)?;
    let centroids = pooled_out.centroids;
    let kernel = Kernel::sequential(&counter);
    let (assignment, objective) = if centroids.has_degenerate() {
        kernel.assign_valid(x, &centroids)?
    } else {
        kernel.assign(x, &centroids)?
    };

    Ok(PbkOutcome {
        result: full_data_result(centroids, assignment, objective, &clock, &counter),
        segments: segments.len(),
        repository_size,
    })
}

fn full_data_result(
    centroids: CentroidSet,
    assignment: crate::data::Assignment,
    objective: f64,
    clock: &Clock,
    counter: &DistanceCounter,
) -> ClusteringResult {
    let time = clock.stamp(counter);
    ClusteringResult {
        centroids,
        best_worker: 0,
        sample_objective: None,
        full_objective: Some(objective),
        assignment: Some(assignment),
        clustering_time: time,
        first_finisher_time: time,
        elapsed: clock.elapsed(),
        workers: Vec::new(),
        distance_evals: counter.get(),
        publications: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::mssc_objective;
    use crate::lloyd::{kmeans, Convergence};

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn line(xs: &[f64]) -> Dataset {
        Dataset::new(xs.to_vec(), 1).unwrap()
    }

    fn pbk(x: &Dataset, k: usize, p: usize, seed: u64) -> PbkOutcome {
        let cfg = PbkConfig {
            segment_size: p,
            lloyd: LloydConfig::default(),
        };
        pbk_bdc(x, k, &cfg, &mut rng(seed), ClockKind::Work).unwrap()
    }

    #[test]
    fn forgy_separated_singletons() {
        let x = Dataset::from_rows(&[[0.0, 0.0], [50.0, 50.0]]).unwrap();
        for seed in 0..10 {
            let r = forgy_kmeans(&x, 2, &LloydConfig::default(), &mut rng(seed), ClockKind::Wall).unwrap();
            assert_eq!(r.full_objective, Some(0.0));
        }
    }

    #[test]
    fn forgy_single_cluster_is_the_mean() {
        let x = line(&[1.0, 2.0, 6.0]);
        let r = forgy_kmeans(&x, 1, &LloydConfig::default(), &mut rng(4), ClockKind::Wall).unwrap();
        assert_eq!(r.centroids.center(0), &[3.0]);
        assert_eq!(r.full_objective, Some(4.0 + 1.0 + 9.0));
    }

    #[test]
    fn forgy_from_good_start_reaches_optimum() {
        let x = line(&[0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
        let mut hits = 0;
        for seed in 0..50 {
            let r = forgy_kmeans(&x, 2, &LloydConfig::default(), &mut rng(seed), ClockKind::Wall).unwrap();
            let f = r.full_objective.unwrap();
            assert!(f >= 4.0);
            if f == 4.0 {
                hits += 1;
            }
        }
        // a start with one row from each group (probability 9/15) always converges to the optimum
        assert!(hits >= 9 * 50 / 15 / 2, "hits = {hits}");
        let init = CentroidSet::from_rows(&[[0.0], [10.0]]).unwrap();
        let out = kmeans(&x, &init, &LloydConfig::default(), &DistanceCounter::new()).unwrap();
        assert_eq!(out.objective, 4.0);
    }

    #[test]
    fn forgy_rejects_k_above_m() {
        let x = line(&[0.0, 1.0]);
        assert!(forgy_kmeans(&x, 3, &LloydConfig::default(), &mut rng(0), ClockKind::Wall).is_err());
    }

    #[test]
    fn forgy_init_flags_duplicate_coordinates() {
        let x = line(&[7.0, 7.0, 7.0]);
        let c = forgy_init(&x, 3, &mut rng(1));
        assert_eq!(c.degenerate_count(), 2);
        let r = forgy_kmeans(&x, 3, &LloydConfig::default(), &mut rng(1), ClockKind::Wall).unwrap();
        assert_eq!(r.full_objective, Some(0.0));
    }

    #[test]
    fn pbk_identical_points() {
        let x = line(&[3.0, 3.0, 3.0, 3.0]);
        for p in 1..=4 {
            let out = pbk(&x, 1, p, 9);
            assert_eq!(out.result.centroids.center(0), &[3.0]);
            assert_eq!(out.result.full_objective, Some(0.0));
        }
    }

    #[test]
    fn pbk_repository_counts_valid_segment_centroids() {
        let x = Dataset::new((0..23).map(|i| (i * i % 17) as f64).collect(), 1).unwrap();
        let out = pbk(&x, 3, 5, 2);
        assert_eq!(out.segments, 5);
        // last segment has 3 rows; every segment contributes at most k centers
        assert!(out.repository_size <= 3 * 5);

        // distinct values per segment are all ≥ k here, so nothing is dropped
        let x = Dataset::new((0..20).map(f64::from).collect(), 1).unwrap();
        let out = pbk(&x, 4, 5, 3);
        assert_eq!(out.segments, 4);
        assert_eq!(out.repository_size, 16);
    }

    #[test]
    fn pbk_drops_degenerate_segment_centroids() {
        // constant segments yield one valid centroid each instead of k
        let x = line(&[5.0; 8]);
        let out = pbk(&x, 2, 4, 1);
        assert_eq!(out.segments, 2);
        assert_eq!(out.repository_size, 2 * 2 - 2);
        assert_eq!(out.result.full_objective, Some(0.0));
    }

    #[test]
    fn pbk_single_segment_is_a_lloyd_fixed_point() {
        let x = Dataset::new((0..40).map(|i| ((i * 37) % 23) as f64).collect(), 1).unwrap();
        for seed in 0..10 {
            let out = pbk(&x, 3, 40, seed);
            assert_eq!(out.segments, 1);
            let c = &out.result.centroids;
            let f = out.result.full_objective.unwrap();
            if !c.has_degenerate() {
                assert_eq!(mssc_objective(c, &x).unwrap(), f);
                let again = kmeans(&x, c, &LloydConfig::default(), &DistanceCounter::new()).unwrap();
                assert_eq!(again.converged_by, Convergence::FixedPoint);
            }
        }
    }

    #[test]
    fn pbk_validates_segment_size() {
        let x = line(&[0.0, 1.0, 2.0]);
        let cfg = |p| PbkConfig {
            segment_size: p,
            lloyd: LloydConfig::default(),
        };
        assert!(pbk_bdc(&x, 2, &cfg(1), &mut rng(0), ClockKind::Work).is_err(), "k > p");
        assert!(pbk_bdc(&x, 1, &cfg(4), &mut rng(0), ClockKind::Work).is_err(), "p > m");
        assert!(pbk_bdc(&x, 1, &cfg(0), &mut rng(0), ClockKind::Work).is_err());
    }

    #[test]
    fn pbk_is_deterministic() {
        let x = Dataset::new((0..300).map(|i| ((i * 7919) % 101) as f64).collect(), 3).unwrap();
        let a = pbk(&x, 4, 20, 5);
        let b = pbk(&x, 4, 20, 5);
        assert!(a.result.centroids.bitwise_eq(&b.result.centroids));
        assert_eq!(a.result.distance_evals, b.result.distance_evals);
    }
}
