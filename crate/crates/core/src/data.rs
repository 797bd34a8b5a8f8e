//! Dense datasets, centroid sets and the squared-Euclidean kernels shared by
//! every algorithm in the crate.
//!
//! All row-wise kernels split the rows into a fixed set of partitions whose
//! size depends only on the row count. Sequential and parallel execution walk
//! the same partitions and reduce partial results in partition order, so both
//! modes produce bitwise-identical labels, objectives and centroid sums.

use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::error::{Error, Result};

const TARGET_PARTITIONS: usize = 64;
const MIN_PARTITION_ROWS: usize = 256;

/// Row count of one reduction partition for a dataset with `m` rows.
pub(crate) fn partition_rows(m: usize) -> usize {
    m.div_ceil(TARGET_PARTITIONS).max(MIN_PARTITION_ROWS)
}

/// Row-major `m × n` matrix of finite reals.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    m: usize,
    n: usize,
}

impl Dataset {
    pub fn new(values: Vec<f64>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidData("feature count must be at least 1".into()));
        }
        if values.is_empty() {
            return Err(Error::InvalidData("dataset must contain at least one row".into()));
        }
        if values.len() % n != 0 {
            return Err(Error::InvalidData(format!(
                "{} values do not form rows of length {n}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidData(format!(
                "non-finite value at row {}, column {}",
                pos / n,
                pos % n
            )));
        }
        let m = values.len() / n;
        Ok(Self { values, m, n })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * n);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(values, n)
    }

    /// Number of points.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of features.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Copies the listed rows, in the listed order, into a new dataset.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(indices.len() * self.n);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        Self::new(values, self.n)
    }

    /// Number of pairwise-distinct rows (bitwise comparison).
    pub fn distinct_rows(&self) -> usize {
        let mut keys: Vec<Vec<u64>> = self
            .rows()
            .map(|r| r.iter().map(|v| canonical_bits(*v)).collect())
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys.len()
    }
}

fn canonical_bits(v: f64) -> u64 {
    // -0.0 and 0.0 are the same point
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}

/// `k` centers of dimension `n`, each optionally flagged degenerate.
///
/// A degenerate center carries no meaningful coordinates and has to be
/// reseeded before it takes part in an assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct CentroidSet {
    centers: Vec<f64>,
    degenerate: Vec<bool>,
    n: usize,
}

impl CentroidSet {
    /// `k` centers, all degenerate.
    pub fn degenerate(k: usize, n: usize) -> Self {
        Self {
            centers: vec![0.0; k * n],
            degenerate: vec![true; k],
            n,
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let data = Dataset::from_rows(rows)?;
        Ok(Self::from_dataset(&data))
    }

    pub(crate) fn from_dataset(data: &Dataset) -> Self {
        Self {
            centers: data.as_slice().to_vec(),
            degenerate: vec![false; data.m()],
            n: data.n(),
        }
    }

    pub(crate) fn from_parts(centers: Vec<f64>, degenerate: Vec<bool>, n: usize) -> Self {
        debug_assert_eq!(centers.len(), degenerate.len() * n);
        Self {
            centers,
            degenerate,
            n,
        }
    }

    pub fn k(&self) -> usize {
        self.degenerate.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn center(&self, j: usize) -> &[f64] {
        &self.centers[j * self.n..(j + 1) * self.n]
    }

    pub fn is_degenerate(&self, j: usize) -> bool {
        self.degenerate[j]
    }

    pub fn degenerate_flags(&self) -> &[bool] {
        &self.degenerate
    }

    pub fn degenerate_count(&self) -> usize {
        self.degenerate.iter().filter(|d| **d).count()
    }

    pub fn has_degenerate(&self) -> bool {
        self.degenerate.iter().any(|d| *d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.centers
    }

    /// Indices of the non-degenerate centers.
    pub fn active(&self) -> Vec<usize> {
        (0..self.k()).filter(|&j| !self.degenerate[j]).collect()
    }

    /// Writes `coords` into center `j` and clears its degenerate flag.
    pub fn set_center(&mut self, j: usize, coords: &[f64]) {
        assert_eq!(coords.len(), self.n, "center dimension");
        self.centers[j * self.n..(j + 1) * self.n].copy_from_slice(coords);
        self.degenerate[j] = false;
    }

    pub fn mark_degenerate(&mut self, j: usize) {
        self.degenerate[j] = true;
    }

    /// The non-degenerate centers, as dataset rows. `None` if every center is
    /// degenerate.
    pub fn valid_centers(&self) -> Option<Dataset> {
        let values: Vec<f64> = self
            .active()
            .into_iter()
            .flat_map(|j| self.center(j).iter().copied())
            .collect();
        Dataset::new(values, self.n).ok()
    }

    /// Bitwise equality of coordinates and flags; distinguishes `0.0`/`-0.0`.
    pub fn bitwise_eq(&self, other: &CentroidSet) -> bool {
        self.n == other.n
            && self.degenerate == other.degenerate
            && self.centers.len() == other.centers.len()
            && self
                .centers
                .iter()
                .zip(&other.centers)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// Cluster labels plus per-cluster member counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub labels: Vec<usize>,
    pub counts: Vec<usize>,
}

impl Assignment {
    pub fn from_labels(labels: Vec<usize>, k: usize) -> Self {
        let mut counts = vec![0; k];
        for &l in &labels {
            counts[l] += 1;
        }
        Self { labels, counts }
    }
}

/// Counts squared-distance evaluations (`n_d`).
#[derive(Debug, Default)]
pub struct DistanceCounter(AtomicU64);

impl DistanceCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&self, evals: u64) {
        self.0.fetch_add(evals, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }
}

/// `Σ_d (a_d − b_d)²`. Panics on a length mismatch; see [`try_squared_distance`].
#[inline]
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "squared_distance: dimension mismatch");
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

pub fn try_squared_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(squared_distance(a, b))
}

/// Execution context for the row kernels: sequential or row-parallel, with a
/// distance-evaluation counter.
#[derive(Clone, Copy, Debug)]
pub struct Kernel<'a> {
    parallel: bool,
    counter: &'a DistanceCounter,
}

impl<'a> Kernel<'a> {
    pub fn new(counter: &'a DistanceCounter, parallel: bool) -> Self {
        Self { parallel, counter }
    }

    pub fn sequential(counter: &'a DistanceCounter) -> Self {
        Self::new(counter, false)
    }

    pub fn is_parallel(&self) -> bool {
        self.parallel
    }

    pub fn counter(&self) -> &'a DistanceCounter {
        self.counter
    }

    pub fn with_parallel(self, parallel: bool) -> Self {
        Self { parallel, ..self }
    }

    /// Labels each row with its nearest center and returns the summed squared
    /// distances. Every center must be valid.
    pub fn assign(&self, x: &Dataset, c: &CentroidSet) -> Result<(Assignment, f64)> {
        check_dims(x, c)?;
        if let Some(j) = c.degenerate_flags().iter().position(|d| *d) {
            return Err(Error::DegenerateCentroid(j));
        }
        let active: Vec<usize> = (0..c.k()).collect();
        Ok(self.assign_among(x, c, &active))
    }

    /// Like [`Kernel::assign`] but silently ignores degenerate centers.
    /// Labels still index the full center set.
    pub fn assign_valid(&self, x: &Dataset, c: &CentroidSet) -> Result<(Assignment, f64)> {
        check_dims(x, c)?;
        let active = c.active();
        if active.is_empty() {
            return Err(Error::DegenerateCentroid(0));
        }
        Ok(self.assign_among(x, c, &active))
    }

    fn assign_among(&self, x: &Dataset, c: &CentroidSet, active: &[usize]) -> (Assignment, f64) {
        let m = x.m();
        let n = x.n();
        let part = partition_rows(m);
        let mut labels = vec![0usize; m];

        let run_part = |(rows, labels): (&[f64], &mut [usize])| -> f64 {
            let mut total = 0.0;
            for (row, label) in rows.chunks_exact(n).zip(labels.iter_mut()) {
                let (j, d) = nearest_among(row, c, active);
                *label = j;
                total += d;
            }
            total
        };

        let partials: Vec<f64> = if self.parallel {
            x.as_slice()
                .par_chunks(part * n)
                .zip(labels.par_chunks_mut(part))
                .map(run_part)
                .collect()
        } else {
            x.as_slice()
                .chunks(part * n)
                .zip(labels.chunks_mut(part))
                .map(run_part)
                .collect()
        };
        self.counter.add((m * active.len()) as u64);

        let cost = partials.iter().sum();
        (Assignment::from_labels(labels, c.k()), cost)
    }

    pub fn objective(&self, c: &CentroidSet, x: &Dataset) -> Result<f64> {
        self.assign(x, c).map(|(_, f)| f)
    }

    /// Writes the squared distance from every row to `center` into `out`.
    pub fn distances_to(&self, x: &Dataset, center: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), x.m());
        let n = x.n();
        let part = partition_rows(x.m());
        let run_part = |(rows, out): (&[f64], &mut [f64])| {
            for (row, d) in rows.chunks_exact(n).zip(out.iter_mut()) {
                *d = squared_distance(row, center);
            }
        };
        if self.parallel {
            x.as_slice()
                .par_chunks(part * n)
                .zip(out.par_chunks_mut(part))
                .for_each(run_part);
        } else {
            x.as_slice()
                .chunks(part * n)
                .zip(out.chunks_mut(part))
                .for_each(run_part);
        }
        self.counter.add(x.m() as u64);
    }
}

/// Nearest active center to `point`; ties go to the lowest index.
#[inline]
fn nearest_among(point: &[f64], c: &CentroidSet, active: &[usize]) -> (usize, f64) {
    let mut best = (active[0], f64::INFINITY);
    for &j in active {
        let d = squared_distance(point, c.center(j));
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn check_dims(x: &Dataset, c: &CentroidSet) -> Result<()> {
    if x.n() != c.n() {
        return Err(Error::DimensionMismatch {
            expected: x.n(),
            found: c.n(),
        });
    }
    if c.k() == 0 {
        return Err(Error::InvalidData("centroid set is empty".into()));
    }
    Ok(())
}

/// Sequential nearest-centroid assignment.
pub fn assign_nearest(x: &Dataset, c: &CentroidSet) -> Result<Assignment> {
    let counter = DistanceCounter::new();
    Kernel::sequential(&counter).assign(x, c).map(|(a, _)| a)
}

/// Sum over points of the squared distance to the nearest center.
pub fn mssc_objective(c: &CentroidSet, x: &Dataset) -> Result<f64> {
    let counter = DistanceCounter::new();
    Kernel::sequential(&counter).objective(c, x)
}

/// Per-feature min-max scaling onto `[0, 1]`. Constant features map to 0.
pub fn minmax_normalize(x: &Dataset) -> Dataset {
    let n = x.n();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for row in x.rows() {
        for (d, v) in row.iter().enumerate() {
            lo[d] = lo[d].min(*v);
            hi[d] = hi[d].max(*v);
        }
    }
    let values = x
        .rows()
        .flat_map(|row| {
            row.iter().enumerate().map(|(d, v)| {
                let range = hi[d] - lo[d];
                if range > 0.0 {
                    ((v - lo[d]) / range).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
        })
        .collect();
    Dataset {
        values,
        m: x.m(),
        n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ds(rows: &[&[f64]]) -> Dataset {
        Dataset::from_rows(rows).unwrap()
    }

    fn cs(rows: &[&[f64]]) -> CentroidSet {
        CentroidSet::from_rows(rows).unwrap()
    }

    #[test]
    fn squared_distance_examples() {
        assert_eq!(squared_distance(&[0.0, 0.0], &[3.0, 4.0]), 25.0);
        assert_eq!(squared_distance(&[1.0, 2.0], &[4.0, 6.0]), 25.0);
        let a = [1.5, -2.0, 7.25];
        assert_eq!(squared_distance(&a, &a), 0.0);
    }

    #[test]
    fn squared_distance_rejects_mismatch() {
        assert!(matches!(
            try_squared_distance(&[1.0], &[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn dataset_rejects_non_finite_and_empty() {
        assert!(Dataset::new(vec![1.0, f64::NAN], 2).is_err());
        assert!(Dataset::new(vec![f64::INFINITY], 1).is_err());
        assert!(Dataset::new(vec![], 1).is_err());
        assert!(Dataset::new(vec![1.0, 2.0, 3.0], 2).is_err());
        assert!(Dataset::new(vec![1.0], 0).is_err());
    }

    #[test]
    fn assign_examples() {
        let a = assign_nearest(&ds(&[&[0.0], &[10.0]]), &cs(&[&[1.0], &[9.0]])).unwrap();
        assert_eq!(a.labels, vec![0, 1]);
        assert_eq!(a.counts, vec![1, 1]);

        let x = ds(&[&[0.0], &[3.0], &[-7.0]]);
        let a = assign_nearest(&x, &cs(&[&[2.0]])).unwrap();
        assert_eq!(a.labels, vec![0, 0, 0]);
        assert_eq!(a.counts, vec![3]);

        // equidistant: lowest index wins
        let a = assign_nearest(&ds(&[&[5.0]]), &cs(&[&[4.0], &[6.0]])).unwrap();
        assert_eq!(a.labels, vec![0]);
    }

    #[test]
    fn assign_rejects_degenerate() {
        let mut c = cs(&[&[0.0], &[1.0]]);
        c.mark_degenerate(1);
        assert!(matches!(
            assign_nearest(&ds(&[&[0.0]]), &c),
            Err(Error::DegenerateCentroid(1))
        ));
        assert!(matches!(
            mssc_objective(&c, &ds(&[&[0.0]])),
            Err(Error::DegenerateCentroid(1))
        ));
    }

    #[test]
    fn assign_valid_skips_degenerate() {
        let mut c = cs(&[&[0.0], &[100.0], &[10.0]]);
        c.mark_degenerate(1);
        let counter = DistanceCounter::new();
        let (a, f) = Kernel::sequential(&counter)
            .assign_valid(&ds(&[&[99.0], &[1.0]]), &c)
            .unwrap();
        assert_eq!(a.labels, vec![2, 0]);
        assert_eq!(a.counts, vec![1, 0, 1]);
        assert_eq!(f, 89.0 * 89.0 + 1.0);
        assert_eq!(counter.get(), 4);
    }

    #[test]
    fn objective_examples() {
        let f = mssc_objective(&cs(&[&[1.0, 0.0]]), &ds(&[&[0.0, 0.0], &[2.0, 0.0]])).unwrap();
        assert_eq!(f, 2.0);

        let x = ds(&[&[1.0, 2.0], &[3.0, 4.0], &[-1.0, 0.5]]);
        assert_eq!(mssc_objective(&CentroidSet::from_dataset(&x), &x).unwrap(), 0.0);

        let x = ds(&[&[0.0], &[1.0], &[2.0], &[10.0], &[11.0], &[12.0]]);
        assert_eq!(mssc_objective(&cs(&[&[1.0], &[11.0]]), &x).unwrap(), 4.0);
    }

    #[test]
    fn distance_counter_tracks_assignments() {
        let counter = DistanceCounter::new();
        let kernel = Kernel::sequential(&counter);
        let x = ds(&[&[0.0], &[1.0], &[2.0]]);
        kernel.assign(&x, &cs(&[&[0.0], &[2.0]])).unwrap();
        assert_eq!(counter.get(), 6);
        let mut out = vec![0.0; 3];
        kernel.distances_to(&x, &[1.0], &mut out);
        assert_eq!(out, vec![1.0, 0.0, 1.0]);
        assert_eq!(counter.get(), 9);
    }

    #[test]
    fn minmax_examples() {
        let x = ds(&[&[0.0, 7.0, -40.0], &[5.0, 7.0, 40.0], &[10.0, 7.0, 0.0]]);
        let y = minmax_normalize(&x);
        assert_eq!(y.row(0), &[0.0, 0.0, 0.0]);
        assert_eq!(y.row(1), &[0.5, 0.0, 1.0]);
        assert_eq!(y.row(2), &[1.0, 0.0, 0.5]);
    }

    #[test]
    fn distinct_rows_counts_bitwise() {
        let x = ds(&[&[0.0, 1.0], &[-0.0, 1.0], &[1.0, 0.0]]);
        assert_eq!(x.distinct_rows(), 2);
    }

    fn dataset_strategy(max_m: usize) -> impl Strategy<Value = Dataset> {
        (1usize..=4, 1usize..=max_m).prop_flat_map(|(n, m)| {
            proptest::collection::vec(-100.0f64..100.0, n * m)
                .prop_map(move |v| Dataset::new(v, n).unwrap())
        })
    }

    proptest! {
        #[test]
        fn objective_matches_assignment(x in dataset_strategy(40), seed in 0u64..1000) {
            let k = 1 + (seed as usize % x.m().min(5));
            let idx: Vec<usize> = (0..k).map(|j| (j * 7 + seed as usize) % x.m()).collect();
            let c = CentroidSet::from_dataset(&x.select(&idx).unwrap());
            let a = assign_nearest(&x, &c).unwrap();
            let recomputed: f64 = x.rows().zip(&a.labels)
                .map(|(r, &l)| squared_distance(r, c.center(l))).sum();
            let f = mssc_objective(&c, &x).unwrap();
            prop_assert!((f - recomputed).abs() <= 1e-9 * recomputed.max(1.0));
            prop_assert_eq!(a.counts.iter().sum::<usize>(), x.m());
            for (i, &l) in a.labels.iter().enumerate() {
                for j in 0..c.k() {
                    let dl = squared_distance(x.row(i), c.center(l));
                    let dj = squared_distance(x.row(i), c.center(j));
                    prop_assert!(dl < dj || (dl == dj && l <= j));
                }
            }
        }

        #[test]
        fn assignment_commutes_with_row_permutation(x in dataset_strategy(30), rot in 0usize..30) {
            let c = CentroidSet::from_dataset(&x.select(&[0, x.m() / 2]).unwrap());
            let perm: Vec<usize> = (0..x.m()).map(|i| (i + rot) % x.m()).collect();
            let a = assign_nearest(&x, &c).unwrap();
            let b = assign_nearest(&x.select(&perm).unwrap(), &c).unwrap();
            for (pos, &orig) in perm.iter().enumerate() {
                prop_assert_eq!(b.labels[pos], a.labels[orig]);
            }
        }

        #[test]
        fn minmax_is_idempotent(x in dataset_strategy(30)) {
            let once = minmax_normalize(&x);
            let twice = minmax_normalize(&once);
            for (a, b) in once.as_slice().iter().zip(twice.as_slice()) {
                prop_assert!((a - b).abs() <= 1e-12);
                prop_assert!((0.0..=1.0).contains(a));
            }
        }

        #[test]
        fn parallel_assignment_is_bitwise_sequential(x in dataset_strategy(3000), k in 1usize..8) {
            let k = k.min(x.m());
            let c = CentroidSet::from_dataset(&x.select(&(0..k).collect::<Vec<_>>()).unwrap());
            let counter = DistanceCounter::new();
            let (a_seq, f_seq) = Kernel::new(&counter, false).assign(&x, &c).unwrap();
            let (a_par, f_par) = Kernel::new(&counter, true).assign(&x, &c).unwrap();
            prop_assert_eq!(a_seq, a_par);
            prop_assert_eq!(f_seq.to_bits(), f_par.to_bits());
        }
    }
}
