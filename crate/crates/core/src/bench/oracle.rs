use crate::data::{squared_distance, CentroidSet, Dataset};
use crate::error::{Error, Result};

/// Most partitions the exhaustive search will visit.
pub const PARTITION_LIMIT: f64 = 1e7;

/// Number of partitions of `m` items into at most `k` nonempty groups:
/// `Σ_{j ≤ k} S(m, j)` with `S` the Stirling numbers of the second kind.
pub fn partition_count(m: usize, k: usize) -> f64 {
    let k = k.min(m);
    // row[j] = S(i, j) for the current i
    let mut row = vec![0.0f64; k + 1];
    row[0] = 1.0;
    for _ in 0..m {
        for j in (1..=k).rev() {
            row[j] = j as f64 * row[j] + row[j - 1];
        }
        row[0] = 0.0;
    }
    row[1..].iter().sum()
}

/// Exact global minimum of the sum of squared distances to group means, over
/// every partition of the rows into at most `k` nonempty groups. Centers
/// beyond the number of groups used come back degenerate.
pub fn brute_force_mssc(x: &Dataset, k: usize) -> Result<(CentroidSet, f64)> {
    if k == 0 {
        return Err(Error::config("k must be positive"));
    }
    let partitions = partition_count(x.m(), k);
    if partitions > PARTITION_LIMIT {
        return Err(Error::TooLarge {
            partitions,
            limit: PARTITION_LIMIT,
        });
    }

    let mut search = Search {
        x,
        k,
        labels: vec![0; x.m()],
        best_labels: Vec::new(),
        best: f64::INFINITY,
        sums: vec![0.0; k * x.n()],
        counts: vec![0; k],
    };
    search.descend(0, 0);

    let groups = search.best_labels.iter().max().map_or(0, |&g| g + 1);
    let mut centroids = CentroidSet::degenerate(k, x.n());
    for g in 0..groups {
        centroids.set_center(g, &group_mean(x, &search.best_labels, g));
    }
    // recompute from scratch; the running sums pick up rounding during the search
    let objective = search
        .best_labels
        .iter()
        .enumerate()
        .map(|(i, &g)| squared_distance(x.row(i), centroids.center(g)))
        .sum();
    Ok((centroids, objective))
}

struct Search<'a> {
    x: &'a Dataset,
    k: usize,
    labels: Vec<usize>,
    best_labels: Vec<usize>,
    best: f64,
    sums: Vec<f64>,
    counts: Vec<usize>,
}

impl Search<'_> {
    /// Restricted growth strings: row `i` joins one of the `used` open
    /// groups or opens the next one.
    fn descend(&mut self, i: usize, used: usize) {
        if i == self.x.m() {
            let cost = self.cost(used);
            if cost < self.best {
                self.best = cost;
                self.best_labels.clone_from(&self.labels);
            }
            return;
        }
        let n = self.x.n();
        let top = if used < self.k { used + 1 } else { used };
        for g in 0..top {
            self.labels[i] = g;
            self.counts[g] += 1;
            for (s, v) in self.sums[g * n..(g + 1) * n].iter_mut().zip(self.x.row(i)) {
                *s += v;
            }
            self.descend(i + 1, used.max(g + 1));
            self.counts[g] -= 1;
            for (s, v) in self.sums[g * n..(g + 1) * n].iter_mut().zip(self.x.row(i)) {
                *s -= v;
            }
        }
    }

    /// Direct sum of squared deviations from the group means.
    fn cost(&self, used: usize) -> f64 {
        let n = self.x.n();
        let means: Vec<f64> = (0..used * n)
            .map(|idx| self.sums[idx] / self.counts[idx / n] as f64)
            .collect();
        self.labels
            .iter()
            .enumerate()
            .map(|(i, &g)| {
                self.x
                    .row(i)
                    .iter()
                    .zip(&means[g * n..(g + 1) * n])
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .sum()
    }
}

fn group_mean(x: &Dataset, labels: &[usize], g: usize) -> Vec<f64> {
    let mut mean = vec![0.0; x.n()];
    let mut count = 0usize;
    for (i, _) in labels.iter().enumerate().filter(|(_, &l)| l == g) {
        mean.iter_mut().zip(x.row(i)).for_each(|(a, v)| *a += v);
        count += 1;
    }
    mean.iter_mut().for_each(|a| *a /= count as f64);
    mean
}
