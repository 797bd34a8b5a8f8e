use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Gaussian blobs with uniform background noise.
#[derive(Clone, Debug, PartialEq)]
pub struct BlobSpec {
    /// Points drawn from the blobs; noise rows come on top.
    pub num_points: usize,
    pub features: usize,
    pub num_blobs: usize,
    pub center_box: (f64, f64),
    pub std_range: (f64, f64),
    pub noise_points: usize,
    pub noise_box: (f64, f64),
    pub seed: u64,
}

impl BlobSpec {
    pub fn new(num_points: usize, seed: u64) -> Self {
        Self {
            num_points,
            features: 10,
            num_blobs: 10,
            center_box: (-40.0, 40.0),
            std_range: (0.0, 10.0),
            noise_points: 500,
            noise_box: (-50.0, 50.0),
            seed,
        }
    }

    /// `3^(i + 7)` blob points, the sizes of the scaling experiment.
    pub fn scaling(i: u32, seed: u64) -> Self {
        Self::new(3usize.pow(i + 7), seed)
    }

    pub fn rows(&self) -> usize {
        self.num_points + self.noise_points
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_points == 0 || self.features == 0 || self.num_blobs == 0 {
            return Err(Error::config("blob points, features and blob count must be positive"));
        }
        for (name, (lo, hi)) in [
            ("center box", self.center_box),
            ("std range", self.std_range),
            ("noise box", self.noise_box),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::config(format!("{name} ({lo}, {hi}) is not a finite ordered interval")));
            }
        }
        if self.std_range.0 < 0.0 {
            return Err(Error::config("std range must be non-negative"));
        }
        Ok(())
    }
}

/// What the generator drew, for checking results against.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    /// One row per blob.
    pub centers: Dataset,
    pub stds: Vec<f64>,
    /// Blob index of every blob row; noise rows are not labeled.
    pub labels: Vec<usize>,
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Blob rows grouped by blob (sizes differ by at most one), then the noise
/// rows.
pub fn gen_blobs(spec: &BlobSpec) -> Result<(Dataset, GroundTruth)> {
    spec.validate()?;
    let (m, n, b) = (spec.num_points, spec.features, spec.num_blobs);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let centers: Vec<f64> = (0..b * n).map(|_| uniform(&mut rng, spec.center_box)).collect();
    let stds: Vec<f64> = (0..b).map(|_| uniform(&mut rng, spec.std_range)).collect();

    let mut values = Vec::with_capacity(spec.rows() * n);
    let mut labels = Vec::with_capacity(m);
    for blob in 0..b {
        let size = m / b + usize::from(blob < m % b);
        let noise = Normal::new(0.0, stds[blob]).map_err(|e| Error::config(e.to_string()))?;
        let center = &centers[blob * n..(blob + 1) * n];
        for _ in 0..size {
            values.extend(center.iter().map(|&c| c + noise.sample(&mut rng)));
            labels.push(blob);
        }
    }
    for _ in 0..spec.noise_points * n {
        values.push(uniform(&mut rng, spec.noise_box));
    }

    let data = Dataset::new(values, n)?;
    let truth = GroundTruth {
        centers: Dataset::new(centers, n)?,
        stds,
        labels,
    };
    Ok((data, truth))
}
