use std::collections::BTreeMap;

use crate::engine::TraceEntry;
use crate::error::{Error, Result};

/// `100 · (f − f*) / f*`. Negative when `f` beats the reference.
pub fn relative_error(f: f64, f_star: f64) -> Result<f64> {
    if !(f_star > 0.0) || !f_star.is_finite() {
        return Err(Error::config(format!("reference objective must be positive, got {f_star}")));
    }
    Ok(100.0 * (f - f_star) / f_star)
}

/// Median; even-length inputs average the two middle values.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 0 {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    })
}

/// Sample standard deviation (divisor `n − 1`); undefined below two values.
pub fn sample_std(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    Some((ss / (n - 1.0)).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub std: Option<f64>,
}

impl Summary {
    pub fn of(values: &[f64]) -> Result<Self> {
        let median = median(values).ok_or_else(|| Error::config("cannot summarize an empty series"))?;
        Ok(Self {
            median,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            std: sample_std(values),
        })
    }
}

/// The baseline sample objective: the largest per-algorithm median of the
/// best sample objectives.
pub fn baseline_objective(per_algorithm: &BTreeMap<String, Vec<f64>>) -> Result<f64> {
    if per_algorithm.is_empty() {
        return Err(Error::config("baseline objective needs at least one algorithm"));
    }
    per_algorithm
        .iter()
        .map(|(name, values)| {
            median(values).ok_or_else(|| Error::config(format!("no sample objectives for {name}")))
        })
        .try_fold(f64::NEG_INFINITY, |acc, m| m.map(|m| acc.max(m)))
}

/// Earliest time at which any worker's accepted sample objective reaches
/// `f_bar`.
pub fn baseline_convergence_time<'a>(
    traces: impl IntoIterator<Item = &'a [TraceEntry]>,
    f_bar: f64,
) -> Option<f64> {
    traces
        .into_iter()
        .filter_map(|trace| trace.iter().find(|e| e.objective <= f_bar).map(|e| e.time))
        .reduce(f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_error(5.0, 5.0).unwrap(), 0.0);
        assert!((relative_error(1.01 * 7.0, 7.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((relative_error(0.99 * 7.0, 7.0).unwrap() + 1.0).abs() < 1e-12);
        assert!(relative_error(1.0, 0.0).is_err());
        assert!(relative_error(1.0, -2.0).is_err());
    }

    #[test]
    fn summary_examples() {
        let s = Summary::of(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!((s.median, s.min, s.max), (2.0, 1.0, 3.0));
        assert_eq!(s.std, Some(1.0));
        assert_eq!(Summary::of(&[4.0, 1.0, 3.0, 2.0]).unwrap().median, 2.5);
        assert_eq!(Summary::of(&[9.0]).unwrap().std, None);
        assert!(Summary::of(&[]).is_err());
    }

    #[test]
    fn baseline_objective_examples() {
        let one: BTreeMap<String, Vec<f64>> = [("a".to_string(), vec![2.0, 4.0, 6.0])].into();
        assert_eq!(baseline_objective(&one).unwrap(), 4.0);
        let two: BTreeMap<String, Vec<f64>> =
            [("a".to_string(), vec![4.0]), ("b".to_string(), vec![7.0, 6.0, 8.0])].into();
        assert_eq!(baseline_objective(&two).unwrap(), 7.0);
        assert!(baseline_objective(&BTreeMap::new()).is_err());
        let empty: BTreeMap<String, Vec<f64>> = [("a".to_string(), vec![])].into();
        assert!(baseline_objective(&empty).is_err());
    }

    fn entry(time: f64, objective: f64) -> TraceEntry {
        TraceEntry { time, objective }
    }

    #[test]
    fn convergence_time_examples() {
        let w0 = [entry(0.5, 3.0), entry(1.0, 2.0)];
        assert_eq!(baseline_convergence_time([&w0[..]], 3.0), Some(0.5));
        assert_eq!(baseline_convergence_time([&w0[..]], 1.0), None);
        let w1 = [entry(0.2, 9.0), entry(0.7, 2.5)];
        assert_eq!(baseline_convergence_time([&w0[..], &w1[..]], 2.5), Some(0.7));
        assert_eq!(baseline_convergence_time([&w0[..], &w1[..]], 2.0), Some(1.0));
    }

    /// Sorted-copy recomputation of the median, written independently of
    /// `median` above.
    fn oracle_median(values: &[f64]) -> f64 {
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = v.len();
        if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
    }

    #[test]
    fn summaries_match_sort_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let len = rng.random_range(1..=15);
            let values: Vec<f64> = (0..len).map(|_| rng.random_range(-100.0..100.0)).collect();
            let s = Summary::of(&values).unwrap();
            let mut sorted = values.clone();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(s.median, oracle_median(&values));
            assert_eq!(s.min, sorted[0]);
            assert_eq!(s.max, sorted[len - 1]);
            if len >= 2 {
                let mean = values.iter().sum::<f64>() / len as f64;
                let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (len - 1) as f64;
                assert!((s.std.unwrap() - var.sqrt()).abs() <= 1e-9 * var.sqrt().max(1.0));
            }
        }
    }

    proptest! {
        #[test]
        fn relative_error_is_affine(f_star in 1e-6f64..1e9, a in -5.0f64..5.0, b in -5.0f64..5.0) {
            prop_assert_eq!(relative_error(f_star, f_star).unwrap(), 0.0);
            let ea = relative_error(f_star * (1.0 + a), f_star).unwrap();
            let eb = relative_error(f_star * (1.0 + b), f_star).unwrap();
            let mid = relative_error(f_star * (1.0 + (a + b) / 2.0), f_star).unwrap();
            prop_assert!((mid - (ea + eb) / 2.0).abs() <= 1e-9 * (1.0 + ea.abs() + eb.abs()));
        }
    }
}
