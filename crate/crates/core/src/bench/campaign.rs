use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::metrics::{baseline_convergence_time, baseline_objective, relative_error, Summary};
use crate::baselines::{forgy_kmeans, pbk_bdc, PbkConfig};
use crate::data::{CentroidSet, Dataset, DistanceCounter, Kernel};
use crate::engine::{self, ClockKind, ClusteringResult, EngineConfig, PhaseSplit, Strategy};
use crate::error::{Error, Result};
use crate::lloyd::LloydConfig;
use crate::seeding::SeedConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Inner,
    Competitive,
    Cooperative,
    Hybrid,
    Forgy,
    Pbk,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Inner,
        Algorithm::Competitive,
        Algorithm::Cooperative,
        Algorithm::Hybrid,
        Algorithm::Forgy,
        Algorithm::Pbk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Inner => "inner",
            Algorithm::Competitive => "competitive",
            Algorithm::Cooperative => "cooperative",
            Algorithm::Hybrid => "hybrid",
            Algorithm::Forgy => "forgy",
            Algorithm::Pbk => "pbk",
        }
    }

    /// Sample-based engine strategies, as opposed to the full-data baselines.
    pub fn is_sampling(self) -> bool {
        !matches!(self, Algorithm::Forgy | Algorithm::Pbk)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown algorithm {s:?} (expected inner, competitive, cooperative, hybrid, forgy or pbk)"
                ))
            })
    }
}

/// One run of one algorithm.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricRecord {
    pub dataset: String,
    pub algorithm: String,
    pub k: usize,
    pub repetition: usize,
    pub seed: u64,
    /// Objective on the full dataset.
    pub objective: f64,
    /// Best sample objective (sampling algorithms only).
    pub sample_objective: Option<f64>,
    /// Reference objective `epsilon` is measured against.
    pub f_star: f64,
    /// Relative error in percent.
    pub epsilon: f64,
    /// Time of the last incumbent update.
    pub t: f64,
    /// Baseline sample objective the `t_bar` column refers to.
    pub f_bar: Option<f64>,
    /// Time until any worker reached `f_bar`.
    pub t_bar: Option<f64>,
    pub n_d: u64,
    pub s: Option<usize>,
    /// Samples processed, summed over workers.
    pub n_s: Option<u64>,
    pub time_limit: Option<f64>,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
}

/// Repetitions of one (dataset, k, algorithm) triple and their summaries.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSeries {
    pub dataset: String,
    pub algorithm: String,
    pub k: usize,
    pub records: Vec<MetricRecord>,
    pub objective: Summary,
    pub epsilon: Summary,
    pub t: Summary,
    /// Over the repetitions that reached `f_bar`.
    pub t_bar: Option<Summary>,
    pub n_d: Summary,
    pub n_s: Option<Summary>,
    /// Median objective below the mean objective of every other series with
    /// the same dataset and k.
    pub succ: bool,
}

impl RunSeries {
    pub fn mean_objective(&self) -> f64 {
        self.records.iter().map(|r| r.objective).sum::<f64>() / self.records.len() as f64
    }
}

fn summary_of_present(values: impl Iterator<Item = Option<f64>>) -> Result<Option<Summary>> {
    let present: Vec<f64> = values.flatten().collect();
    if present.is_empty() {
        Ok(None)
    } else {
        Summary::of(&present).map(Some)
    }
}

/// Summaries of records sharing dataset, k and algorithm. `succ` starts out
/// false; [`mark_success`] fills it in once the competing series exist.
pub fn summarize(records: Vec<MetricRecord>) -> Result<RunSeries> {
    let first = records
        .first()
        .ok_or_else(|| Error::config("cannot summarize an empty series"))?;
    if records
        .iter()
        .any(|r| r.dataset != first.dataset || r.k != first.k || r.algorithm != first.algorithm)
    {
        return Err(Error::config("records of a series must share dataset, k and algorithm"));
    }
    let column = |f: fn(&MetricRecord) -> f64| records.iter().map(f).collect::<Vec<_>>();
    Ok(RunSeries {
        dataset: first.dataset.clone(),
        algorithm: first.algorithm.clone(),
        k: first.k,
        objective: Summary::of(&column(|r| r.objective))?,
        epsilon: Summary::of(&column(|r| r.epsilon))?,
        t: Summary::of(&column(|r| r.t))?,
        t_bar: summary_of_present(records.iter().map(|r| r.t_bar))?,
        n_d: Summary::of(&column(|r| r.n_d as f64))?,
        n_s: summary_of_present(records.iter().map(|r| r.n_s.map(|v| v as f64)))?,
        succ: false,
        records,
    })
}

/// Sets `succ` on every series: its median objective is lower than the mean
/// objective of each other series with the same dataset and k.
pub fn mark_success(series: &mut [RunSeries]) {
    let means: Vec<f64> = series.iter().map(RunSeries::mean_objective).collect();
    let keys: Vec<(String, usize)> = series.iter().map(|s| (s.dataset.clone(), s.k)).collect();
    for i in 0..series.len() {
        let median = series[i].objective.median;
        series[i].succ = (0..series.len())
            .filter(|&j| j != i && keys[j] == keys[i])
            .all(|j| median < means[j]);
    }
}

/// Default sample size for a dataset of `m` rows: `min(5000, m − 1000)`, or
/// the whole dataset when it has no more than 1000 rows.
pub fn default_sample_size(m: usize) -> usize {
    if m > 1000 {
        5000.min(m - 1000)
    } else {
        m
    }
}

/// A benchmark campaign: every algorithm, for every k, `n_exec` times.
#[derive(Clone, Debug)]
pub struct Campaign {
    pub dataset: String,
    pub k_values: Vec<usize>,
    pub algorithms: Vec<Algorithm>,
    pub n_exec: usize,
    pub seed: u64,
    /// Defaults to [`default_sample_size`].
    pub sample_size: Option<usize>,
    pub workers: usize,
    pub time_limit: Option<f64>,
    pub max_samples: Option<u64>,
    /// Hybrid phases; defaults to half of the budget each.
    pub split: Option<PhaseSplit>,
    /// PBK-BDC segment size; defaults to the sample size.
    pub segment_size: Option<usize>,
    /// Known optimum per k. Otherwise the best objective seen in the campaign.
    pub f_star: BTreeMap<usize, f64>,
    /// Known good centers (e.g. the generator's) competing for `f_star` when
    /// their k matches.
    pub reference: Option<CentroidSet>,
    pub clock: ClockKind,
    pub lloyd: LloydConfig,
    pub seeding: SeedConfig,
}

impl Campaign {
    pub fn new(dataset: impl Into<String>, k_values: Vec<usize>, n_exec: usize, seed: u64) -> Self {
        Self {
            dataset: dataset.into(),
            k_values,
            algorithms: Algorithm::ALL.to_vec(),
            n_exec,
            seed,
            sample_size: None,
            workers: 8,
            time_limit: Some(3.0),
            max_samples: None,
            split: None,
            segment_size: None,
            f_star: BTreeMap::new(),
            reference: None,
            clock: ClockKind::Wall,
            lloyd: LloydConfig::default(),
            seeding: SeedConfig::default(),
        }
    }

    fn hybrid_split(&self) -> Result<PhaseSplit> {
        if let Some(split) = self.split {
            return Ok(split);
        }
        match (self.time_limit, self.max_samples) {
            (Some(t), _) => Ok(PhaseSplit::Seconds {
                competitive: t / 2.0,
                cooperative: t / 2.0,
            }),
            (None, Some(n)) => Ok(PhaseSplit::Samples {
                competitive: n / 2,
                cooperative: n - n / 2,
            }),
            (None, None) => Err(Error::config("either a time limit or a sample budget is required")),
        }
    }

    fn engine_config(&self, algorithm: Algorithm, k: usize, s: usize, seed: u64) -> Result<EngineConfig> {
        let strategy = match algorithm {
            Algorithm::Inner => Strategy::Inner,
            Algorithm::Competitive => Strategy::Competitive,
            Algorithm::Cooperative => Strategy::Cooperative,
            Algorithm::Hybrid => Strategy::Hybrid(self.hybrid_split()?),
            Algorithm::Forgy | Algorithm::Pbk => unreachable!("full-data baselines bypass the engine"),
        };
        Ok(EngineConfig {
            workers: self.workers,
            time_limit: self.time_limit,
            max_samples: self.max_samples,
            master_seed: seed,
            lloyd: self.lloyd,
            seeding: self.seeding,
            clock: self.clock,
            ..EngineConfig::new(k, s, strategy)
        })
    }

    fn validate(&self, m: usize) -> Result<()> {
        if self.k_values.is_empty() || self.algorithms.is_empty() || self.n_exec == 0 {
            return Err(Error::config("a campaign needs at least one k, one algorithm and one repetition"));
        }
        if let Some(&k) = self.k_values.iter().find(|&&k| k == 0 || k > m) {
            return Err(Error::config(format!("k = {k} must lie in [1, {m}]")));
        }
        if let Some((&k, &f)) = self.f_star.iter().find(|(_, &f)| !(f > 0.0 && f.is_finite())) {
            return Err(Error::config(format!("supplied f* = {f} for k = {k} must be positive")));
        }
        Ok(())
    }
}

/// Seed of one run, derived from the campaign seed so that every run is
/// independent yet reproducible.
pub fn run_seed(campaign_seed: u64, k: usize, algorithm: Algorithm, repetition: usize) -> u64 {
    let mut z = campaign_seed;
    for part in [k as u64, algorithm as u64, repetition as u64] {
        // splitmix64 step over the running state
        z = z.wrapping_add(part.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

struct Run {
    algorithm: Algorithm,
    repetition: usize,
    seed: u64,
    result: ClusteringResult,
}

impl Campaign {
    /// Sample size used for a dataset of `m` rows.
    pub fn resolved_sample_size(&self, m: usize) -> usize {
        self.sample_size.unwrap_or_else(|| default_sample_size(m))
    }

    /// One run of `algorithm` with the campaign's settings, seeded directly
    /// by `seed`.
    pub fn run_one(&self, x: &Dataset, algorithm: Algorithm, k: usize, seed: u64) -> Result<ClusteringResult> {
        let s = self.resolved_sample_size(x.m());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match algorithm {
            Algorithm::Forgy => forgy_kmeans(x, k, &self.lloyd, &mut rng, self.clock),
            Algorithm::Pbk => {
                let cfg = PbkConfig {
                    segment_size: self.segment_size.unwrap_or(s),
                    lloyd: self.lloyd,
                };
                pbk_bdc(x, k, &cfg, &mut rng, self.clock).map(|out| out.result)
            }
            _ => engine::run(x, &self.engine_config(algorithm, k, s, seed)?),
        }
    }
}

/// Runs the full (k × algorithm × repetition) cross product and returns one
/// series per (k, algorithm), in campaign order.
pub fn run_campaign(x: &Dataset, c: &Campaign) -> Result<Vec<RunSeries>> {
    c.validate(x.m())?;
    let s = c.resolved_sample_size(x.m());
    let split = if c.algorithms.contains(&Algorithm::Hybrid) {
        Some(c.hybrid_split()?)
    } else {
        None
    };

    let mut all = Vec::new();
    for &k in &c.k_values {
        let mut runs = Vec::new();
        for &algorithm in &c.algorithms {
            for repetition in 0..c.n_exec {
                let seed = run_seed(c.seed, k, algorithm, repetition);
                let result = c.run_one(x, algorithm, k, seed)?;
                log::info!(
                    "k={k} {algorithm} #{repetition}: f = {:?}, t = {:.3}",
                    result.full_objective,
                    result.clustering_time
                );
                runs.push(Run {
                    algorithm,
                    repetition,
                    seed,
                    result,
                });
            }
        }

        let f_star = match c.f_star.get(&k) {
            Some(&f) => f,
            None => {
                let mut best = runs
                    .iter()
                    .filter_map(|r| r.result.full_objective)
                    .fold(f64::INFINITY, f64::min);
                if let Some(reference) = c.reference.as_ref().filter(|r| r.k() == k) {
                    let counter = DistanceCounter::new();
                    let (_, f) = Kernel::new(&counter, true).assign_valid(x, reference)?;
                    best = best.min(f);
                }
                best
            }
        };

        let mut sample_objectives: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for r in runs.iter().filter(|r| r.algorithm.is_sampling()) {
            if let Some(f) = r.result.sample_objective {
                sample_objectives.entry(r.algorithm.name().to_string()).or_default().push(f);
            }
        }
        let f_bar = if sample_objectives.is_empty() {
            None
        } else {
            Some(baseline_objective(&sample_objectives)?)
        };

        let mut grouped: Vec<(Algorithm, Vec<MetricRecord>)> = Vec::new();
        for r in runs {
            let objective = r.result.full_objective.ok_or(Error::NoSolution)?;
            let sampling = r.algorithm.is_sampling();
            let t_bar = f_bar.filter(|_| sampling).and_then(|fb| {
                baseline_convergence_time(r.result.workers.iter().map(|w| w.trace.as_slice()), fb)
            });
            let (t1, t2) = match (r.algorithm, split) {
                (
                    Algorithm::Hybrid,
                    Some(PhaseSplit::Seconds {
                        competitive,
                        cooperative,
                    }),
                ) => (Some(competitive), Some(cooperative)),
                _ => (None, None),
            };
            let record = MetricRecord {
                dataset: c.dataset.clone(),
                algorithm: r.algorithm.name().to_string(),
                k,
                repetition: r.repetition,
                seed: r.seed,
                objective,
                sample_objective: r.result.sample_objective,
                f_star,
                epsilon: relative_error(objective, f_star)?,
                t: r.result.clustering_time,
                f_bar: f_bar.filter(|_| sampling),
                t_bar,
                n_d: r.result.distance_evals,
                s: sampling.then_some(s),
                n_s: sampling.then(|| r.result.samples_per_worker().iter().sum()),
                time_limit: c.time_limit.filter(|_| sampling),
                t1,
                t2,
            };
            match grouped.last_mut() {
                Some((a, records)) if *a == r.algorithm => records.push(record),
                _ => grouped.push((r.algorithm, vec![record])),
            }
        }
        for (_, records) in grouped {
            all.push(summarize(records)?);
        }
    }
    mark_success(&mut all);
    Ok(all)
}
