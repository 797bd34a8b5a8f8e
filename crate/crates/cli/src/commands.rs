use std::fmt;
use std::path::Path;

use hpclust::bench::{brute_force_mssc, gen_blobs, run_campaign, Algorithm, BlobSpec, Campaign};
use hpclust::engine::{ClockKind, PhaseSplit};
use hpclust::io::{load_dataset, save_centroids, save_dataset, save_labels, save_results, summary_path, TableFile};
use hpclust::{minmax_normalize, Dataset, Error};

use crate::{BenchArgs, ClockArg, ClusterArgs, GenArgs, OracleArgs, RunArgs, TableArgs};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(e) => match e {
                Error::Config(_) | Error::DegenerateCentroid(_) => 3,
                Error::DimensionMismatch { .. }
                | Error::InvalidData(_)
                | Error::EmptyFile { .. }
                | Error::RaggedRow { .. }
                | Error::Parse { .. }
                | Error::Format { .. }
                | Error::Io { .. } => 4,
                Error::TooLarge { .. } => 5,
                Error::NoSolution => 6,
            },
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(msg) => f.write_str(msg),
            Failure::Core(e) => e.fmt(f),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn delimiter(c: char) -> Outcome<u8> {
    u8::try_from(c)
        .ok()
        .filter(u8::is_ascii)
        .ok_or_else(|| Failure::Usage(format!("delimiter {c:?} is not a single ASCII character")))
}

fn load(path: &Path, table: &TableArgs, normalize: bool) -> Outcome<Dataset> {
    let file = TableFile::new(path)
        .delimiter(delimiter(table.delimiter)?)
        .has_header(table.header);
    let x = load_dataset(&file)?;
    Ok(if normalize { minmax_normalize(&x) } else { x })
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let seed = rand::random();
        eprintln!("seed: {seed}");
        seed
    })
}

/// Campaign settings shared by `cluster` and `bench`.
fn campaign(name: String, k_values: Vec<usize>, n_exec: usize, seed: u64, run: &RunArgs) -> Outcome<Campaign> {
    let time_limit = match (run.time_limit, run.max_samples, run.t1, run.t2) {
        (Some(t), ..) => Some(t),
        (None, Some(_), ..) => None,
        (None, None, Some(a), Some(b)) => Some(a + b),
        (None, None, ..) => Some(3.0),
    };
    let split = match time_limit {
        Some(t) => {
            let competitive = run.t1.unwrap_or_else(|| run.t2.map_or(t / 2.0, |b| t - b));
            PhaseSplit::Seconds {
                competitive,
                cooperative: run.t2.unwrap_or(t - competitive),
            }
        }
        None => {
            if run.t1.is_some() || run.t2.is_some() {
                return Err(Failure::Usage("--t1/--t2 need a time limit".into()));
            }
            let n = run.max_samples.expect("sample budget without time limit");
            PhaseSplit::Samples {
                competitive: n / 2,
                cooperative: n - n / 2,
            }
        }
    };
    let clock = match run.clock {
        ClockArg::Wall => ClockKind::Wall,
        ClockArg::Work => ClockKind::Work,
        ClockArg::Auto if time_limit.is_some() => ClockKind::Wall,
        ClockArg::Auto => ClockKind::Work,
    };
    Ok(Campaign {
        sample_size: run.sample_size.map(|s| s as usize),
        workers: run.workers as usize,
        time_limit,
        max_samples: run.max_samples,
        split: Some(split),
        segment_size: run.segment_size.map(|p| p as usize),
        clock,
        ..Campaign::new(name, k_values, n_exec, seed)
    })
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn join<T: ToString>(values: impl IntoIterator<Item = T>) -> String {
    values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

pub fn cluster(args: ClusterArgs) -> Outcome {
    let x = load(&args.input, &args.table, args.run.normalize)?;
    let seed = resolve_seed(args.run.seed);
    let k = args.k as usize;
    let algorithm = Algorithm::from(args.strategy);
    let c = campaign(file_name(&args.input), vec![k], 1, seed, &args.run)?;
    let result = c.run_one(&x, algorithm, k, seed)?;

    match &args.centroids_out {
        Some(path) => save_centroids(path, &result.centroids, b',')?,
        None => {
            for j in 0..result.centroids.k() {
                println!("{}", join(result.centroids.center(j)));
            }
        }
    }
    if let Some(path) = &args.assign_out {
        let assignment = result.assignment.as_ref().ok_or(Error::NoSolution)?;
        save_labels(path, assignment)?;
    }
    let samples = result.samples_per_worker();
    println!(
        "objective={} t={} n_d={} samples_per_worker={}",
        result.full_objective.ok_or(Error::NoSolution)?,
        result.clustering_time,
        result.distance_evals,
        if samples.is_empty() { "-".to_string() } else { join(samples) },
    );
    Ok(())
}

pub fn bench(args: BenchArgs) -> Outcome {
    let seed = resolve_seed(args.run.seed);
    let (name, x, reference, k_default) = match (&args.input, args.blobs, args.blobs_i) {
        (Some(path), ..) => (file_name(path), load(path, &args.table, args.run.normalize)?, None, None),
        (None, m, i) => {
            let points = match (m, i) {
                (Some(m), _) => m,
                (None, Some(i)) => 3usize
                    .checked_pow(i + 7)
                    .ok_or_else(|| Failure::Usage(format!("--blobs-i {i} is too large")))?,
                (None, None) => unreachable!("clap requires an input"),
            };
            let spec = BlobSpec::new(points, args.blobs_seed.unwrap_or(seed));
            let (x, truth) = gen_blobs(&spec)?;
            let name = format!("blobs-{points}");
            if args.run.normalize {
                (name, minmax_normalize(&x), None, Some(spec.num_blobs))
            } else {
                let centers = hpclust::CentroidSet::from_rows(&truth.centers.rows().collect::<Vec<_>>())?;
                (name, x, Some(centers), Some(spec.num_blobs))
            }
        }
    };
    let k_values = if args.k_list.is_empty() {
        vec![k_default.expect("clap requires --k-list without blobs")]
    } else {
        args.k_list.clone()
    };
    let algorithms = if args.algorithms.iter().any(|a| a == "all") {
        Algorithm::ALL.to_vec()
    } else {
        args.algorithms
            .iter()
            .map(|a| a.parse::<Algorithm>().map_err(|e| Failure::Usage(e.to_string())))
            .collect::<Outcome<Vec<_>>>()?
    };

    let mut c = campaign(name, k_values, args.n_exec as usize, seed, &args.run)?;
    c.algorithms = algorithms;
    c.reference = reference;
    if let Some(f) = args.f_star {
        c.f_star = c.k_values.iter().map(|&k| (k, f)).collect();
    }
    let series = run_campaign(&x, &c)?;
    save_results(&series, &args.out)?;

    println!("{:<12} {:>4} {:>12} {:>12} {:>5}", "algorithm", "k", "eps_med", "t_med", "succ");
    for s in &series {
        println!(
            "{:<12} {:>4} {:>12.4} {:>12.4} {:>5}",
            s.algorithm, s.k, s.epsilon.median, s.t.median, s.succ
        );
    }
    println!(
        "wrote {} records to {} and the summary to {}",
        series.iter().map(|s| s.records.len()).sum::<usize>(),
        args.out.display(),
        summary_path(&args.out).display()
    );
    Ok(())
}

pub fn gen(args: GenArgs) -> Outcome {
    let num_points = match (args.m, args.i) {
        (Some(m), _) => m,
        (None, Some(i)) => 3usize
            .checked_pow(i + 7)
            .ok_or_else(|| Failure::Usage(format!("--i {i} is too large")))?,
        (None, None) => unreachable!("clap requires --m or --i"),
    };
    let spec = BlobSpec {
        num_points,
        features: args.features,
        num_blobs: args.num_blobs,
        center_box: (args.center_min, args.center_max),
        std_range: (args.std_min, args.std_max),
        noise_points: args.noise,
        noise_box: (args.noise_min, args.noise_max),
        seed: resolve_seed(args.seed),
    };
    let (x, truth) = gen_blobs(&spec)?;
    save_dataset(&args.out, &x, b',')?;
    if let Some(path) = &args.centers_out {
        save_dataset(path, &truth.centers, b',')?;
    }
    println!("wrote {} rows of {} features to {}", x.m(), x.n(), args.out.display());
    Ok(())
}

pub fn oracle(args: OracleArgs) -> Outcome {
    let x = load(&args.input, &args.table, false)?;
    let (centroids, objective) = brute_force_mssc(&x, args.k as usize)?;
    println!("{objective:?}");
    for j in centroids.active() {
        println!("{}", join(centroids.center(j)));
    }
    Ok(())
}
