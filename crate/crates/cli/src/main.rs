mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hpclust::bench::Algorithm;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  invalid command line
  3  invalid configuration
  4  unreadable or malformed data, or an unwritable output
  5  instance too large for the exhaustive oracle
  6  no solution produced";

#[derive(Parser, Debug)]
#[command(name = "hpclust", version, about = "Parallel minimum sum-of-squares clustering on random samples")]
#[command(after_help = EXIT_CODES)]
struct Cli {
    /// Threads for the data-parallel kernels [default: one per core]
    #[arg(long, global = true, env = "HPCLUST_THREADS", value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cluster a dataset once and write the centroids
    Cluster(ClusterArgs),
    /// Run every algorithm repeatedly and write a results table
    Bench(BenchArgs),
    /// Generate a Gaussian blob dataset with uniform noise
    Gen(GenArgs),
    /// Solve a tiny instance exactly by enumerating all partitions
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
struct TableArgs {
    /// Field delimiter of the input file
    #[arg(long, default_value_t = ',')]
    delimiter: char,

    /// The input file starts with a header line
    #[arg(long)]
    header: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Inner,
    Competitive,
    Cooperative,
    Hybrid,
    Forgy,
    Pbk,
}

impl From<StrategyArg> for Algorithm {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Inner => Algorithm::Inner,
            StrategyArg::Competitive => Algorithm::Competitive,
            StrategyArg::Cooperative => Algorithm::Cooperative,
            StrategyArg::Hybrid => Algorithm::Hybrid,
            StrategyArg::Forgy => Algorithm::Forgy,
            StrategyArg::Pbk => Algorithm::Pbk,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ClockArg {
    /// Wall seconds under a time limit, distance evaluations under a sample budget
    Auto,
    /// Wall-clock seconds
    Wall,
    /// Distance evaluations performed (reproducible)
    Work,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Rows per sample [default: min(5000, m - 1000), or m when m <= 1000]
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    sample_size: Option<u64>,

    /// Parallel workers (inner always uses one)
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    workers: u64,

    /// Time budget in seconds [default: 3, or --t1 + --t2; none when --max-samples is given]
    #[arg(long)]
    time_limit: Option<f64>,

    /// Samples per worker; without a time limit, runs in deterministic rounds
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_samples: Option<u64>,

    /// Competitive phase of the hybrid strategy in seconds [default: half the time limit]
    #[arg(long)]
    t1: Option<f64>,

    /// Cooperative phase of the hybrid strategy in seconds [default: the rest of the time limit]
    #[arg(long)]
    t2: Option<f64>,

    /// Rows per PBK-BDC segment [default: the sample size]
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    segment_size: Option<u64>,

    /// What the reported times measure
    #[arg(long, value_enum, default_value_t = ClockArg::Auto)]
    clock: ClockArg,

    /// Master seed for all randomness [default: drawn from the OS and printed]
    #[arg(long, env = "HPCLUST_SEED")]
    seed: Option<u64>,

    /// Min-max normalize every column to [0, 1] before clustering
    #[arg(long)]
    normalize: bool,
}

#[derive(Args, Debug)]
struct ClusterArgs {
    /// Input data, one row per point
    #[arg(long)]
    input: PathBuf,

    #[command(flatten)]
    table: TableArgs,

    /// Number of clusters
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,

    #[arg(long, value_enum)]
    strategy: StrategyArg,

    #[command(flatten)]
    run: RunArgs,

    /// Write the final centroids here [default: print them]
    #[arg(long)]
    centroids_out: Option<PathBuf>,

    /// Write the cluster index of every input row here
    #[arg(long)]
    assign_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Input data, one row per point
    #[arg(long, required_unless_present_any = ["blobs", "blobs_i"], conflicts_with_all = ["blobs", "blobs_i"])]
    input: Option<PathBuf>,

    #[command(flatten)]
    table: TableArgs,

    /// Benchmark on generated blobs with this many blob points (plus noise)
    #[arg(long, conflicts_with = "blobs_i")]
    blobs: Option<usize>,

    /// Benchmark on generated blobs with 3^(i+7) blob points (plus noise)
    #[arg(long)]
    blobs_i: Option<u32>,

    /// Seed for the blob generator [default: the master seed]
    #[arg(long)]
    blobs_seed: Option<u64>,

    /// Comma-separated cluster counts [default: 10 for blobs]
    #[arg(long, value_delimiter = ',', required_unless_present_any = ["blobs", "blobs_i"])]
    k_list: Vec<usize>,

    /// Comma-separated algorithms, or "all"
    #[arg(long, value_delimiter = ',', default_value = "all")]
    algorithms: Vec<String>,

    /// Repetitions per algorithm and k
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    n_exec: u64,

    /// Reference objective for the relative error, applied to every k [default: best objective seen]
    #[arg(long)]
    f_star: Option<f64>,

    #[command(flatten)]
    run: RunArgs,

    /// Results table; the per-series summary goes next to it as <name>.summary.<ext>
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Blob points, noise excluded
    #[arg(long, required_unless_present = "i", conflicts_with = "i")]
    m: Option<usize>,

    /// Use 3^(i+7) blob points
    #[arg(long)]
    i: Option<u32>,

    /// Features per point
    #[arg(long, default_value_t = 10)]
    features: usize,

    /// Number of blobs
    #[arg(long, default_value_t = 10)]
    num_blobs: usize,

    /// Lower bound of the box blob centers are drawn from
    #[arg(long, default_value_t = -40.0, allow_hyphen_values = true)]
    center_min: f64,

    /// Upper bound of the box blob centers are drawn from
    #[arg(long, default_value_t = 40.0, allow_hyphen_values = true)]
    center_max: f64,

    /// Smallest blob standard deviation
    #[arg(long, default_value_t = 0.0)]
    std_min: f64,

    /// Largest blob standard deviation
    #[arg(long, default_value_t = 10.0)]
    std_max: f64,

    /// Uniform noise rows appended after the blobs
    #[arg(long, default_value_t = 500)]
    noise: usize,

    /// Lower bound of the noise box
    #[arg(long, default_value_t = -50.0, allow_hyphen_values = true)]
    noise_min: f64,

    /// Upper bound of the noise box
    #[arg(long, default_value_t = 50.0, allow_hyphen_values = true)]
    noise_max: f64,

    /// Generator seed [default: drawn from the OS and printed]
    #[arg(long, env = "HPCLUST_SEED")]
    seed: Option<u64>,

    /// Dataset output file
    #[arg(long)]
    out: PathBuf,

    /// Write the generator's blob centers here
    #[arg(long)]
    centers_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Input data, one row per point
    #[arg(long)]
    input: PathBuf,

    #[command(flatten)]
    table: TableArgs,

    /// Number of clusters
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads as usize)
            .build_global()
        {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let outcome = match cli.command {
        Command::Cluster(args) => commands::cluster(args),
        Command::Bench(args) => commands::bench(args),
        Command::Gen(args) => commands::gen(args),
        Command::Oracle(args) => commands::oracle(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
