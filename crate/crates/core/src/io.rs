//! Delimited text files: datasets, centroids, labels and benchmark tables.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so a file
//! read back yields bit-identical values.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use csv::{ReaderBuilder, StringRecord, Trim, WriterBuilder};

use crate::bench::{MetricRecord, RunSeries, Summary};
use crate::data::{Assignment, CentroidSet, Dataset};
use crate::error::{Error, Result};

/// A delimited numeric table on disk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableFile {
    pub path: PathBuf,
    pub delimiter: u8,
    pub has_header: bool,
}

impl TableFile {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self {
            path: path.into(),
            delimiter: b',',
            has_header: false,
        }
    }

    pub fn delimiter(mut self, delimiter: u8) -> Self {
        self.delimiter = delimiter;
        self
    }

    pub fn has_header(mut self, has_header: bool) -> Self {
        self.has_header = has_header;
        self
    }
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    match err.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        kind => Error::Format {
            path: path.to_path_buf(),
            message: format!("{kind:?}"),
        },
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

/// Reads an `m × n` table. Rows and columns in error messages are 1-based
/// line and field numbers.
pub fn load_dataset(file: &TableFile) -> Result<Dataset> {
    let path = file.path.as_path();
    let mut reader = ReaderBuilder::new()
        .delimiter(file.delimiter)
        .has_headers(file.has_header)
        .flexible(true)
        .trim(Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;

    let mut values = Vec::new();
    let mut n = None;
    let mut record = StringRecord::new();
    while reader.read_record(&mut record).map_err(|e| csv_error(path, e))? {
        let row = record.position().map_or(0, |p| p.line() as usize);
        let expected = *n.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::RaggedRow {
                path: path.to_path_buf(),
                row,
                expected,
                found: record.len(),
            });
        }
        for (col, field) in record.iter().enumerate() {
            match field.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        row,
                        col: col + 1,
                        field: field.to_string(),
                    })
                }
            }
        }
    }
    match n {
        Some(n) => Dataset::new(values, n),
        None => Err(Error::EmptyFile {
            path: path.to_path_buf(),
        }),
    }
}

fn write_rows<'a>(
    path: &Path,
    delimiter: u8,
    rows: impl Iterator<Item = &'a [f64]>,
) -> Result<()> {
    let mut writer = WriterBuilder::new()
        .delimiter(delimiter)
        .from_writer(create(path)?);
    for row in rows {
        writer
            .write_record(row.iter().map(f64::to_string))
            .map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Writes one row per data point, no header.
pub fn save_dataset(path: impl AsRef<Path>, x: &Dataset, delimiter: u8) -> Result<()> {
    write_rows(path.as_ref(), delimiter, x.rows())
}

/// Writes one row per center, no header. Degenerate centers keep their row
/// so that line `j` is always center `j`.
pub fn save_centroids(path: impl AsRef<Path>, c: &CentroidSet, delimiter: u8) -> Result<()> {
    if c.has_degenerate() {
        log::warn!("{} of {} centers are degenerate", c.degenerate_count(), c.k());
    }
    write_rows(path.as_ref(), delimiter, (0..c.k()).map(|j| c.center(j)))
}

/// Writes one cluster index per line.
pub fn save_labels(path: impl AsRef<Path>, assignment: &Assignment) -> Result<()> {
    let path = path.as_ref();
    let mut out = std::io::BufWriter::new(create(path)?);
    for label in &assignment.labels {
        writeln!(out, "{label}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub const RECORD_COLUMNS: [&str; 18] = [
    "dataset",
    "algorithm",
    "k",
    "repetition",
    "seed",
    "objective",
    "sample_objective",
    "f_star",
    "epsilon",
    "t",
    "f_bar",
    "t_bar",
    "n_d",
    "s",
    "n_s",
    "T",
    "T1",
    "T2",
];

pub const SUMMARY_COLUMNS: [&str; 25] = [
    "dataset",
    "k",
    "algorithm",
    "n_exec",
    "f_star",
    "f_bar",
    "objective_min",
    "objective_med",
    "objective_max",
    "epsilon_min",
    "epsilon_med",
    "epsilon_max",
    "epsilon_std",
    "t_bar_med",
    "t_bar_std",
    "t_med",
    "t_std",
    "s",
    "n_s_med",
    "T",
    "T1",
    "T2",
    "n_d_med",
    "n_d_std",
    "succ",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn record_fields(r: &MetricRecord) -> Vec<String> {
    vec![
        r.dataset.clone(),
        r.algorithm.clone(),
        r.k.to_string(),
        r.repetition.to_string(),
        r.seed.to_string(),
        r.objective.to_string(),
        opt(r.sample_objective),
        r.f_star.to_string(),
        r.epsilon.to_string(),
        r.t.to_string(),
        opt(r.f_bar),
        opt(r.t_bar),
        r.n_d.to_string(),
        opt(r.s),
        opt(r.n_s),
        opt(r.time_limit),
        opt(r.t1),
        opt(r.t2),
    ]
}

fn summary_fields(s: &RunSeries) -> Vec<String> {
    let first = &s.records[0];
    let std = |v: &Summary| opt(v.std);
    vec![
        s.dataset.clone(),
        s.k.to_string(),
        s.algorithm.clone(),
        s.records.len().to_string(),
        first.f_star.to_string(),
        opt(first.f_bar),
        s.objective.min.to_string(),
        s.objective.median.to_string(),
        s.objective.max.to_string(),
        s.epsilon.min.to_string(),
        s.epsilon.median.to_string(),
        s.epsilon.max.to_string(),
        std(&s.epsilon),
        opt(s.t_bar.map(|v| v.median)),
        opt(s.t_bar.and_then(|v| v.std)),
        s.t.median.to_string(),
        std(&s.t),
        opt(first.s),
        opt(s.n_s.map(|v| v.median)),
        opt(first.time_limit),
        opt(first.t1),
        opt(first.t2),
        s.n_d.median.to_string(),
        std(&s.n_d),
        s.succ.to_string(),
    ]
}

/// Sibling file that holds the per-series summary block:
/// `results.csv` → `results.summary.csv`.
pub fn summary_path(path: impl AsRef<Path>) -> PathBuf {
    let path = path.as_ref();
    let stem = path.file_stem().map_or_else(Default::default, |s| s.to_string_lossy().into_owned());
    let name = match path.extension() {
        Some(ext) => format!("{stem}.summary.{}", ext.to_string_lossy()),
        None => format!("{stem}.summary"),
    };
    path.with_file_name(name)
}

fn write_table<I, R>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut writer = WriterBuilder::new().from_writer(create(path)?);
    writer.write_record(header).map_err(|e| csv_error(path, e))?;
    for row in rows {
        writer.write_record(row).map_err(|e| csv_error(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Writes one line per (algorithm, k, repetition) to `path`, and one line per
/// series to [`summary_path`]`(path)`. Empty optional values are empty fields.
pub fn save_results(series: &[RunSeries], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    write_table(
        path,
        &RECORD_COLUMNS,
        series.iter().flat_map(|s| &s.records).map(record_fields),
    )?;
    write_table(&summary_path(path), &SUMMARY_COLUMNS, series.iter().map(summary_fields))
}

fn parse_field<T: std::str::FromStr>(path: &Path, row: usize, col: usize, field: &str) -> Result<T> {
    field.parse().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        row,
        col: col + 1,
        field: field.to_string(),
    })
}

fn parse_opt<T: std::str::FromStr>(path: &Path, row: usize, col: usize, field: &str) -> Result<Option<T>> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_field(path, row, col, field).map(Some)
    }
}

/// Reads the per-run records written by [`save_results`].
pub fn load_results(path: impl AsRef<Path>) -> Result<Vec<MetricRecord>> {
    let path = path.as_ref();
    let mut reader = ReaderBuilder::new().from_path(path).map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?;
    if header.iter().ne(RECORD_COLUMNS) {
        return Err(Error::Format {
            path: path.to_path_buf(),
            message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let f = |col: usize| &record[col];
        out.push(MetricRecord {
            dataset: f(0).to_string(),
            algorithm: f(1).to_string(),
            k: parse_field(path, row, 2, f(2))?,
            repetition: parse_field(path, row, 3, f(3))?,
            seed: parse_field(path, row, 4, f(4))?,
            objective: parse_field(path, row, 5, f(5))?,
            sample_objective: parse_opt(path, row, 6, f(6))?,
            f_star: parse_field(path, row, 7, f(7))?,
            epsilon: parse_field(path, row, 8, f(8))?,
            t: parse_field(path, row, 9, f(9))?,
            f_bar: parse_opt(path, row, 10, f(10))?,
            t_bar: parse_opt(path, row, 11, f(11))?,
            n_d: parse_field(path, row, 12, f(12))?,
            s: parse_opt(path, row, 13, f(13))?,
            n_s: parse_opt(path, row, 14, f(14))?,
            time_limit: parse_opt(path, row, 15, f(15))?,
            t1: parse_opt(path, row, 16, f(16))?,
            t2: parse_opt(path, row, 17, f(17))?,
        });
    }
    Ok(out)
}
