//! CSV ingestion and the synthetic dataset generators.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use fuzzydr_core::matrix::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::args::parse_kv;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: Matrix,
    pub labels: Option<Vec<usize>>,
}

/// Ingestion failures; rows and columns are reported one-based.
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path} is empty")]
    EmptyFile { path: PathBuf },
    #[error("row {row} has {got} fields, expected {expected}")]
    RaggedRows { row: usize, expected: usize, got: usize },
    #[error("row {row}, column {col}: cannot parse `{value}` as a number")]
    ParseError { row: usize, col: usize, value: String },
    #[error("no column named `{name}` in the header")]
    MissingLabelColumn { name: String },
    #[error("label column index {index} is out of range for {cols} columns")]
    LabelIndexRange { index: usize, cols: usize },
    #[error("row {row}: label `{value}` is not a nonnegative integer")]
    BadLabel { row: usize, value: String },
    #[error("no feature columns remain after removing the label column")]
    NoFeatureColumns,
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Reads a rectangular numeric CSV into a point matrix, optionally
/// extracting one column as integer labels.
///
/// `label_col` selects by zero-based index when it parses as a number, and
/// by header name otherwise (which requires `has_header`).
pub fn ingest_csv(
    path: &Path,
    has_header: bool,
    label_col: Option<&str>,
) -> Result<Dataset, IngestError> {
    let raw = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines: Vec<&str> = raw.lines().map(|l| l.trim_end_matches('\r')).collect();
    while lines.last().is_some_and(|l| l.is_empty()) {
        lines.pop();
    }
    if lines.is_empty() {
        return Err(IngestError::EmptyFile { path: path.to_path_buf() });
    }

    let mut data_start = 0;
    let mut header: Option<Vec<String>> = None;
    if has_header {
        header = Some(lines[0].split(',').map(|f| f.trim().to_string()).collect());
        data_start = 1;
        if lines.len() == 1 {
            return Err(IngestError::EmptyFile { path: path.to_path_buf() });
        }
    }

    let width = lines[data_start].split(',').count();
    let label_index = match label_col {
        None => None,
        Some(spec) => Some(resolve_label_column(spec, header.as_deref(), width)?),
    };
    if label_index.is_some() && width == 1 {
        return Err(IngestError::NoFeatureColumns);
    }

    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(lines.len() - data_start);
    let mut labels: Vec<usize> = Vec::new();
    for (offset, line) in lines[data_start..].iter().enumerate() {
        let row_no = data_start + offset + 1;
        let fields: Vec<&str> = line.split(',').map(|f| f.trim()).collect();
        if fields.len() != width {
            return Err(IngestError::RaggedRows {
                row: row_no,
                expected: width,
                got: fields.len(),
            });
        }
        let mut row = Vec::with_capacity(width - label_index.is_some() as usize);
        for (col, field) in fields.iter().enumerate() {
            if Some(col) == label_index {
                labels.push(parse_label(field, row_no)?);
                continue;
            }
            let value: f64 = field.parse().map_err(|_| IngestError::ParseError {
                row: row_no,
                col: col + 1,
                value: (*field).to_string(),
            })?;
            row.push(value);
        }
        rows.push(row);
    }
    Ok(Dataset {
        points: Matrix::from_rows(&rows),
        labels: label_index.map(|_| labels),
    })
}

fn resolve_label_column(
    spec: &str,
    header: Option<&[String]>,
    width: usize,
) -> Result<usize, IngestError> {
    if let Ok(index) = spec.parse::<usize>() {
        if index >= width {
            return Err(IngestError::LabelIndexRange { index, cols: width });
        }
        return Ok(index);
    }
    let names = header.ok_or_else(|| IngestError::MissingLabelColumn { name: spec.to_string() })?;
    names
        .iter()
        .position(|n| n == spec)
        .ok_or_else(|| IngestError::MissingLabelColumn { name: spec.to_string() })
}

fn parse_label(field: &str, row: usize) -> Result<usize, IngestError> {
    let bad = || IngestError::BadLabel { row, value: field.to_string() };
    let value: f64 = field.parse().map_err(|_| bad())?;
    if !value.is_finite() || value < 0.0 || value.fract() != 0.0 {
        return Err(bad());
    }
    Ok(value as usize)
}

/// A parsed `--in` value: a file to ingest or a generator to run.
#[derive(Debug, Clone, PartialEq)]
pub enum InputSpec {
    Path(PathBuf),
    Synth(SynthSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SynthSpec {
    /// Isotropic Gaussian clusters centered along the first axis.
    Blobs { clusters: usize, n: usize, dim: usize, sep: f64 },
    /// Points on a circle of radius `r` with Gaussian coordinate noise.
    Circle { n: usize, r: f64, noise: f64 },
    /// A 2-D strip rolled into 3-D.
    SwissLite { n: usize, noise: f64 },
}

/// Interprets `--in`: the three generator names (optionally with
/// `:key=value` parameters) are generators, anything else is a path.
pub fn parse_input(raw: &str) -> Result<InputSpec, CliError> {
    let kind = raw.split_once(':').map_or(raw, |(k, _)| k);
    if !matches!(kind, "blobs" | "circle" | "swiss_lite") {
        return Ok(InputSpec::Path(PathBuf::from(raw)));
    }
    let params = raw.split_once(':').map_or("", |(_, p)| p);
    let pairs = parse_kv(params)?;
    let mut spec = match kind {
        "blobs" => SynthSpec::Blobs { clusters: 2, n: 500, dim: 10, sep: 10.0 },
        "circle" => SynthSpec::Circle { n: 300, r: 1.0, noise: 0.05 },
        _ => SynthSpec::SwissLite { n: 600, noise: 0.0 },
    };
    for (key, value) in pairs {
        apply_synth_param(&mut spec, &key, value, raw)?;
    }
    validate_synth(&spec, raw)?;
    Ok(InputSpec::Synth(spec))
}

fn count_param(value: f64, key: &str, raw: &str) -> Result<usize, CliError> {
    if !value.is_finite() || value < 0.0 || value.fract() != 0.0 {
        return Err(CliError::Usage(format!("`{key}` must be a nonnegative integer in `{raw}`")));
    }
    Ok(value as usize)
}

fn apply_synth_param(
    spec: &mut SynthSpec,
    key: &str,
    value: f64,
    raw: &str,
) -> Result<(), CliError> {
    let unknown = || CliError::Usage(format!("unknown key `{key}` in `{raw}`"));
    match spec {
        SynthSpec::Blobs { clusters, n, dim, sep } => match key {
            "c" => *clusters = count_param(value, key, raw)?,
            "n" => *n = count_param(value, key, raw)?,
            "d" => *dim = count_param(value, key, raw)?,
            "sep" => *sep = value,
            _ => return Err(unknown()),
        },
        SynthSpec::Circle { n, r, noise } => match key {
            "n" => *n = count_param(value, key, raw)?,
            "r" => *r = value,
            "noise" => *noise = value,
            _ => return Err(unknown()),
        },
        SynthSpec::SwissLite { n, noise } => match key {
            "n" => *n = count_param(value, key, raw)?,
            "noise" => *noise = value,
            _ => return Err(unknown()),
        },
    }
    Ok(())
}

fn validate_synth(spec: &SynthSpec, raw: &str) -> Result<(), CliError> {
    let bad = |msg: &str| CliError::Usage(format!("{msg} in `{raw}`"));
    match *spec {
        SynthSpec::Blobs { clusters, n, dim, sep } => {
            if clusters == 0 || n == 0 || dim == 0 {
                return Err(bad("`c`, `n`, and `d` must be positive"));
            }
            if clusters > n {
                return Err(bad("`c` must not exceed `n`"));
            }
            if !(sep >= 0.0) {
                return Err(bad("`sep` must be nonnegative"));
            }
        }
        SynthSpec::Circle { n, r, noise } => {
            if n == 0 {
                return Err(bad("`n` must be positive"));
            }
            if !(r > 0.0) {
                return Err(bad("`r` must be positive"));
            }
            if !(noise >= 0.0) {
                return Err(bad("`noise` must be nonnegative"));
            }
        }
        SynthSpec::SwissLite { n, noise } => {
            if n == 0 {
                return Err(bad("`n` must be positive"));
            }
            if !(noise >= 0.0) {
                return Err(bad("`noise` must be nonnegative"));
            }
        }
    }
    Ok(())
}

/// Generates the dataset for a spec; bit-identical for a fixed seed.
pub fn synth(spec: &SynthSpec, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *spec {
        SynthSpec::Blobs { clusters, n, dim, sep } => {
            let mut rows = Vec::with_capacity(n);
            let mut labels = Vec::with_capacity(n);
            for i in 0..n {
                let cluster = i % clusters;
                let offset = (cluster as f64 - (clusters as f64 - 1.0) / 2.0) * sep;
                let mut row: Vec<f64> =
                    (0..dim).map(|_| standard_normal(&mut rng)).collect();
                row[0] += offset;
                rows.push(row);
                labels.push(cluster);
            }
            Dataset { points: Matrix::from_rows(&rows), labels: Some(labels) }
        }
        SynthSpec::Circle { n, r, noise } => {
            let mut rows = Vec::with_capacity(n);
            for i in 0..n {
                let angle = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                rows.push(vec![
                    r * angle.cos() + noise * standard_normal(&mut rng),
                    r * angle.sin() + noise * standard_normal(&mut rng),
                ]);
            }
            Dataset { points: Matrix::from_rows(&rows), labels: None }
        }
        SynthSpec::SwissLite { n, noise } => {
            let mut rows = Vec::with_capacity(n);
            for _ in 0..n {
                let t = 1.5 * std::f64::consts::PI * (1.0 + 2.0 * rng.gen::<f64>());
                let height = 10.0 * rng.gen::<f64>();
                rows.push(vec![
                    t * t.cos() + noise * standard_normal(&mut rng),
                    height + noise * standard_normal(&mut rng),
                    t * t.sin() + noise * standard_normal(&mut rng),
                ]);
            }
            Dataset { points: Matrix::from_rows(&rows), labels: None }
        }
    }
}

/// Loads `--in` either way; generators take the run seed.
pub fn load_input(
    raw: &str,
    has_header: bool,
    label_col: Option<&str>,
    seed: u64,
) -> Result<Dataset, CliError> {
    match parse_input(raw)? {
        InputSpec::Path(path) => {
            if !path.is_file() {
                return Err(CliError::Data(format!(
                    "input `{}` is neither a readable file nor a generator name",
                    path.display()
                )));
            }
            Ok(ingest_csv(&path, has_header, label_col)?)
        }
        InputSpec::Synth(spec) => Ok(synth(&spec, seed)),
    }
}

// Box-Muller; u is pushed away from 0 so the log stays finite.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = 1.0 - rng.gen::<f64>();
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

/// Writes a matrix as headerless CSV, one row per line, `{}`-formatted so
/// values round-trip exactly.
pub fn write_matrix_csv(path: &Path, m: &Matrix) -> Result<(), CliError> {
    let mut out = String::new();
    for i in 0..m.rows() {
        let fields: Vec<String> = m.row(i).iter().map(|v| format!("{v}")).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

pub fn write_labels_csv(path: &Path, labels: &[usize]) -> Result<(), CliError> {
    let mut out = String::new();
    for l in labels {
        out.push_str(&format!("{l}\n"));
    }
    write_file(path, out.as_bytes())
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = fs::File::create(path)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(bytes)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blobs_labels_are_balanced_and_separated() {
        let spec = SynthSpec::Blobs { clusters: 2, n: 100, dim: 4, sep: 10.0 };
        let data = synth(&spec, 7);
        let labels = data.labels.unwrap();
        assert_eq!(labels.iter().filter(|&&l| l == 0).count(), 50);
        assert_eq!(labels.iter().filter(|&&l| l == 1).count(), 50);
        // Clusters sit at -5 and +5 on the first axis; unit noise cannot
        // cross the midpoint by 5 sigma in 100 draws.
        for (i, &label) in labels.iter().enumerate() {
            let x = data.points.get(i, 0);
            assert!(if label == 0 { x < 0.0 } else { x > 0.0 }, "point {i} at {x}");
        }
    }

    #[test]
    fn noiseless_circle_lies_on_the_circle() {
        let data = synth(&SynthSpec::Circle { n: 50, r: 2.0, noise: 0.0 }, 0);
        for i in 0..50 {
            let (x, y) = (data.points.get(i, 0), data.points.get(i, 1));
            assert!(((x * x + y * y).sqrt() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn synth_is_deterministic_per_seed() {
        let spec = SynthSpec::SwissLite { n: 40, noise: 0.1 };
        assert_eq!(synth(&spec, 3), synth(&spec, 3));
        assert_ne!(synth(&spec, 3), synth(&spec, 4));
    }

    #[test]
    fn input_specs_split_generators_from_paths() {
        assert!(matches!(parse_input("data/points.csv").unwrap(), InputSpec::Path(_)));
        assert!(matches!(
            parse_input("blobs").unwrap(),
            InputSpec::Synth(SynthSpec::Blobs { clusters: 2, n: 500, dim: 10, .. })
        ));
        let InputSpec::Synth(SynthSpec::Circle { n, r, noise }) =
            parse_input("circle:n=10,r=3,noise=0").unwrap()
        else {
            panic!("expected a circle spec");
        };
        assert_eq!((n, r, noise), (10, 3.0, 0.0));
        assert!(parse_input("blobs:c=0").is_err());
        assert!(parse_input("circle:bogus=1").is_err());
    }
}
