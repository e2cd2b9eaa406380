//! Embedding quality metrics: neighborhood trustworthiness, Procrustes
//! alignment, persistence diagrams on seeded subsamples, and Wasserstein
//! distances between them.

mod persistence;
mod procrustes;
mod trust;
mod wasserstein;

pub use persistence::{persistence_by_rank, vr_persistence, Diagram, PERSISTENCE_CAP, RANK_ORACLE_CAP};
pub use procrustes::procrustes_global;
pub use trust::trustworthiness;
pub use wasserstein::wasserstein2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embed::{pca_init, EmbedError};
use crate::filtration::DistanceMatrix;
use crate::matrix::Matrix;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("need 1 <= k with 2k < n, got k = {k} and n = {n}")]
    BadNeighborCount { k: usize, n: usize },
    #[error("row counts differ: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("reference configuration has zero norm")]
    ZeroNorm,
    #[error("{count} points exceed the cap of {cap}")]
    CapExceeded { count: usize, cap: usize },
    #[error("need at least {need} points, got {n}")]
    TooFewPoints { n: usize, need: usize },
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

/// Settings for `evaluate`. The subsample size is clamped to the number of
/// points; `threads` above one distributes the per-subsample diagrams over
/// scoped threads without changing the result.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    pub neighbors: usize,
    pub subsample: usize,
    pub repeats: usize,
    pub seed: u64,
    pub threads: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { neighbors: 15, subsample: 120, repeats: 10, seed: 0, threads: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MetricReport {
    pub trustworthiness: f64,
    #[serde(rename = "procrustesG")]
    pub procrustes_g: f64,
    #[serde(rename = "wassersteinH0")]
    pub wasserstein_h0: f64,
    #[serde(rename = "wassersteinH1")]
    pub wasserstein_h1: f64,
    pub config: EvalConfig,
}

/// Scores an embedding against its source points.
///
/// Trustworthiness and the Procrustes score (against a principal component
/// reference) use the full data; the Wasserstein scores average persistence
/// mismatches over seeded common subsamples, each point set normalized to
/// unit root-mean-square radius so the two spaces are scale comparable.
pub fn evaluate(
    points: &Matrix,
    coords: &Matrix,
    config: &EvalConfig,
) -> Result<MetricReport, EvalError> {
    let n = points.rows();
    if coords.rows() != n {
        return Err(EvalError::SizeMismatch { left: n, right: coords.rows() });
    }
    if n < 4 {
        return Err(EvalError::TooFewPoints { n, need: 4 });
    }
    let dx = DistanceMatrix::from_points(points);
    let dy = DistanceMatrix::from_points(coords);
    let trustworthiness = trust::trustworthiness(&dx, &dy, config.neighbors)?;
    let reference = pca_init(points, coords.cols(), config.seed)?.coords;
    let procrustes_g = procrustes::procrustes_global(coords, &reference)?;

    let m = config.subsample.clamp(3, n);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let subsets: Vec<Vec<usize>> = (0..config.repeats)
        .map(|_| {
            let mut idx: Vec<usize> = (0..n).collect();
            for t in 0..m {
                let r = rng.gen_range(t..n);
                idx.swap(t, r);
            }
            idx.truncate(m);
            idx.sort_unstable();
            idx
        })
        .collect();

    let pairs = diagram_distances(points, coords, &subsets, config.threads)?;
    let reps = pairs.len().max(1) as f64;
    let wasserstein_h0 = pairs.iter().map(|p| p.0).sum::<f64>() / reps;
    let wasserstein_h1 = pairs.iter().map(|p| p.1).sum::<f64>() / reps;

    Ok(MetricReport {
        trustworthiness,
        procrustes_g,
        wasserstein_h0,
        wasserstein_h1,
        config: config.clone(),
    })
}

/// Wasserstein distances between the subsampled diagrams of the two spaces,
/// in subset order.
fn diagram_distances(
    points: &Matrix,
    coords: &Matrix,
    subsets: &[Vec<usize>],
    threads: usize,
) -> Result<Vec<(f64, f64)>, EvalError> {
    if threads <= 1 || subsets.len() <= 1 {
        return subsets.iter().map(|s| one_distance(points, coords, s)).collect();
    }
    let workers = threads.min(subsets.len());
    let chunk = subsets.len().div_ceil(workers);
    let results: Vec<Result<Vec<(f64, f64)>, EvalError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = subsets
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter().map(|s| one_distance(points, coords, s)).collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(subsets.len());
    for r in results {
        out.extend(r?);
    }
    Ok(out)
}

fn one_distance(
    points: &Matrix,
    coords: &Matrix,
    subset: &[usize],
) -> Result<(f64, f64), EvalError> {
    let dx = normalized_submatrix(points, subset);
    let dy = normalized_submatrix(coords, subset);
    let a = vr_persistence(&dx)?;
    let b = vr_persistence(&dy)?;
    Ok((wasserstein2(&a.h0, &b.h0), wasserstein2(&a.h1, &b.h1)))
}

/// Selected rows, centered and scaled to unit root-mean-square radius.
fn normalized_submatrix(m: &Matrix, subset: &[usize]) -> DistanceMatrix {
    let rows: Vec<Vec<f64>> = subset.iter().map(|&i| m.row(i).to_vec()).collect();
    let mut sub = Matrix::from_rows(&rows);
    sub.center_columns();
    let rms = sub.frobenius_norm() / (subset.len() as f64).sqrt();
    if rms > 0.0 {
        sub.scale_in_place(1.0 / rms);
    }
    DistanceMatrix::from_points(&sub)
}
