//! Principal component initialization for the embedding optimizer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::{symmetric_eigen, Matrix};

use super::EmbedError;

/// Eigenvalues at or below this fraction of the leading eigenvalue count as
/// rank deficient; their output columns are replaced with small seeded noise
/// so the optimizer does not start on a degenerate subspace.
pub const RANK_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct PcaInit {
    /// One row per input point, `output_dim` columns.
    pub coords: Matrix,
    /// Fraction of total variance captured by each kept component.
    pub explained_variance: Vec<f64>,
    /// Output columns replaced with seeded noise.
    pub degenerate_components: Vec<usize>,
}

/// Projects centered points onto their leading principal components.
///
/// Deterministic for a fixed seed; the seed only matters when a component is
/// rank deficient and noise is substituted.
pub fn pca_init(points: &Matrix, output_dim: usize, seed: u64) -> Result<PcaInit, EmbedError> {
    let (n, d) = (points.rows(), points.cols());
    if output_dim == 0 || output_dim > d {
        return Err(EmbedError::BadOutputDim { output_dim, input_dim: d });
    }
    if n < 2 {
        return Err(EmbedError::TooFewPoints { n, need: 2 });
    }
    let mut centered = points.clone();
    centered.center_columns();
    let mut cov = centered.transpose_mul(&centered);
    cov.scale_in_place(1.0 / (n - 1) as f64);
    let (eigenvalues, vectors) = symmetric_eigen(&cov);
    let total: f64 = eigenvalues.iter().map(|l| l.max(0.0)).sum();
    let leading = eigenvalues[0].max(0.0);

    let mut coords = Matrix::zeros(n, output_dim);
    for i in 0..n {
        for c in 0..output_dim {
            let mut v = 0.0;
            for j in 0..d {
                v += centered.get(i, j) * vectors.get(j, c);
            }
            coords.set(i, c, v);
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut explained_variance = Vec::with_capacity(output_dim);
    let mut degenerate_components = Vec::new();
    for c in 0..output_dim {
        let lambda = eigenvalues[c].max(0.0);
        explained_variance.push(if total > 0.0 { lambda / total } else { 0.0 });
        if leading == 0.0 || lambda <= RANK_TOLERANCE * leading {
            degenerate_components.push(c);
            for i in 0..n {
                let g = standard_normal(&mut rng);
                coords.set(i, c, 1e-2 * g);
            }
        }
    }
    Ok(PcaInit { coords, explained_variance, degenerate_components })
}

/// Box-Muller draw; `u` is kept away from zero so the log is finite.
pub(super) fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.gen::<f64>();
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}
