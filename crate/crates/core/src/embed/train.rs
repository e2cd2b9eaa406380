//! Stochastic gradient training loop for the edge and triplet objectives.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::filtration::DistanceMatrix;
use crate::matrix::Matrix;
use crate::scale::ScaleDistribution;

use super::knn::{exact_knn, fuzzy_edge_weights, local_scaling};
use super::loss::{edge_loss_and_grad, triplet_loss_and_grad, triplet_weight, PointGrad};
use super::pca::{pca_init, standard_normal};
use super::sampling::{sample_negative, sample_positive};
use super::{EmbedError, UPDATE_CLIP};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbedMode {
    /// Match symmetrized nearest-neighbor edge weights against pairwise
    /// closeness in the embedding.
    Edge,
    /// Match three-point weights built from enclosing-ball radii.
    Triplet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitStrategy {
    /// Principal component projection; degenerate components are padded
    /// with small seeded noise.
    Pca,
    /// Seeded Gaussian coordinates at the same small scale as the noise
    /// padding.
    Random,
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub mode: EmbedMode,
    pub init: InitStrategy,
    pub output_dim: usize,
    pub k: usize,
    pub epochs: usize,
    /// Positive triples per batch in triplet mode; unused in edge mode.
    pub batch: usize,
    /// Negative terms drawn per positive term.
    pub neg_rate: usize,
    /// Initial learning rate; decays linearly to zero over the epochs.
    pub alpha0: f64,
    pub phi_x: ScaleDistribution,
    pub phi_y: ScaleDistribution,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            mode: EmbedMode::Edge,
            init: InitStrategy::Pca,
            output_dim: 2,
            k: 15,
            epochs: 200,
            batch: 64,
            neg_rate: 5,
            alpha0: 1.0,
            phi_x: ScaleDistribution::Exponential { nu: 1.0 },
            phi_y: ScaleDistribution::LogLogistic { a: 1.0, b: 1.0 },
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EmbedResult {
    pub coords: Matrix,
    /// Mean per-term loss for each epoch, in epoch order.
    pub loss_history: Vec<f64>,
    /// Variance fractions from the principal component initialization.
    pub explained_variance: Vec<f64>,
}

/// Embeds `points` (rows) into `config.output_dim` dimensions.
///
/// Deterministic for a fixed configuration: one seeded generator drives
/// initialization fallback and all sampling, and updates apply in a fixed
/// order. Zero epochs returns the initialization unchanged.
pub fn train(points: &Matrix, config: &TrainConfig) -> Result<EmbedResult, EmbedError> {
    let n = points.rows();
    if n < 3 {
        return Err(EmbedError::TooFewPoints { n, need: 3 });
    }
    let dm = DistanceMatrix::from_points(points);
    let knn = exact_knn(&dm, config.k)?;
    let scaling = local_scaling(&dm, &knn);
    let (mut y, explained_variance) = match config.init {
        InitStrategy::Pca => {
            let init = pca_init(points, config.output_dim, config.seed)?;
            (init.coords, init.explained_variance)
        }
        InitStrategy::Random => (random_init(n, config.output_dim, config.seed), Vec::new()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut loss_history = Vec::with_capacity(config.epochs);

    let edges = match config.mode {
        EmbedMode::Edge => fuzzy_edge_weights(&dm, &knn, &scaling, &config.phi_x)?,
        EmbedMode::Triplet => Vec::new(),
    };
    let batches_per_epoch = n.div_ceil(config.batch.max(1));

    for epoch in 0..config.epochs {
        let alpha = config.alpha0 * (1.0 - epoch as f64 / config.epochs as f64);
        let mut epoch_loss = 0.0;
        let mut terms = 0usize;
        match config.mode {
            EmbedMode::Edge => {
                for &(i, j, mu) in &edges {
                    let (l, grad) = edge_loss_and_grad(&y, i, j, mu, true, &config.phi_y)?;
                    apply(&mut y, &grad, alpha);
                    epoch_loss += l;
                    terms += 1;
                    for _ in 0..config.neg_rate {
                        let Some(r) = non_neighbor(&mut rng, &knn, i, j, n) else { continue };
                        let (l, grad) =
                            edge_loss_and_grad(&y, i, r, 0.0, false, &config.phi_y)?;
                        apply(&mut y, &grad, alpha);
                        epoch_loss += l;
                        terms += 1;
                    }
                }
            }
            EmbedMode::Triplet => {
                for _ in 0..batches_per_epoch {
                    for _ in 0..config.batch.max(1) {
                        let pos = sample_positive(&mut rng, &knn)?;
                        let mu = triplet_weight(&dm, &scaling, pos, &config.phi_x)?;
                        let (l, grad) = triplet_loss_and_grad(&y, pos, mu, true, &config.phi_y)?;
                        apply(&mut y, &grad, alpha);
                        epoch_loss += l;
                        terms += 1;
                        for _ in 0..config.neg_rate {
                            let neg = sample_negative(&mut rng, &knn)?;
                            let (l, grad) =
                                triplet_loss_and_grad(&y, neg, 0.0, false, &config.phi_y)?;
                            apply(&mut y, &grad, alpha);
                            epoch_loss += l;
                            terms += 1;
                        }
                    }
                }
            }
        }
        loss_history.push(if terms > 0 { epoch_loss / terms as f64 } else { 0.0 });
        if let Some((i, t)) = first_non_finite(&y) {
            return Err(EmbedError::NumericBreakdown {
                epoch,
                detail: format!("coordinate ({i}, {t}) is not finite"),
            });
        }
    }
    Ok(EmbedResult {
        coords: y,
        loss_history,
        explained_variance,
    })
}

/// Seeded Gaussian start at scale 1e-2, matching the noise used to pad
/// degenerate principal components.
fn random_init(n: usize, output_dim: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = Matrix::zeros(n, output_dim);
    for i in 0..n {
        for t in 0..output_dim {
            y.set(i, t, 1e-2 * standard_normal(&mut rng));
        }
    }
    y
}

/// Uniform draw avoiding `i`, `j`, and the neighborhood of `i`; gives up
/// after a few tries so dense neighborhoods cannot stall an epoch.
fn non_neighbor<R: Rng>(
    rng: &mut R,
    knn: &super::knn::NeighborLists,
    i: usize,
    j: usize,
    n: usize,
) -> Option<usize> {
    for _ in 0..10 {
        let r = rng.gen_range(0..n);
        if r != i && r != j && !knn.contains(i, r) {
            return Some(r);
        }
    }
    None
}

/// Descends each listed gradient, clipping every coordinate step to
/// `UPDATE_CLIP`.
fn apply(y: &mut Matrix, grads: &[PointGrad], alpha: f64) {
    for (p, g) in grads {
        for (t, &gv) in g.iter().enumerate() {
            let step = (-alpha * gv).clamp(-UPDATE_CLIP, UPDATE_CLIP);
            let v = y.get(*p, t) + step;
            y.set(*p, t, v);
        }
    }
}

fn first_non_finite(y: &Matrix) -> Option<(usize, usize)> {
    for i in 0..y.rows() {
        for t in 0..y.cols() {
            if !y.get(i, t).is_finite() {
                return Some((i, t));
            }
        }
    }
    None
}
