//! Embedding pipeline: exact neighborhoods, principal component
//! initialization, and a seeded stochastic optimizer that matches edge or
//! triplet weights between the input metric and the embedding.

mod knn;
mod loss;
mod pca;
mod sampling;
mod train;

pub use knn::{
    exact_knn, fuzzy_edge_weights, local_scaled_distance, local_scaling, LocalScaling,
    NeighborLists,
};
pub use loss::{
    edge_loss_and_grad, meb_radius_grad, triplet_loss_and_grad, triplet_weight, PointGrad,
    NU_CLAMP,
};
pub use pca::{pca_init, PcaInit, RANK_TOLERANCE};
pub use sampling::{sample_negative, sample_positive};
pub use train::{train, EmbedMode, EmbedResult, InitStrategy, TrainConfig};

use crate::filtration::FiltrationError;
use crate::scale::ScaleError;
use thiserror::Error;

/// Floor applied to per-point and global scale denominators.
pub const SCALE_FLOOR: f64 = 1e-8;

/// Attempts before a sampler gives up on drawing a distinct triple.
pub const SAMPLE_RETRY_CAP: usize = 100;

/// Per-coordinate cap on a single gradient step.
pub const UPDATE_CLIP: f64 = 4.0;

#[derive(Debug, Error)]
pub enum EmbedError {
    #[error("need 1 <= k <= n - 1 neighbors, got k = {k} with n = {n} points")]
    BadNeighborCount { k: usize, n: usize },
    #[error("output dimension {output_dim} must be in 1..={input_dim}")]
    BadOutputDim { output_dim: usize, input_dim: usize },
    #[error("need at least {need} points, got {n}")]
    TooFewPoints { n: usize, need: usize },
    #[error("no valid sample after {retries} attempts: {context}")]
    DegenerateNeighborhood { retries: usize, context: String },
    #[error("non-finite coordinate at epoch {epoch}: {detail}")]
    NumericBreakdown { epoch: usize, detail: String },
    #[error(transparent)]
    Filtration(#[from] FiltrationError),
    #[error(transparent)]
    Scale(#[from] ScaleError),
}
