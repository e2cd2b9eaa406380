//! Fuzzy simplicial complexes as marginals of probability measures, filtrations
//! of metric data at a random scale, and low-dimensional embeddings driven by
//! triplet or edge losses.
//!
//! The crate is organized bottom-up:
//!
//! * [`poset`] - finite partial orders, down-sets, Moebius inversion
//! * [`simplicial`] - crisp and fuzzy simplicial complexes, t-norm merges
//! * [`scale`] - scale distributions and weight-to-distance functions
//! * [`measures`] - probability measures over complexes and their marginals
//! * [`filtration`] - Vietoris-Rips / Cech scales and curvature weights
//! * [`embed`] - kNN graphs, PCA initialization, triplet and edge training
//! * [`eval`] - trustworthiness, Procrustes, persistence, Wasserstein

pub mod embed;
pub mod eval;
pub mod filtration;
pub mod matrix;
pub mod measures;
pub mod poset;
pub mod scale;
pub mod simplicial;
