//! Orthogonal Procrustes alignment score.

use crate::matrix::{singular_values, Matrix};

use super::EvalError;

/// Alignment of `coords` to `reference` after centering and the best
/// orthogonal map (rotations and reflections, no rescaling).
///
/// Returns `1 - r / |reference|` where `r` is the residual norm of the
/// aligned configurations, so 1 is a perfect match and the score falls as
/// the shapes diverge; a uniformly doubled copy scores 0. Errors when the
/// centered reference has zero norm.
pub fn procrustes_global(coords: &Matrix, reference: &Matrix) -> Result<f64, EvalError> {
    if coords.rows() != reference.rows() || coords.cols() != reference.cols() {
        return Err(EvalError::SizeMismatch { left: coords.rows(), right: reference.rows() });
    }
    let mut y = coords.clone();
    y.center_columns();
    let mut r = reference.clone();
    r.center_columns();
    let ref_norm = r.frobenius_norm();
    if ref_norm == 0.0 {
        return Err(EvalError::ZeroNorm);
    }
    let cross = r.transpose_mul(&y);
    let nuclear: f64 = singular_values(&cross).iter().sum();
    let residual_sq =
        (y.frobenius_norm().powi(2) + ref_norm.powi(2) - 2.0 * nuclear).max(0.0);
    Ok(1.0 - residual_sq.sqrt() / ref_norm)
}
