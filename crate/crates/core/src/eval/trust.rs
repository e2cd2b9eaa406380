//! Neighborhood trustworthiness of an embedding.

use crate::filtration::DistanceMatrix;

use super::EvalError;

/// Fraction-style penalty for embedding neighbors that are strangers in the
/// source metric.
///
/// For each point, every member of its k-nearest embedding neighborhood
/// that is not also a source-space neighbor contributes its source rank
/// beyond k; the total is normalized so 1 means every embedding neighbor is
/// genuine and 0 is the worst case. Ranks order by distance with ties
/// broken by index. Requires `2k < n`.
pub fn trustworthiness(
    x: &DistanceMatrix,
    y: &DistanceMatrix,
    k: usize,
) -> Result<f64, EvalError> {
    let n = x.len();
    if y.len() != n {
        return Err(EvalError::SizeMismatch { left: n, right: y.len() });
    }
    if k == 0 || 2 * k >= n {
        return Err(EvalError::BadNeighborCount { k, n });
    }

    let order = |dm: &DistanceMatrix, i: usize| -> Vec<usize> {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| {
            (dm.get(i, a), a).partial_cmp(&(dm.get(i, b), b)).expect("finite distances")
        });
        others
    };

    let mut penalty = 0.0;
    for i in 0..n {
        let x_order = order(x, i);
        let y_order = order(y, i);
        let mut x_rank = vec![0usize; n];
        for (pos, &j) in x_order.iter().enumerate() {
            x_rank[j] = pos + 1;
        }
        let x_near = &x_order[..k];
        for &j in &y_order[..k] {
            if !x_near.contains(&j) {
                penalty += (x_rank[j] - k) as f64;
            }
        }
    }
    let denom = n as f64 * k as f64 * (2 * n - 3 * k - 1) as f64;
    Ok(1.0 - 2.0 * penalty / denom)
}
