//! Exact k-nearest neighbors and the local scaling statistics derived from
//! them.

use std::collections::BTreeMap;

use crate::filtration::DistanceMatrix;
use crate::scale::ScaleDistribution;

use super::{EmbedError, SCALE_FLOOR};

/// Neighbor lists ordered by distance, ties broken by index; self excluded.
#[derive(Debug, Clone)]
pub struct NeighborLists {
    k: usize,
    lists: Vec<Vec<usize>>,
}

impl NeighborLists {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    /// Neighbors of `i`, nearest first.
    pub fn of(&self, i: usize) -> &[usize] {
        &self.lists[i]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.lists[i].contains(&j)
    }

    /// Sorted union of the neighbor lists of `i` and `j`.
    pub fn union(&self, i: usize, j: usize) -> Vec<usize> {
        let mut u: Vec<usize> = self.lists[i].iter().chain(&self.lists[j]).copied().collect();
        u.sort_unstable();
        u.dedup();
        u
    }
}

/// Brute-force k-nearest neighbors over a distance matrix.
pub fn exact_knn(dm: &DistanceMatrix, k: usize) -> Result<NeighborLists, EmbedError> {
    let n = dm.len();
    if k == 0 || k >= n {
        return Err(EmbedError::BadNeighborCount { k, n });
    }
    let mut lists = Vec::with_capacity(n);
    for i in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| {
            (dm.get(i, a), a)
                .partial_cmp(&(dm.get(i, b), b))
                .expect("distances are finite")
        });
        order.truncate(k);
        lists.push(order);
    }
    Ok(NeighborLists { k, lists })
}

/// Per-point scale statistics: `rho` is the distance to the nearest
/// neighbor, `sigma` the mean neighbor distance beyond `rho`, and
/// `global_scale` the largest k-th neighbor distance over the data set.
/// All denominators are floored at `SCALE_FLOOR`.
#[derive(Debug, Clone)]
pub struct LocalScaling {
    pub rho: Vec<f64>,
    pub sigma: Vec<f64>,
    pub global_scale: f64,
}

pub fn local_scaling(dm: &DistanceMatrix, knn: &NeighborLists) -> LocalScaling {
    let n = knn.len();
    let mut rho = vec![0.0; n];
    let mut sigma = vec![0.0; n];
    let mut global_scale = 0.0f64;
    for i in 0..n {
        let list = knn.of(i);
        rho[i] = dm.get(i, list[0]);
        let mean = list.iter().map(|&j| dm.get(i, j)).sum::<f64>() / list.len() as f64;
        sigma[i] = (mean - rho[i]).max(SCALE_FLOOR);
        global_scale = global_scale.max(dm.get(i, *list.last().expect("k >= 1")));
    }
    LocalScaling { rho, sigma, global_scale: global_scale.max(SCALE_FLOOR) }
}

/// Distance from `i` to `j` after subtracting `rho[i]` and dividing by
/// `sigma[i]`. Zero on the diagonal, infinite outside the neighbor list of
/// `i`, and clamped below at zero so the nearest neighbor sits at distance
/// zero. Asymmetric by construction.
pub fn local_scaled_distance(
    dm: &DistanceMatrix,
    scaling: &LocalScaling,
    knn: &NeighborLists,
    i: usize,
    j: usize,
) -> f64 {
    if i == j {
        return 0.0;
    }
    if !knn.contains(i, j) {
        return f64::INFINITY;
    }
    ((dm.get(i, j) - scaling.rho[i]) / scaling.sigma[i]).max(0.0)
}

/// Symmetric edge weights: each directed neighbor edge gets the survival of
/// its locally scaled length under `phi_x`, and the two directions combine
/// with the probabilistic sum `a + b - a*b`. Returns `(i, j, weight)`
/// triples with `i < j`, sorted.
pub fn fuzzy_edge_weights(
    dm: &DistanceMatrix,
    knn: &NeighborLists,
    scaling: &LocalScaling,
    phi_x: &ScaleDistribution,
) -> Result<Vec<(usize, usize, f64)>, EmbedError> {
    let mut directed: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
    for i in 0..knn.len() {
        for &j in knn.of(i) {
            let w = phi_x.survival(local_scaled_distance(dm, scaling, knn, i, j))?;
            let slot = directed.entry((i.min(j), i.max(j))).or_insert((0.0, 0.0));
            if i < j {
                slot.0 = w;
            } else {
                slot.1 = w;
            }
        }
    }
    let mut edges = Vec::with_capacity(directed.len());
    for ((a, b), (x, y)) in directed {
        let w = x + y - x * y;
        if w > 0.0 {
            edges.push((a, b, w));
        }
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn line(spacing: &[f64]) -> DistanceMatrix {
        let mut pos = vec![0.0];
        for s in spacing {
            pos.push(pos.last().unwrap() + s);
        }
        let rows: Vec<Vec<f64>> = pos.into_iter().map(|x| vec![x]).collect();
        DistanceMatrix::from_points(&Matrix::from_rows(&rows))
    }

    #[test]
    fn knn_orders_by_distance_then_index() {
        let dm = line(&[1.0, 1.0, 1.0]);
        let knn = exact_knn(&dm, 2).unwrap();
        assert_eq!(knn.of(1), &[0, 2]);
        assert_eq!(knn.of(2), &[1, 3]);
        assert_eq!(knn.of(0), &[1, 2]);
    }

    #[test]
    fn knn_rejects_bad_counts() {
        let dm = line(&[1.0, 1.0]);
        assert!(matches!(
            exact_knn(&dm, 0),
            Err(EmbedError::BadNeighborCount { k: 0, n: 3 })
        ));
        assert!(matches!(
            exact_knn(&dm, 3),
            Err(EmbedError::BadNeighborCount { k: 3, n: 3 })
        ));
    }

    #[test]
    fn local_scaling_matches_hand_values() {
        let dm = line(&[1.0, 2.0]);
        let knn = exact_knn(&dm, 2).unwrap();
        let s = local_scaling(&dm, &knn);
        assert_eq!(s.rho, vec![1.0, 1.0, 2.0]);
        // Point 0 sees distances 1 and 3, mean 2, sigma 1.
        assert_eq!(s.sigma[0], 1.0);
        // Point 1 sees 1 and 2, mean 1.5.
        assert_eq!(s.sigma[1], 0.5);
        assert_eq!(s.global_scale, 3.0);
    }

    #[test]
    fn scaled_distance_cases() {
        let dm = line(&[1.0, 2.0, 10.0]);
        let knn = exact_knn(&dm, 2).unwrap();
        let s = local_scaling(&dm, &knn);
        assert_eq!(local_scaled_distance(&dm, &s, &knn, 1, 1), 0.0);
        assert_eq!(local_scaled_distance(&dm, &s, &knn, 0, 3), f64::INFINITY);
        // Nearest neighbor lands exactly at zero.
        assert_eq!(local_scaled_distance(&dm, &s, &knn, 0, 1), 0.0);
        // Point 0 to point 2: (3 - 1) / 1 = 2.
        assert_eq!(local_scaled_distance(&dm, &s, &knn, 0, 2), 2.0);
    }

    #[test]
    fn sigma_floor_applies_to_duplicate_neighbors() {
        // Equidistant neighbors give mean == rho, so sigma hits the floor.
        let dm = line(&[1.0, 1.0]);
        let knn = exact_knn(&dm, 2).unwrap();
        let s = local_scaling(&dm, &knn);
        assert_eq!(s.sigma[1], SCALE_FLOOR);
    }

    #[test]
    fn edge_weights_symmetrize_with_probabilistic_sum() {
        // Points 0,1 close together, 2 far away: with k = 1 only 2 -> 1 is
        // directed, so the (1,2) weight equals that single direction.
        let dm = line(&[1.0, 5.0]);
        let knn = exact_knn(&dm, 1).unwrap();
        let s = local_scaling(&dm, &knn);
        let phi = ScaleDistribution::Exponential { nu: 1.0 };
        let edges = fuzzy_edge_weights(&dm, &knn, &s, &phi).unwrap();
        // Both nearest-neighbor directions survive at weight 1 for (0,1).
        assert_eq!(edges[0], (0, 1, 1.0));
        // (1,2) exists in one direction only; nearest neighbor distance
        // scales to zero so that direction also has weight 1.
        assert_eq!(edges[1], (1, 2, 1.0));
        assert_eq!(edges.len(), 2);
    }

    #[test]
    fn edge_weights_decay_with_scaled_distance() {
        let dm = line(&[1.0, 1.0, 4.0]);
        let knn = exact_knn(&dm, 2).unwrap();
        let s = local_scaling(&dm, &knn);
        let phi = ScaleDistribution::Exponential { nu: 1.0 };
        let edges = fuzzy_edge_weights(&dm, &knn, &s, &phi).unwrap();
        for &(a, b, w) in &edges {
            assert!(a < b);
            assert!(w > 0.0 && w <= 1.0, "weight {w} out of range");
        }
        // Second-neighbor weights are strictly below 1 wherever the scaled
        // distance is positive in both directions.
        let w02 = edges.iter().find(|e| (e.0, e.1) == (0, 2)).unwrap().2;
        assert!(w02 < 1.0);
    }
}
