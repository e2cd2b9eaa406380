//! Seeded triple samplers for the stochastic optimizer.

use rand::Rng;

use super::knn::NeighborLists;
use super::{EmbedError, SAMPLE_RETRY_CAP};

/// Positive triple: anchor uniform, second point uniform among the anchor's
/// neighbors, third uniform in the union of both neighborhoods, redrawn
/// until the three are distinct.
pub fn sample_positive<R: Rng>(
    rng: &mut R,
    knn: &NeighborLists,
) -> Result<[usize; 3], EmbedError> {
    let n = knn.len();
    for _ in 0..SAMPLE_RETRY_CAP {
        let i = rng.gen_range(0..n);
        let ni = knn.of(i);
        let j = ni[rng.gen_range(0..ni.len())];
        let pool = knn.union(i, j);
        let k = pool[rng.gen_range(0..pool.len())];
        if i != j && j != k && i != k {
            return Ok([i, j, k]);
        }
    }
    Err(EmbedError::DegenerateNeighborhood {
        retries: SAMPLE_RETRY_CAP,
        context: "positive triple with three distinct points".into(),
    })
}

/// Negative triple: half the draws take three distinct uniform points, the
/// other half an anchor, one of its neighbors, and a point outside both
/// neighborhoods. The semi-local draw falls back to uniform when every
/// point lies inside the union.
pub fn sample_negative<R: Rng>(
    rng: &mut R,
    knn: &NeighborLists,
) -> Result<[usize; 3], EmbedError> {
    let n = knn.len();
    if rng.gen_bool(0.5) {
        let i = rng.gen_range(0..n);
        let ni = knn.of(i);
        let j = ni[rng.gen_range(0..ni.len())];
        let mut excluded = knn.union(i, j);
        excluded.push(i);
        excluded.push(j);
        excluded.sort_unstable();
        excluded.dedup();
        let outside: Vec<usize> = (0..n).filter(|v| excluded.binary_search(v).is_err()).collect();
        if !outside.is_empty() {
            let k = outside[rng.gen_range(0..outside.len())];
            return Ok([i, j, k]);
        }
    }
    uniform_triple(rng, n)
}

fn uniform_triple<R: Rng>(rng: &mut R, n: usize) -> Result<[usize; 3], EmbedError> {
    if n < 3 {
        return Err(EmbedError::TooFewPoints { n, need: 3 });
    }
    for _ in 0..SAMPLE_RETRY_CAP {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        let k = rng.gen_range(0..n);
        if i != j && j != k && i != k {
            return Ok([i, j, k]);
        }
    }
    Err(EmbedError::DegenerateNeighborhood {
        retries: SAMPLE_RETRY_CAP,
        context: "three distinct uniform points".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::knn::exact_knn;
    use crate::filtration::DistanceMatrix;
    use crate::matrix::Matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ring(n: usize) -> DistanceMatrix {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        DistanceMatrix::from_points(&Matrix::from_rows(&rows))
    }

    #[test]
    fn positive_triples_stay_in_neighborhoods() {
        let knn = exact_knn(&ring(10), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let [i, j, k] = sample_positive(&mut rng, &knn).unwrap();
            assert!(i != j && j != k && i != k);
            assert!(knn.contains(i, j));
            assert!(knn.contains(i, k) || knn.contains(j, k));
        }
    }

    #[test]
    fn negative_triples_are_distinct() {
        let knn = exact_knn(&ring(12), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let [i, j, k] = sample_negative(&mut rng, &knn).unwrap();
            assert!(i != j && j != k && i != k);
        }
    }

    #[test]
    fn semi_local_negatives_leave_the_union() {
        // With k = 1 on a well-separated ring, most points lie outside any
        // single union, so semi-local draws must avoid both neighborhoods.
        let knn = exact_knn(&ring(12), 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut saw_outsider = false;
        for _ in 0..100 {
            let [i, j, k] = sample_negative(&mut rng, &knn).unwrap();
            if knn.contains(i, j) && !knn.contains(i, k) && !knn.contains(j, k) {
                saw_outsider = true;
            }
        }
        assert!(saw_outsider);
    }

    #[test]
    fn saturated_union_falls_back_to_uniform() {
        // n = 3 with k = 2: the union always covers every point, so the
        // semi-local branch can never succeed yet sampling still works.
        let knn = exact_knn(&ring(3), 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let [i, j, k] = sample_negative(&mut rng, &knn).unwrap();
            assert!(i != j && j != k && i != k);
        }
    }

    #[test]
    fn sampling_is_deterministic_for_a_seed() {
        let knn = exact_knn(&ring(10), 3).unwrap();
        let mut a = ChaCha8Rng::seed_from_u64(77);
        let mut b = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            assert_eq!(
                sample_positive(&mut a, &knn).unwrap(),
                sample_positive(&mut b, &knn).unwrap()
            );
            assert_eq!(
                sample_negative(&mut a, &knn).unwrap(),
                sample_negative(&mut b, &knn).unwrap()
            );
        }
    }
}
