//! Order-2 Wasserstein distance between persistence diagrams.

/// Distance between two diagrams under squared Euclidean ground cost with
/// diagonal projections, returned as the square root of the optimal total.
///
/// Every bar may match a bar of the other diagram or its own projection to
/// the diagonal at half the squared persistence. Bars with infinite death
/// are dropped from both sides before matching.
pub fn wasserstein2(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let a: Vec<(f64, f64)> = a.iter().copied().filter(|p| p.1.is_finite()).collect();
    let b: Vec<(f64, f64)> = b.iter().copied().filter(|p| p.1.is_finite()).collect();
    let (n1, n2) = (a.len(), b.len());
    let size = n1 + n2;
    if size == 0 {
        return 0.0;
    }
    let sq = |p: (f64, f64), q: (f64, f64)| (p.0 - q.0).powi(2) + (p.1 - q.1).powi(2);
    let diag = |p: (f64, f64)| (p.1 - p.0).powi(2) / 2.0;
    let mut cost = vec![vec![0.0; size]; size];
    for (i, row) in cost.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c = match (i < n1, j < n2) {
                (true, true) => sq(a[i], b[j]),
                (true, false) => diag(a[i]),
                (false, true) => diag(b[j]),
                (false, false) => 0.0,
            };
        }
    }
    assignment_cost(&cost).sqrt()
}

/// Minimum-cost perfect assignment on a square matrix by shortest
/// augmenting paths with potentials.
fn assignment_cost(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut matched = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| cost[matched[j] - 1][j - 1]).sum()
}
