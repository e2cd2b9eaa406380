//! Enclosing-ball radii in the embedding, Bernoulli matching losses, and
//! their analytic gradients.

use crate::filtration::{cech3_radius, DistanceMatrix};
use crate::matrix::Matrix;
use crate::scale::ScaleDistribution;

use super::knn::LocalScaling;
use super::EmbedError;

/// Match probabilities are clamped to `[NU_CLAMP, 1 - NU_CLAMP]` before the
/// logarithms; the gradient is zero wherever the clamp is active.
pub const NU_CLAMP: f64 = 1e-4;

/// Gradient contribution on one point row.
pub type PointGrad = (usize, Vec<f64>);

/// Weight of a three point set in the input metric: survival of its
/// enclosing-ball radius after dividing by the global neighborhood scale.
pub fn triplet_weight(
    dm: &DistanceMatrix,
    scaling: &LocalScaling,
    triple: [usize; 3],
    phi_x: &ScaleDistribution,
) -> Result<f64, EmbedError> {
    let [i, j, k] = triple;
    let r = cech3_radius(dm.get(i, j), dm.get(i, k), dm.get(j, k))?;
    Ok(phi_x.survival(r / scaling.global_scale)?)
}

/// Radius of the smallest ball containing three embedded points, with its
/// gradient in the three coordinate rows (indexed by slot in `triple`).
///
/// When the longest side spans a diameter (obtuse or degenerate triangle)
/// the radius is half that side and only its endpoints receive gradient;
/// otherwise the radius is the circumradius, differentiated through Heron's
/// formula. Ties for the longest side resolve in a fixed side order.
pub fn meb_radius_grad(y: &Matrix, triple: [usize; 3]) -> (f64, [Vec<f64>; 3]) {
    let d = y.cols();
    let [p0, p1, p2] = triple;
    let a = y.row_distance(p1, p2);
    let b = y.row_distance(p0, p2);
    let c = y.row_distance(p0, p1);
    let mut grad = [vec![0.0; d], vec![0.0; d], vec![0.0; d]];

    let sides = [(a, 1usize, 2usize), (b, 0, 2), (c, 0, 1)];
    let (longest, u, v) =
        sides.iter().fold((a, 1, 2), |acc, &(len, s, t)| if len > acc.0 { (len, s, t) } else { acc });

    let sq = a * a + b * b + c * c;
    if sq <= 2.0 * longest * longest {
        let radius = longest / 2.0;
        if longest > 0.0 {
            for t in 0..d {
                let diff = (y.get(triple[u], t) - y.get(triple[v], t)) / (2.0 * longest);
                grad[u][t] += diff;
                grad[v][t] -= diff;
            }
        }
        return (radius, grad);
    }

    let s = 0.5 * (a + b + c);
    let area = (s * (s - a) * (s - b) * (s - c)).max(0.0).sqrt();
    let radius = a * b * c / (4.0 * area);
    // d(ln R)/d(side) with the other two sides held fixed.
    let dlnr = |len: f64, o1: f64, o2: f64| {
        1.0 / len - 0.25 * (1.0 / s - 1.0 / (s - len) + 1.0 / (s - o1) + 1.0 / (s - o2))
    };
    let per_side = [
        (radius * dlnr(a, b, c), 1usize, 2usize),
        (radius * dlnr(b, a, c), 0, 2),
        (radius * dlnr(c, a, b), 0, 1),
    ];
    for &(dr, su, sv) in &per_side {
        let len = y.row_distance(triple[su], triple[sv]);
        for t in 0..d {
            let unit = (y.get(triple[su], t) - y.get(triple[sv], t)) / len;
            grad[su][t] += dr * unit;
            grad[sv][t] -= dr * unit;
        }
    }
    (radius, grad)
}

/// Loss and radius-derivative of one clamped Bernoulli matching term.
fn clamped_match_term(raw: f64, density: f64, mu: f64, positive: bool) -> (f64, f64) {
    let nu = raw.clamp(NU_CLAMP, 1.0 - NU_CLAMP);
    let interior = raw > NU_CLAMP && raw < 1.0 - NU_CLAMP;
    if positive {
        let g = if interior { mu * density / nu } else { 0.0 };
        (-mu * nu.ln(), g)
    } else {
        let g = if interior { -density / (1.0 - nu) } else { 0.0 };
        (-(1.0 - nu).ln(), g)
    }
}

/// One triplet term. Positive terms pull the three points into a smaller
/// ball with strength `mu`; negative terms push the ball open.
pub fn triplet_loss_and_grad(
    y: &Matrix,
    triple: [usize; 3],
    mu: f64,
    positive: bool,
    phi_y: &ScaleDistribution,
) -> Result<(f64, Vec<PointGrad>), EmbedError> {
    let (radius, radius_grad) = meb_radius_grad(y, triple);
    let raw = phi_y.survival(radius)?;
    let (loss, dloss_dr) = clamped_match_term(raw, phi_y.density(radius)?, mu, positive);
    let grad = triple
        .iter()
        .zip(radius_grad)
        .map(|(&p, g)| (p, g.into_iter().map(|v| dloss_dr * v).collect()))
        .collect();
    Ok((loss, grad))
}

/// One pairwise term. Positive edges pull their endpoints together with
/// strength `mu`; negative pairs push them apart.
pub fn edge_loss_and_grad(
    y: &Matrix,
    i: usize,
    j: usize,
    mu: f64,
    positive: bool,
    phi_y: &ScaleDistribution,
) -> Result<(f64, Vec<PointGrad>), EmbedError> {
    let d = y.cols();
    let dist = y.row_distance(i, j);
    let raw = phi_y.survival(dist)?;
    let (loss, dloss_ddist) = clamped_match_term(raw, phi_y.density(dist)?, mu, positive);
    let mut gi = vec![0.0; d];
    let mut gj = vec![0.0; d];
    if dist > 0.0 {
        for t in 0..d {
            let unit = (y.get(i, t) - y.get(j, t)) / dist;
            gi[t] = dloss_ddist * unit;
            gj[t] = -dloss_ddist * unit;
        }
    }
    Ok((loss, vec![(i, gi), (j, gj)]))
}
