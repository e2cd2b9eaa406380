//! Vietoris-Rips filtrations driven by a random scale: scale functions,
//! filtration complexes, the induced measure on complexes, covering radii of
//! three-point sets, and comparison-based triangle weights.

use crate::matrix::Matrix;
use crate::measures::{ComplexMeasure, MeasureError};
use crate::scale::{ScaleDistribution, ScaleError};
use crate::simplicial::{
    all_simplices, CrispComplex, FuzzyComplex, SimplexKey, SimplicialError,
};
use thiserror::Error;

/// Point-count cap for [`filtration_measure`]; the number of thresholds grows
/// with the simplex count.
pub const FILTRATION_CAP: usize = 6;

#[derive(Debug, Error, PartialEq)]
pub enum FiltrationError {
    #[error("distance matrix must be square, got {rows} rows and {cols} columns")]
    NotSquare { rows: usize, cols: usize },
    #[error("condensed vector has length {got}, expected {expected} for {n} points")]
    CondensedLength { n: usize, expected: usize, got: usize },
    #[error("distance between {i} and {j} is {value}, must be finite and nonnegative")]
    BadDistance { i: usize, j: usize, value: f64 },
    #[error("asymmetric distances between {i} and {j}: {dij} vs {dji}")]
    Asymmetric { i: usize, j: usize, dij: f64, dji: f64 },
    #[error("diagonal entry {i} is {value}, must be 0")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("point index {index} out of range for {n} points")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("matrices have {a} and {b} points")]
    SizeMismatch { a: usize, b: usize },
    #[error("{n} points exceeds the filtration cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("side lengths ({a}, {b}, {c}) violate the triangle inequality")]
    TriangleInequality { a: f64, b: f64, c: f64 },
    #[error("Gromov product {value} at vertex {vertex} is not positive")]
    DegenerateGromovProduct { vertex: u32, value: f64 },
    #[error("softness must be positive, got {tau}")]
    NonPositiveSoftness { tau: f64 },
    #[error("triangle weights are defined up to dimension 2, got maxdim {maxdim}")]
    UnsupportedDimension { maxdim: usize },
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Symmetric nonnegative distances with zero diagonal, stored densely.
/// The triangle inequality is not required; semimetrics are accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds from the upper-triangle entries `(0,1), (0,2), ..., (n-2, n-1)`.
    pub fn from_condensed(n: usize, upper: &[f64]) -> Result<Self, FiltrationError> {
        let expected = n * (n - 1) / 2;
        if upper.len() != expected {
            return Err(FiltrationError::CondensedLength { n, expected, got: upper.len() });
        }
        let mut d = vec![0.0; n * n];
        let mut idx = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = upper[idx];
                idx += 1;
                if !v.is_finite() || v < 0.0 {
                    return Err(FiltrationError::BadDistance { i, j, value: v });
                }
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Ok(DistanceMatrix { n, d })
    }

    /// Validates and wraps a full dense matrix.
    pub fn from_full(m: &Matrix) -> Result<Self, FiltrationError> {
        if m.rows() != m.cols() {
            return Err(FiltrationError::NotSquare { rows: m.rows(), cols: m.cols() });
        }
        let n = m.rows();
        for i in 0..n {
            if m.get(i, i) != 0.0 {
                return Err(FiltrationError::NonzeroDiagonal { i, value: m.get(i, i) });
            }
            for j in (i + 1)..n {
                let (dij, dji) = (m.get(i, j), m.get(j, i));
                if dij != dji {
                    return Err(FiltrationError::Asymmetric { i, j, dij, dji });
                }
                if !dij.is_finite() || dij < 0.0 {
                    return Err(FiltrationError::BadDistance { i, j, value: dij });
                }
            }
        }
        let d = (0..n * n).map(|k| m.get(k / n, k % n)).collect();
        Ok(DistanceMatrix { n, d })
    }

    /// Pairwise Euclidean distances between the rows of a point matrix.
    pub fn from_points(points: &Matrix) -> Self {
        let n = points.rows();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = points.row_distance(i, j);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        DistanceMatrix { n, d }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }

    /// Entrywise maximum, the coarsest common refinement of two semimetrics.
    pub fn pointwise_max(&self, other: &DistanceMatrix) -> Result<DistanceMatrix, FiltrationError> {
        if self.n != other.n {
            return Err(FiltrationError::SizeMismatch { a: self.n, b: other.n });
        }
        let d = self.d.iter().zip(&other.d).map(|(&a, &b)| a.max(b)).collect();
        Ok(DistanceMatrix { n: self.n, d })
    }

    /// Largest pairwise distance.
    pub fn max_distance(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }

    fn check_index(&self, v: u32) -> Result<usize, FiltrationError> {
        let index = v as usize;
        if index >= self.n {
            return Err(FiltrationError::IndexOutOfRange { index, n: self.n });
        }
        Ok(index)
    }
}

/// Filtration scale of a simplex: its diameter under the distances. Vertices
/// have scale 0, edges their length, triangles their longest side.
pub fn vr_scale(dm: &DistanceMatrix, s: &SimplexKey) -> Result<f64, FiltrationError> {
    let vs = s.vertices();
    let mut scale = 0.0f64;
    for (a, &i) in vs.iter().enumerate() {
        let i = dm.check_index(i)?;
        for &j in &vs[a + 1..] {
            let j = dm.check_index(j)?;
            scale = scale.max(dm.get(i, j));
        }
    }
    Ok(scale)
}

/// The filtration complex at scale `t`: every simplex whose scale is at most
/// `t`. Face-closed because faces never have larger diameters.
pub fn vr_complex(
    dm: &DistanceMatrix,
    t: f64,
    maxdim: usize,
) -> Result<CrispComplex, FiltrationError> {
    let n = dm.len() as u32;
    let mut present = Vec::new();
    for s in all_simplices(n, maxdim) {
        if vr_scale(dm, &s)? <= t {
            present.push(s);
        }
    }
    Ok(CrispComplex::new(n, maxdim, present)?)
}

/// Distinct simplex scales in increasing order, always starting at 0.
fn threshold_scales(dm: &DistanceMatrix, maxdim: usize) -> Result<Vec<f64>, FiltrationError> {
    let mut scales = vec![0.0];
    for s in all_simplices(dm.len() as u32, maxdim) {
        scales.push(vr_scale(dm, &s)?);
    }
    scales.sort_by(|a, b| a.partial_cmp(b).expect("distances are finite"));
    scales.dedup();
    Ok(scales)
}

/// The measure on complexes induced by drawing the filtration scale at
/// random: the complex at threshold `t_i` carries the probability that the
/// scale lands in `[t_i, t_{i+1})`, and the full complex at the largest
/// threshold carries the right tail.
///
/// Point count is capped at [`FILTRATION_CAP`].
pub fn filtration_measure(
    dm: &DistanceMatrix,
    maxdim: usize,
    dist: &ScaleDistribution,
) -> Result<ComplexMeasure, FiltrationError> {
    if dm.len() > FILTRATION_CAP {
        return Err(FiltrationError::CapExceeded { n: dm.len(), cap: FILTRATION_CAP });
    }
    let thresholds = threshold_scales(dm, maxdim)?;
    let mut support = Vec::with_capacity(thresholds.len());
    for (i, &t) in thresholds.iter().enumerate() {
        let complex = vr_complex(dm, t, maxdim)?;
        let prob = match thresholds.get(i + 1) {
            Some(&next) => dist.cdf(next)? - dist.cdf(t)?,
            None => dist.survival(t)?,
        };
        support.push((complex, prob));
    }
    Ok(ComplexMeasure::new(support)?)
}

/// Marginal weights of [`filtration_measure`] computed in closed form:
/// `weight(s) = survival(scale(s))`, the probability that the random scale
/// reaches the simplex's threshold.
pub fn fuzzy_from_filtration(
    dm: &DistanceMatrix,
    maxdim: usize,
    dist: &ScaleDistribution,
) -> Result<FuzzyComplex, FiltrationError> {
    let mut out = FuzzyComplex::new(dm.len() as u32, maxdim);
    for s in all_simplices(dm.len() as u32, maxdim) {
        let w = dist.survival(vr_scale(dm, &s)?)?;
        out.set_weight(s, w)?;
    }
    Ok(out)
}

/// Radius of the smallest enclosing ball of three points with the given
/// pairwise distances, realized in the Euclidean plane.
///
/// For right or obtuse triangles (and collinear degenerations) the ball is
/// centered on the midpoint of the longest side, radius half its length; for
/// acute triangles it is the circumradius.
pub fn cech3_radius(d01: f64, d02: f64, d12: f64) -> Result<f64, FiltrationError> {
    let (a, b, c) = (d12, d02, d01);
    for side in [a, b, c] {
        if !side.is_finite() || side < 0.0 {
            return Err(FiltrationError::BadDistance { i: 0, j: 0, value: side });
        }
    }
    let longest = a.max(b).max(c);
    // Relative slack keeps float-perturbed collinear triples on the obtuse
    // branch instead of erroring.
    if 2.0 * longest > (a + b + c) * (1.0 + 1e-12) {
        return Err(FiltrationError::TriangleInequality { a, b, c });
    }
    let sq = a * a + b * b + c * c;
    if sq <= 2.0 * longest * longest {
        return Ok(longest / 2.0);
    }
    let s = 0.5 * (a + b + c);
    let area = (s * (s - a) * (s - b) * (s - c)).sqrt();
    Ok(a * b * c / (4.0 * area))
}

/// Which points may serve as the center in the intrinsic covering radii.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateSet {
    /// Every point of the space.
    AllPoints,
    /// Only the simplex's own vertices.
    Vertices,
}

fn candidate_indices(
    dm: &DistanceMatrix,
    s: &SimplexKey,
    candidates: CandidateSet,
) -> Result<Vec<usize>, FiltrationError> {
    match candidates {
        CandidateSet::AllPoints => Ok((0..dm.len()).collect()),
        CandidateSet::Vertices => s.vertices().iter().map(|&v| dm.check_index(v)).collect(),
    }
}

/// Smooth maximum `tau * ln(sum exp(x/tau))`, shifted for stability. Upper
/// bounds the exact maximum.
fn softmax(values: &[f64], tau: f64) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = values.iter().map(|&v| ((v - m) / tau).exp()).sum();
    m + tau * sum.ln()
}

/// Smooth minimum, the reflection of [`softmax`]. Lower bounds the minimum.
fn softmin(values: &[f64], tau: f64) -> f64 {
    let negated: Vec<f64> = values.iter().map(|&v| -v).collect();
    -softmax(&negated, tau)
}

/// Covering radius of a simplex within its own metric space: the best
/// candidate center's worst distance to a simplex vertex.
///
/// `softness` of `None` computes the exact min-max; `Some(tau)` replaces both
/// with their smooth counterparts, which approach the exact value as `tau`
/// shrinks.
pub fn intrinsic_cech_radius(
    dm: &DistanceMatrix,
    s: &SimplexKey,
    candidates: CandidateSet,
    softness: Option<f64>,
) -> Result<f64, FiltrationError> {
    if let Some(tau) = softness {
        if !(tau > 0.0) {
            return Err(FiltrationError::NonPositiveSoftness { tau });
        }
    }
    let centers = candidate_indices(dm, s, candidates)?;
    let vertex_ids: Vec<usize> =
        s.vertices().iter().map(|&v| dm.check_index(v)).collect::<Result<_, _>>()?;
    let mut worst_per_center = Vec::with_capacity(centers.len());
    for &x in &centers {
        let dists: Vec<f64> = vertex_ids.iter().map(|&v| dm.get(x, v)).collect();
        let worst = match softness {
            Some(tau) => softmax(&dists, tau),
            None => dists.iter().copied().fold(0.0, f64::max),
        };
        worst_per_center.push(worst);
    }
    Ok(match softness {
        Some(tau) => softmin(&worst_per_center, tau),
        None => worst_per_center.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

/// Comparison ratio of a triple: the best candidate center's worst distance
/// to a triple vertex, measured relative to that vertex's Gromov product.
///
/// The Gromov product at vertex `i` is `(d(i,j) + d(i,k) - d(j,k)) / 2`; a
/// nonpositive product (collinear or inequality-violating triples) is
/// reported as an error since the ratio loses meaning.
pub fn curvature_rho3(dm: &DistanceMatrix, triple: &SimplexKey) -> Result<f64, FiltrationError> {
    let vs = triple.vertices();
    if vs.len() != 3 {
        return Err(FiltrationError::UnsupportedDimension { maxdim: triple.dim() });
    }
    let idx: Vec<usize> = vs.iter().map(|&v| dm.check_index(v)).collect::<Result<_, _>>()?;
    let mut products = [0.0; 3];
    for t in 0..3 {
        let (i, j, k) = (idx[t], idx[(t + 1) % 3], idx[(t + 2) % 3]);
        let r = 0.5 * (dm.get(i, j) + dm.get(i, k) - dm.get(j, k));
        if r <= 0.0 {
            return Err(FiltrationError::DegenerateGromovProduct { vertex: vs[t], value: r });
        }
        products[t] = r;
    }
    let mut best = f64::INFINITY;
    for x in 0..dm.len() {
        let worst = (0..3)
            .map(|t| dm.get(x, idx[t]) / products[t])
            .fold(0.0, f64::max);
        best = best.min(worst);
    }
    Ok(best)
}

/// Weights from scale survival probabilities with comparison-based triangle
/// weights: vertices weigh 1, edges `survival(length)`, triangles
/// `survival(rho)` clipped from above by their edge weights so the face
/// order always holds.
pub fn curvature_weights(
    dm: &DistanceMatrix,
    dist: &ScaleDistribution,
    maxdim: usize,
) -> Result<FuzzyComplex, FiltrationError> {
    if maxdim > 2 {
        return Err(FiltrationError::UnsupportedDimension { maxdim });
    }
    let n = dm.len() as u32;
    let mut out = FuzzyComplex::new(n, maxdim);
    for s in all_simplices(n, maxdim) {
        let w = match s.dim() {
            0 => 1.0,
            1 => dist.survival(vr_scale(dm, &s)?)?,
            _ => {
                let rho = curvature_rho3(dm, &s)?;
                let mut cap = 1.0f64;
                for e in s.faces()? {
                    cap = cap.min(dist.survival(vr_scale(dm, &e)?)?);
                }
                dist.survival(rho)?.min(cap)
            }
        };
        out.set_weight(s, w)?;
    }
    Ok(out)
}
