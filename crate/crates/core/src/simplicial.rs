//! Crisp and fuzzy simplicial complexes over a finite vertex set, truncated at
//! a maximum dimension.
//!
//! Simplices are unordered vertex subsets: one nondegenerate representative
//! per degeneracy class, with weights symmetric under vertex permutation.
//! Weights must not increase from a face to a coface; [`FuzzyComplex`] stores
//! arbitrary `[0,1]` weights and [`FuzzyComplex::check_monotone`] reports the
//! offending pairs, so invalid inputs can be diagnosed instead of rejected.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimplicialError {
    #[error("vertex list {0:?} is not strictly increasing")]
    NotSorted(Vec<u32>),
    #[error("simplex must have at least one vertex")]
    EmptySimplex,
    #[error("vertex {vertex} out of range for vertex count {vertex_count}")]
    VertexOutOfRange { vertex: u32, vertex_count: u32 },
    #[error("simplex {simplex} has dimension {dim}, complex allows up to {maxdim}")]
    DimensionExceedsMax { simplex: SimplexKey, dim: usize, maxdim: usize },
    #[error("simplex {simplex} is present but its face {missing_face} is not")]
    NotFaceClosed { simplex: SimplexKey, missing_face: SimplexKey },
    #[error("weight {weight} for {simplex} is outside [0, 1]")]
    WeightOutOfRange { simplex: SimplexKey, weight: f64 },
    #[error("shapes differ: {0} vertices/maxdim {1} vs {2} vertices/maxdim {3}")]
    ShapeMismatch(u32, usize, u32, usize),
    #[error("a vertex has no faces")]
    DimensionZero,
}

/// A nondegenerate simplex: strictly increasing vertex ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SimplexKey(Vec<u32>);

impl SimplexKey {
    pub fn new(vertices: impl Into<Vec<u32>>) -> Result<Self, SimplicialError> {
        let vertices = vertices.into();
        if vertices.is_empty() {
            return Err(SimplicialError::EmptySimplex);
        }
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SimplicialError::NotSorted(vertices));
        }
        Ok(SimplexKey(vertices))
    }

    pub fn vertices(&self) -> &[u32] {
        &self.0
    }

    /// Dimension: vertex count minus one.
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// All codimension-1 faces, in order of the dropped vertex position.
    pub fn faces(&self) -> Result<Vec<SimplexKey>, SimplicialError> {
        if self.0.len() < 2 {
            return Err(SimplicialError::DimensionZero);
        }
        let mut out = Vec::with_capacity(self.0.len());
        for drop in 0..self.0.len() {
            let vs: Vec<u32> = self
                .0
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != drop)
                .map(|(_, &v)| v)
                .collect();
            out.push(SimplexKey(vs));
        }
        Ok(out)
    }

    /// Whether `self`'s vertex set contains `other`'s (face or equal).
    pub fn contains(&self, other: &SimplexKey) -> bool {
        other.0.iter().all(|v| self.0.binary_search(v).is_ok())
    }

    /// All nonempty subsets, smallest first.
    pub fn all_subsets(&self) -> Vec<SimplexKey> {
        let k = self.0.len();
        let mut out = Vec::with_capacity((1 << k) - 1);
        for mask in 1u32..(1 << k) {
            let vs: Vec<u32> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| self.0[i]).collect();
            out.push(SimplexKey(vs));
        }
        out.sort();
        out
    }
}

impl PartialOrd for SimplexKey {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SimplexKey {
    /// Dimension first, then lexicographic; gives deterministic iteration of
    /// mixed-dimension maps with all vertices before all edges.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for SimplexKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// Convenience constructor for literal simplices in tests and examples.
///
/// Panics on invalid input, so only use with known-good literals.
pub fn simplex(vertices: &[u32]) -> SimplexKey {
    SimplexKey::new(vertices).expect("literal simplex must be strictly increasing and nonempty")
}

/// All simplices on `0..vertex_count` with dimension at most `maxdim`,
/// in [`SimplexKey`] order.
pub fn all_simplices(vertex_count: u32, maxdim: usize) -> Vec<SimplexKey> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(next: u32, vertex_count: u32, remaining: usize, current: &mut Vec<u32>, out: &mut Vec<SimplexKey>) {
        if !current.is_empty() {
            out.push(SimplexKey(current.clone()));
        }
        if remaining == 0 {
            return;
        }
        for v in next..vertex_count {
            current.push(v);
            rec(v + 1, vertex_count, remaining - 1, current, out);
            current.pop();
        }
    }
    rec(0, vertex_count, maxdim + 1, &mut current, &mut out);
    out.sort();
    out
}

/// A face-closed set of simplices: weights in {0, 1} by presence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CrispComplex {
    vertex_count: u32,
    maxdim: usize,
    present: BTreeSet<SimplexKey>,
}

impl CrispComplex {
    /// Validates bounds and face-closure of an explicit simplex set.
    pub fn new(
        vertex_count: u32,
        maxdim: usize,
        present: impl IntoIterator<Item = SimplexKey>,
    ) -> Result<Self, SimplicialError> {
        let present: BTreeSet<SimplexKey> = present.into_iter().collect();
        for s in &present {
            check_bounds(s, vertex_count, maxdim)?;
            if s.dim() > 0 {
                for face in s.faces()? {
                    if !present.contains(&face) {
                        return Err(SimplicialError::NotFaceClosed {
                            simplex: s.clone(),
                            missing_face: face,
                        });
                    }
                }
            }
        }
        Ok(CrispComplex { vertex_count, maxdim, present })
    }

    /// Builds the smallest face-closed complex containing the generators.
    pub fn closure(
        vertex_count: u32,
        maxdim: usize,
        generators: impl IntoIterator<Item = SimplexKey>,
    ) -> Result<Self, SimplicialError> {
        let mut present = BTreeSet::new();
        for g in generators {
            check_bounds(&g, vertex_count, maxdim)?;
            for s in g.all_subsets() {
                present.insert(s);
            }
        }
        Ok(CrispComplex { vertex_count, maxdim, present })
    }

    /// Complex with no simplices at all.
    pub fn empty(vertex_count: u32, maxdim: usize) -> Self {
        CrispComplex { vertex_count, maxdim, present: BTreeSet::new() }
    }

    pub fn vertex_count(&self) -> u32 {
        self.vertex_count
    }

    pub fn maxdim(&self) -> usize {
        self.maxdim
    }

    pub fn contains(&self, s: &SimplexKey) -> bool {
        self.present.contains(s)
    }

    pub fn simplices(&self) -> impl Iterator<Item = &SimplexKey> {
        self.present.iter()
    }

    pub fn len(&self) -> usize {
        self.present.len()
    }

    pub fn is_empty(&self) -> bool {
        self.present.is_empty()
    }

    pub fn same_shape(&self, other: &CrispComplex) -> bool {
        self.vertex_count == other.vertex_count && self.maxdim == other.maxdim
    }

    /// Elementwise max of indicators: the union of the simplex sets.
    pub fn union(&self, other: &CrispComplex) -> Result<CrispComplex, SimplicialError> {
        self.require_same_shape(other)?;
        let present = self.present.union(&other.present).cloned().collect();
        Ok(CrispComplex { vertex_count: self.vertex_count, maxdim: self.maxdim, present })
    }

    /// Elementwise min of indicators: the intersection of the simplex sets.
    pub fn intersection(&self, other: &CrispComplex) -> Result<CrispComplex, SimplicialError> {
        self.require_same_shape(other)?;
        let present = self.present.intersection(&other.present).cloned().collect();
        Ok(CrispComplex { vertex_count: self.vertex_count, maxdim: self.maxdim, present })
    }

    /// The `{0,1}`-valued fuzzy complex with this support.
    pub fn indicator(&self) -> FuzzyComplex {
        let weight = self.present.iter().map(|s| (s.clone(), 1.0)).collect();
        FuzzyComplex { vertex_count: self.vertex_count, maxdim: self.maxdim, weight }
    }

    fn require_same_shape(&self, other: &CrispComplex) -> Result<(), SimplicialError> {
        if !self.same_shape(other) {
            return Err(SimplicialError::ShapeMismatch(
                self.vertex_count,
                self.maxdim,
                other.vertex_count,
                other.maxdim,
            ));
        }
        Ok(())
    }
}

/// The smallest complex containing one simplex: all of its nonempty subsets.
pub fn minimal_complex(
    sigma: &SimplexKey,
    vertex_count: u32,
    maxdim: usize,
) -> Result<CrispComplex, SimplicialError> {
    check_bounds(sigma, vertex_count, maxdim)?;
    CrispComplex::closure(vertex_count, maxdim, [sigma.clone()])
}

fn check_bounds(s: &SimplexKey, vertex_count: u32, maxdim: usize) -> Result<(), SimplicialError> {
    if let Some(&v) = s.vertices().iter().find(|&&v| v >= vertex_count) {
        return Err(SimplicialError::VertexOutOfRange { vertex: v, vertex_count });
    }
    if s.dim() > maxdim {
        return Err(SimplicialError::DimensionExceedsMax {
            simplex: s.clone(),
            dim: s.dim(),
            maxdim,
        });
    }
    Ok(())
}

/// Binary merge rule on `[0,1]` weights: a t-norm or its dual t-conorm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MergeOp {
    Min,
    Product,
    Max,
    ProbabilisticSum,
}

impl MergeOp {
    pub const ALL: [MergeOp; 4] =
        [MergeOp::Min, MergeOp::Product, MergeOp::Max, MergeOp::ProbabilisticSum];

    pub fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            MergeOp::Min => a.min(b),
            MergeOp::Product => a * b,
            MergeOp::Max => a.max(b),
            MergeOp::ProbabilisticSum => a + b - a * b,
        }
    }

    /// True for the t-norms, whose identity element is 1.
    pub fn is_tnorm(self) -> bool {
        matches!(self, MergeOp::Min | MergeOp::Product)
    }

    /// The dual operation: `dual(a, b) = 1 - self(1 - a, 1 - b)`.
    pub fn dual(self) -> MergeOp {
        match self {
            MergeOp::Min => MergeOp::Max,
            MergeOp::Max => MergeOp::Min,
            MergeOp::Product => MergeOp::ProbabilisticSum,
            MergeOp::ProbabilisticSum => MergeOp::Product,
        }
    }

    /// Identity element: 1 for t-norms, 0 for t-conorms.
    pub fn identity(self) -> f64 {
        if self.is_tnorm() {
            1.0
        } else {
            0.0
        }
    }
}

/// One face-order violation found by [`FuzzyComplex::check_monotone`].
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneViolation {
    pub face: SimplexKey,
    pub simplex: SimplexKey,
    pub face_weight: f64,
    pub simplex_weight: f64,
}

impl fmt::Display for MonotoneViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "face {} has weight {} below its coface {} with weight {}",
            self.face, self.face_weight, self.simplex, self.simplex_weight
        )
    }
}

/// Result of a monotonicity check; empty means the complex is valid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MonotoneReport {
    pub violations: Vec<MonotoneViolation>,
}

impl MonotoneReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Weights in `[0,1]` on simplices; absent keys mean weight zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FuzzyComplexRepr", into = "FuzzyComplexRepr")]
pub struct FuzzyComplex {
    vertex_count: u32,
    maxdim: usize,
    weight: BTreeMap<SimplexKey, f64>,
}

impl FuzzyComplex {
    pub fn new(vertex_count: u32, maxdim: usize) -> Self {
        FuzzyComplex { vertex_count, maxdim, weight: BTreeMap::new() }
    }

    pub fn from_weights(
        vertex_count: u32,
        maxdim: usize,
        weights: impl IntoIterator<Item = (SimplexKey, f64)>,
    ) -> Result<Self, SimplicialError> {
        let mut out = FuzzyComplex::new(vertex_count, maxdim);
        for (s, w) in weights {
            out.set_weight(s, w)?;
        }
        Ok(out)
    }

    pub fn vertex_count(&self) -> u32 {
        self.vertex_count
    }

    pub fn maxdim(&self) -> usize {
        self.maxdim
    }

    /// Weight of a simplex; zero when absent.
    pub fn weight(&self, s: &SimplexKey) -> f64 {
        self.weight.get(s).copied().unwrap_or(0.0)
    }

    /// Sets a weight. Zero removes the key, keeping "absent means 0" canonical.
    pub fn set_weight(&mut self, s: SimplexKey, w: f64) -> Result<(), SimplicialError> {
        check_bounds(&s, self.vertex_count, self.maxdim)?;
        if !(0.0..=1.0).contains(&w) {
            return Err(SimplicialError::WeightOutOfRange { simplex: s, weight: w });
        }
        if w == 0.0 {
            self.weight.remove(&s);
        } else {
            self.weight.insert(s, w);
        }
        Ok(())
    }

    /// Simplices with nonzero weight, in key order.
    pub fn support(&self) -> impl Iterator<Item = (&SimplexKey, f64)> {
        self.weight.iter().map(|(k, &w)| (k, w))
    }

    pub fn support_len(&self) -> usize {
        self.weight.len()
    }

    pub fn same_shape(&self, other: &FuzzyComplex) -> bool {
        self.vertex_count == other.vertex_count && self.maxdim == other.maxdim
    }

    /// Checks the face-order invariant: every face weighs at least as much as
    /// its coface. Checking codimension-1 faces suffices by transitivity.
    pub fn check_monotone(&self) -> MonotoneReport {
        let mut violations = Vec::new();
        for (s, &w) in &self.weight {
            if s.dim() == 0 {
                continue;
            }
            for face in s.faces().expect("dim >= 1 has faces") {
                let fw = self.weight(&face);
                if fw < w {
                    violations.push(MonotoneViolation {
                        face,
                        simplex: s.clone(),
                        face_weight: fw,
                        simplex_weight: w,
                    });
                }
            }
        }
        MonotoneReport { violations }
    }

    /// Pointwise merge under a t-norm or t-conorm, over the union of supports.
    ///
    /// Monotone inputs give a monotone output for every [`MergeOp`]; both
    /// norms and conorms are monotone in each argument.
    pub fn merge(&self, other: &FuzzyComplex, op: MergeOp) -> Result<FuzzyComplex, SimplicialError> {
        if !self.same_shape(other) {
            return Err(SimplicialError::ShapeMismatch(
                self.vertex_count,
                self.maxdim,
                other.vertex_count,
                other.maxdim,
            ));
        }
        let mut keys: BTreeSet<&SimplexKey> = self.weight.keys().collect();
        keys.extend(other.weight.keys());
        let mut out = FuzzyComplex::new(self.vertex_count, self.maxdim);
        for key in keys {
            let w = op.apply(self.weight(key), other.weight(key));
            out.set_weight(key.clone(), w)?;
        }
        Ok(out)
    }
}

/// JSON shape: `{"vertices": n, "maxdim": d, "weights": [[[0,1], 0.7], ...]}`.
#[derive(Serialize, Deserialize)]
struct FuzzyComplexRepr {
    vertices: u32,
    maxdim: usize,
    weights: Vec<(Vec<u32>, f64)>,
}

impl TryFrom<FuzzyComplexRepr> for FuzzyComplex {
    type Error = SimplicialError;

    fn try_from(repr: FuzzyComplexRepr) -> Result<Self, Self::Error> {
        let mut out = FuzzyComplex::new(repr.vertices, repr.maxdim);
        for (vs, w) in repr.weights {
            out.set_weight(SimplexKey::new(vs)?, w)?;
        }
        Ok(out)
    }
}

impl From<FuzzyComplex> for FuzzyComplexRepr {
    fn from(f: FuzzyComplex) -> Self {
        FuzzyComplexRepr {
            vertices: f.vertex_count,
            maxdim: f.maxdim,
            weights: f.weight.into_iter().map(|(k, w)| (k.0, w)).collect(),
        }
    }
}

/// The six-vertex illustration complex used across the test suite:
/// vertices 1.0, 0.6, 0.4, 0.9, 0.6, 0.4; edges [0,1]=0.7, [1,2]=0.4,
/// [0,2]=0.3, [1,5]=0.2, [4,5]=0.4; triangle [0,1,2]=0.25.
#[cfg(test)]
pub(crate) fn illustration_complex() -> FuzzyComplex {
    FuzzyComplex::from_weights(
        6,
        2,
        [
            (simplex(&[0]), 1.0),
            (simplex(&[1]), 0.6),
            (simplex(&[2]), 0.4),
            (simplex(&[3]), 0.9),
            (simplex(&[4]), 0.6),
            (simplex(&[5]), 0.4),
            (simplex(&[0, 1]), 0.7),
            (simplex(&[1, 2]), 0.4),
            (simplex(&[0, 2]), 0.3),
            (simplex(&[1, 5]), 0.2),
            (simplex(&[4, 5]), 0.4),
            (simplex(&[0, 1, 2]), 0.25),
        ],
    )
    .unwrap()
}
