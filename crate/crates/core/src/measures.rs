//! Probability measures over crisp complexes and over single simplices:
//! marginal fuzzy weights, the constructive level-set preimage, cumulative
//! marginals with Moebius inversion, Boolean merging, divergences, and the
//! rank-order edge chain of the random-scale model.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poset::{moebius_invert, FinitePoset};
use crate::scale::{ScaleDistribution, ScaleError};
use crate::simplicial::{
    all_simplices, CrispComplex, FuzzyComplex, SimplexKey, SimplicialError,
};

/// Tolerance on total probability for [`ComplexMeasure`].
pub const PROB_SUM_TOLERANCE: f64 = 1e-12;
/// Tolerance used by [`cdm_invert`] when deciding whether an inversion is a
/// genuine probability measure, and by [`SimplexMeasure`] validation.
pub const INVERSION_TOLERANCE: f64 = 1e-9;
/// Clamp bound for the second argument of [`fuzzy_cross_entropy`].
pub const CE_CLAMP: f64 = 1e-12;
/// Expansion cap for [`EdgeIndependentMeasure::expand`].
pub const EDGE_EXPANSION_CAP: usize = 15;
/// Variable-count cap for the exact local-Markov verification.
pub const MARKOV_ENUMERATION_CAP: usize = 16;

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("support entry {index} has negative probability {prob}")]
    NegativeProbability { index: usize, prob: f64 },
    #[error("probabilities sum to {sum}, expected 1")]
    BadTotalProbability { sum: f64 },
    #[error("duplicate support entries at positions {first} and {second}")]
    DuplicateSupport { first: usize, second: usize },
    #[error("support entries disagree on vertex count or maxdim")]
    MixedShapes,
    #[error("shapes differ between the two measures")]
    ShapeMismatch,
    #[error("weights are not monotone: {0}")]
    NonMonotoneInput(String),
    #[error("no simplex-measure preimage: {reason}")]
    NoPreimage { reason: String },
    #[error("{count} exceeds cap {cap}")]
    CapExceeded { count: usize, cap: usize },
    #[error("not locally Markov: {0}")]
    NotLocallyMarkov(String),
    #[error("assignment has {got} bits, chain has {expected} edges")]
    AssignmentLength { expected: usize, got: usize },
    #[error("{simplex} is not an edge")]
    NotAnEdge { simplex: SimplexKey },
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
    #[error(transparent)]
    Scale(#[from] ScaleError),
}

/// Probability measure with finite support on crisp complexes of one shape.
///
/// Zero-probability entries are dropped on construction, so the stored
/// support is exactly the positive-mass complexes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMeasureRepr", into = "ComplexMeasureRepr")]
pub struct ComplexMeasure {
    vertex_count: u32,
    maxdim: usize,
    support: Vec<(CrispComplex, f64)>,
}

impl ComplexMeasure {
    pub fn new(support: Vec<(CrispComplex, f64)>) -> Result<Self, MeasureError> {
        for (index, (_, prob)) in support.iter().enumerate() {
            if *prob < 0.0 || !prob.is_finite() {
                return Err(MeasureError::NegativeProbability { index, prob: *prob });
            }
        }
        let sum: f64 = support.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(MeasureError::BadTotalProbability { sum });
        }
        let mut kept: Vec<(CrispComplex, f64)> =
            support.into_iter().filter(|(_, p)| *p > 0.0).collect();
        let (vertex_count, maxdim) = match kept.first() {
            Some((c, _)) => (c.vertex_count(), c.maxdim()),
            None => return Err(MeasureError::BadTotalProbability { sum }),
        };
        if kept.iter().any(|(c, _)| c.vertex_count() != vertex_count || c.maxdim() != maxdim) {
            return Err(MeasureError::MixedShapes);
        }
        let mut order: Vec<usize> = (0..kept.len()).collect();
        order.sort_by(|&a, &b| kept[a].0.cmp(&kept[b].0));
        for w in order.windows(2) {
            if kept[w[0]].0 == kept[w[1]].0 {
                return Err(MeasureError::DuplicateSupport {
                    first: w[0].min(w[1]),
                    second: w[0].max(w[1]),
                });
            }
        }
        kept.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(ComplexMeasure { vertex_count, maxdim, support: kept })
    }

    /// Point mass on a single complex.
    pub fn delta(complex: CrispComplex) -> Self {
        ComplexMeasure {
            vertex_count: complex.vertex_count(),
            maxdim: complex.maxdim(),
            support: vec![(complex, 1.0)],
        }
    }

    pub fn vertex_count(&self) -> u32 {
        self.vertex_count
    }

    pub fn maxdim(&self) -> usize {
        self.maxdim
    }

    pub fn support(&self) -> impl Iterator<Item = (&CrispComplex, f64)> {
        self.support.iter().map(|(c, p)| (c, *p))
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    /// Probability of one complex; zero when outside the support.
    pub fn prob(&self, complex: &CrispComplex) -> f64 {
        self.support
            .binary_search_by(|(c, _)| c.cmp(complex))
            .map(|i| self.support[i].1)
            .unwrap_or(0.0)
    }

    pub fn same_shape(&self, other: &ComplexMeasure) -> bool {
        self.vertex_count == other.vertex_count && self.maxdim == other.maxdim
    }
}

/// JSON shape: `{"complexes": [{"simplices": [[0], [0,1], ...], "p": 0.5}]}`.
///
/// The complex shape is inferred on read: vertex count is one past the
/// largest vertex id, maxdim the largest simplex dimension present.
#[derive(Serialize, Deserialize)]
struct ComplexMeasureRepr {
    complexes: Vec<ComplexEntryRepr>,
}

#[derive(Serialize, Deserialize)]
struct ComplexEntryRepr {
    simplices: Vec<Vec<u32>>,
    p: f64,
}

impl TryFrom<ComplexMeasureRepr> for ComplexMeasure {
    type Error = MeasureError;

    fn try_from(repr: ComplexMeasureRepr) -> Result<Self, Self::Error> {
        let mut vertex_count = 1;
        let mut maxdim = 0;
        for entry in &repr.complexes {
            for vs in &entry.simplices {
                if let Some(&max) = vs.iter().max() {
                    vertex_count = vertex_count.max(max + 1);
                }
                maxdim = maxdim.max(vs.len().saturating_sub(1));
            }
        }
        let mut support = Vec::with_capacity(repr.complexes.len());
        for entry in repr.complexes {
            let keys = entry
                .simplices
                .into_iter()
                .map(SimplexKey::new)
                .collect::<Result<Vec<_>, _>>()
                .map_err(MeasureError::Simplicial)?;
            let complex = CrispComplex::new(vertex_count, maxdim, keys)?;
            support.push((complex, entry.p));
        }
        ComplexMeasure::new(support)
    }
}

impl From<ComplexMeasure> for ComplexMeasureRepr {
    fn from(m: ComplexMeasure) -> Self {
        let complexes = m
            .support
            .into_iter()
            .map(|(c, p)| ComplexEntryRepr {
                simplices: c.simplices().map(|s| s.vertices().to_vec()).collect(),
                p,
            })
            .collect();
        ComplexMeasureRepr { complexes }
    }
}

/// Marginal presence probabilities: `weight(s) = sum of p(S) over S containing s`.
///
/// The result is monotone because containing complexes of a face include all
/// containing complexes of its cofaces.
pub fn marginal(m: &ComplexMeasure) -> FuzzyComplex {
    let mut weights: BTreeMap<SimplexKey, f64> = BTreeMap::new();
    for (complex, p) in m.support() {
        for s in complex.simplices() {
            *weights.entry(s.clone()).or_insert(0.0) += p;
        }
    }
    let mut out = FuzzyComplex::new(m.vertex_count(), m.maxdim());
    for (s, w) in weights {
        // Accumulated probabilities can overshoot 1 by float dust.
        out.set_weight(s, w.min(1.0)).expect("weights clamped into range");
    }
    out
}

/// Constructive preimage of the marginal map: the threshold decomposition.
///
/// The support consists of the level complexes `S_w = {s : F(s) >= w}` over
/// the distinct positive weights `w`, plus the empty complex carrying mass
/// `1 - max weight` when positive. `marginal(level_set_preimage(F)) = F` up
/// to float summation.
pub fn level_set_preimage(f: &FuzzyComplex) -> Result<ComplexMeasure, MeasureError> {
    let report = f.check_monotone();
    if let Some(v) = report.violations.first() {
        return Err(MeasureError::NonMonotoneInput(v.to_string()));
    }
    let mut levels: Vec<f64> = f.support().map(|(_, w)| w).collect();
    levels.sort_by(|a, b| b.partial_cmp(a).unwrap());
    levels.dedup();
    let mut support = Vec::with_capacity(levels.len() + 1);
    for (i, &w) in levels.iter().enumerate() {
        let present: Vec<SimplexKey> =
            f.support().filter(|&(_, fw)| fw >= w).map(|(s, _)| s.clone()).collect();
        let complex = CrispComplex::new(f.vertex_count(), f.maxdim(), present)?;
        let next = levels.get(i + 1).copied().unwrap_or(0.0);
        support.push((complex, w - next));
    }
    let top = levels.first().copied().unwrap_or(0.0);
    if top < 1.0 {
        support.push((CrispComplex::empty(f.vertex_count(), f.maxdim()), 1.0 - top));
    }
    ComplexMeasure::new(support)
}

/// Probability measure with finite support on single simplices.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexMeasure {
    vertex_count: u32,
    maxdim: usize,
    support: Vec<(SimplexKey, f64)>,
}

impl SimplexMeasure {
    /// Validates nonnegativity, distinct keys, bounds, and a total of 1
    /// within [`INVERSION_TOLERANCE`]. Zero entries are dropped.
    pub fn new(
        vertex_count: u32,
        maxdim: usize,
        support: Vec<(SimplexKey, f64)>,
    ) -> Result<Self, MeasureError> {
        for (index, (_, prob)) in support.iter().enumerate() {
            if *prob < 0.0 || !prob.is_finite() {
                return Err(MeasureError::NegativeProbability { index, prob: *prob });
            }
        }
        let sum: f64 = support.iter().map(|(_, p)| p).sum();
        if (sum - 1.0).abs() > INVERSION_TOLERANCE {
            return Err(MeasureError::BadTotalProbability { sum });
        }
        let mut kept: Vec<(SimplexKey, f64)> =
            support.into_iter().filter(|(_, p)| *p > 0.0).collect();
        kept.sort_by(|a, b| a.0.cmp(&b.0));
        for (i, w) in kept.windows(2).enumerate() {
            if w[0].0 == w[1].0 {
                return Err(MeasureError::DuplicateSupport { first: i, second: i + 1 });
            }
        }
        for (s, _) in &kept {
            // Bounds checking via a throwaway weight assignment.
            let mut probe = FuzzyComplex::new(vertex_count, maxdim);
            probe.set_weight(s.clone(), 1.0)?;
        }
        Ok(SimplexMeasure { vertex_count, maxdim, support: kept })
    }

    pub fn delta(vertex_count: u32, maxdim: usize, s: SimplexKey) -> Result<Self, MeasureError> {
        SimplexMeasure::new(vertex_count, maxdim, vec![(s, 1.0)])
    }

    pub fn vertex_count(&self) -> u32 {
        self.vertex_count
    }

    pub fn maxdim(&self) -> usize {
        self.maxdim
    }

    pub fn support(&self) -> impl Iterator<Item = (&SimplexKey, f64)> {
        self.support.iter().map(|(s, p)| (s, *p))
    }

    pub fn prob(&self, s: &SimplexKey) -> f64 {
        self.support
            .binary_search_by(|(k, _)| k.cmp(s))
            .map(|i| self.support[i].1)
            .unwrap_or(0.0)
    }
}

/// Cumulative marginal of a simplex measure:
/// `weight(s) = sum of q(s') over supersets s' of s`.
pub fn cdm_marginal(q: &SimplexMeasure) -> FuzzyComplex {
    let mut weights: BTreeMap<SimplexKey, f64> = BTreeMap::new();
    for (s, p) in q.support() {
        for sub in s.all_subsets() {
            *weights.entry(sub).or_insert(0.0) += p;
        }
    }
    let mut out = FuzzyComplex::new(q.vertex_count(), q.maxdim());
    for (s, w) in weights {
        out.set_weight(s, w.min(1.0)).expect("weights clamped into range");
    }
    out
}

/// Inverts [`cdm_marginal`] by Moebius inversion over the simplex poset
/// (ordered by reverse inclusion, so cumulative sums run over supersets).
///
/// Most fuzzy complexes have no simplex-measure preimage; those return
/// [`MeasureError::NoPreimage`] when an inverted value is negative beyond
/// [`INVERSION_TOLERANCE`] or the total misses 1.
pub fn cdm_invert(f: &FuzzyComplex) -> Result<SimplexMeasure, MeasureError> {
    let simplices = all_simplices(f.vertex_count(), f.maxdim());
    let n = simplices.len();
    let poset = FinitePoset::from_leq_fn(n, |a, b| simplices[a].contains(&simplices[b]))
        .expect("reverse inclusion is a partial order");
    let g: Vec<f64> = simplices.iter().map(|s| f.weight(s)).collect();
    let inverted = moebius_invert(&poset, &g).expect("lengths match by construction");
    let mut support = Vec::new();
    let mut total = 0.0;
    for (s, &v) in simplices.iter().zip(&inverted) {
        if v < -INVERSION_TOLERANCE {
            return Err(MeasureError::NoPreimage {
                reason: format!("inverted value {v} at {s} is negative"),
            });
        }
        total += v;
        if v > 0.0 {
            support.push((s.clone(), v));
        }
    }
    if (total - 1.0).abs() > INVERSION_TOLERANCE {
        return Err(MeasureError::NoPreimage {
            reason: format!("inverted values sum to {total}, expected 1"),
        });
    }
    SimplexMeasure::new(f.vertex_count(), f.maxdim(), support)
}

/// Elementwise Boolean combination used by [`boolean_merge`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolMerge {
    /// Elementwise max of indicators: union of simplex sets.
    Or,
    /// Elementwise min of indicators: intersection of simplex sets.
    And,
}

/// Pushforward of the independent product of two measures under elementwise
/// OR or AND of the complex indicators.
pub fn boolean_merge(
    p1: &ComplexMeasure,
    p2: &ComplexMeasure,
    op: BoolMerge,
) -> Result<ComplexMeasure, MeasureError> {
    if !p1.same_shape(p2) {
        return Err(MeasureError::ShapeMismatch);
    }
    let mut acc: BTreeMap<CrispComplex, f64> = BTreeMap::new();
    for (c1, q1) in p1.support() {
        for (c2, q2) in p2.support() {
            let merged = match op {
                BoolMerge::Or => c1.union(c2)?,
                BoolMerge::And => c1.intersection(c2)?,
            };
            *acc.entry(merged).or_insert(0.0) += q1 * q2;
        }
    }
    ComplexMeasure::new(acc.into_iter().collect())
}

/// `sum of p ln(p/q)` over the support of `p`; `+inf` when `p` charges a
/// complex that `q` does not.
pub fn kl_divergence(p: &ComplexMeasure, q: &ComplexMeasure) -> f64 {
    let mut total = 0.0;
    for (complex, pp) in p.support() {
        let qq = q.prob(complex);
        if qq <= 0.0 {
            return f64::INFINITY;
        }
        total += pp * (pp / qq).ln();
    }
    total
}

/// One Bernoulli relative-entropy term with the `0 ln 0 = 0` convention.
/// Degenerate second arguments give `+inf` unless `clamp` pulls them into
/// `[CE_CLAMP, 1 - CE_CLAMP]` (only applied for interior first arguments).
fn bernoulli_term(mu1: f64, mu2: f64, clamp: bool) -> f64 {
    if mu1 == 0.0 {
        return if mu2 >= 1.0 { f64::INFINITY } else { -(-mu2).ln_1p() };
    }
    if mu1 == 1.0 {
        return if mu2 <= 0.0 { f64::INFINITY } else { -mu2.ln() };
    }
    let mu2 = if clamp { mu2.clamp(CE_CLAMP, 1.0 - CE_CLAMP) } else { mu2 };
    if mu2 <= 0.0 || mu2 >= 1.0 {
        return f64::INFINITY;
    }
    mu1 * (mu1 / mu2).ln() + (1.0 - mu1) * ((1.0 - mu1) / (1.0 - mu2)).ln()
}

/// Fuzzy cross entropy between two weight functions of the same shape:
/// per-dimension weighted sum of Bernoulli relative entropies.
///
/// `dim_weights[n]` scales dimension `n`; missing entries default to 1.
/// Where both weights vanish the term is zero, so only the union of supports
/// contributes.
pub fn fuzzy_cross_entropy(
    f1: &FuzzyComplex,
    f2: &FuzzyComplex,
    dim_weights: &[f64],
) -> Result<f64, MeasureError> {
    if !f1.same_shape(f2) {
        return Err(MeasureError::ShapeMismatch);
    }
    let mut keys: Vec<&SimplexKey> = f1.support().map(|(s, _)| s).collect();
    keys.extend(f2.support().map(|(s, _)| s));
    keys.sort();
    keys.dedup();
    let mut total = 0.0;
    for s in keys {
        let w = dim_weights.get(s.dim()).copied().unwrap_or(1.0);
        total += w * bernoulli_term(f1.weight(s), f2.weight(s), true);
    }
    Ok(total)
}

/// Independent edge model: vertices present with probability 1, each edge
/// present independently with its own probability.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeIndependentMeasure {
    vertex_count: u32,
    edge_prob: BTreeMap<SimplexKey, f64>,
}

impl EdgeIndependentMeasure {
    pub fn new(
        vertex_count: u32,
        edge_prob: impl IntoIterator<Item = (SimplexKey, f64)>,
    ) -> Result<Self, MeasureError> {
        let mut map = BTreeMap::new();
        for (index, (s, p)) in edge_prob.into_iter().enumerate() {
            if s.dim() != 1 {
                return Err(MeasureError::NotAnEdge { simplex: s });
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(MeasureError::NegativeProbability { index, prob: p });
            }
            // The throwaway assignment validates the vertex bounds.
            FuzzyComplex::new(vertex_count, 1).set_weight(s.clone(), p)?;
            map.insert(s, p);
        }
        Ok(EdgeIndependentMeasure { vertex_count, edge_prob: map })
    }

    pub fn vertex_count(&self) -> u32 {
        self.vertex_count
    }

    pub fn edge_probs(&self) -> impl Iterator<Item = (&SimplexKey, f64)> {
        self.edge_prob.iter().map(|(s, &p)| (s, p))
    }

    /// The marginal weights without expanding: vertices 1, edges as given.
    pub fn marginal(&self) -> FuzzyComplex {
        let mut out = FuzzyComplex::new(self.vertex_count, 1);
        for v in 0..self.vertex_count {
            out.set_weight(SimplexKey::new(vec![v]).unwrap(), 1.0).unwrap();
        }
        for (s, p) in &self.edge_prob {
            out.set_weight(s.clone(), *p).unwrap();
        }
        out
    }

    /// Expands the product measure over all `2^edges` presence patterns.
    /// Capped at [`EDGE_EXPANSION_CAP`] edges.
    pub fn expand(&self) -> Result<ComplexMeasure, MeasureError> {
        let edges: Vec<(&SimplexKey, f64)> = self.edge_prob.iter().map(|(s, &p)| (s, p)).collect();
        if edges.len() > EDGE_EXPANSION_CAP {
            return Err(MeasureError::CapExceeded { count: edges.len(), cap: EDGE_EXPANSION_CAP });
        }
        let vertices: Vec<SimplexKey> =
            (0..self.vertex_count).map(|v| SimplexKey::new(vec![v]).unwrap()).collect();
        let mut support = Vec::with_capacity(1 << edges.len());
        for mask in 0u32..(1 << edges.len()) {
            let mut prob = 1.0;
            let mut present = vertices.clone();
            for (bit, (s, p)) in edges.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    prob *= p;
                    present.push((*s).clone());
                } else {
                    prob *= 1.0 - p;
                }
            }
            if prob > 0.0 {
                support.push((CrispComplex::new(self.vertex_count, 1, present)?, prob));
            }
        }
        ComplexMeasure::new(support)
    }
}

/// Comparison of fuzzy cross entropy against exact KL for two independent
/// edge models, where the two must agree.
#[derive(Debug, Clone, PartialEq)]
pub struct CeKlReport {
    pub cross_entropy: f64,
    pub kl: f64,
    pub gap: f64,
}

/// Computes CE between the marginals and KL between the expanded measures of
/// two independent edge models, reporting the gap (zero in exact arithmetic).
pub fn verify_ce_equals_kl(
    e1: &EdgeIndependentMeasure,
    e2: &EdgeIndependentMeasure,
) -> Result<CeKlReport, MeasureError> {
    let ce = fuzzy_cross_entropy(&e1.marginal(), &e2.marginal(), &[])?;
    let kl = kl_divergence(&e1.expand()?, &e2.expand()?);
    let gap = if ce.is_infinite() && kl.is_infinite() { 0.0 } else { (ce - kl).abs() };
    Ok(CeKlReport { cross_entropy: ce, kl, gap })
}

/// Presence pattern of a complex over a fixed simplex list.
fn presence_pattern(complex: &CrispComplex, vars: &[SimplexKey]) -> Vec<bool> {
    vars.iter().map(|s| complex.contains(s)).collect()
}

/// Checks the local Markov property of `m` against the face DAG whose
/// parents are codimension-1 faces: each simplex indicator must be
/// independent of its non-descendants given its parents. Exact enumeration
/// over the support; returns a witness description on failure.
fn local_markov_witness(m: &ComplexMeasure, vars: &[SimplexKey]) -> Option<String> {
    for (i, sigma) in vars.iter().enumerate() {
        let parents: Vec<usize> = if sigma.dim() == 0 {
            Vec::new()
        } else {
            let faces = sigma.faces().expect("dim >= 1");
            vars.iter()
                .enumerate()
                .filter(|(_, v)| faces.contains(v))
                .map(|(j, _)| j)
                .collect()
        };
        let others: Vec<usize> = (0..vars.len())
            .filter(|&j| j != i && !parents.contains(&j) && !vars[j].contains(sigma))
            .collect();
        // P(sigma, parents, rest) and P(sigma, parents) aggregated over the
        // support; keys are the conditioning patterns.
        let mut full: BTreeMap<(Vec<bool>, Vec<bool>), [f64; 2]> = BTreeMap::new();
        let mut by_parents: BTreeMap<Vec<bool>, [f64; 2]> = BTreeMap::new();
        for (complex, p) in m.support() {
            let pattern = presence_pattern(complex, vars);
            let pa: Vec<bool> = parents.iter().map(|&j| pattern[j]).collect();
            let rest: Vec<bool> = others.iter().map(|&j| pattern[j]).collect();
            let bit = pattern[i] as usize;
            full.entry((pa.clone(), rest)).or_insert([0.0; 2])[bit] += p;
            by_parents.entry(pa).or_insert([0.0; 2])[bit] += p;
        }
        for ((pa, rest), counts) in &full {
            let cond_total = counts[0] + counts[1];
            if cond_total <= 0.0 {
                continue;
            }
            let parent_counts = &by_parents[pa];
            let cond_full = counts[1] / cond_total;
            let cond_pa = parent_counts[1] / (parent_counts[0] + parent_counts[1]);
            if (cond_full - cond_pa).abs() > INVERSION_TOLERANCE {
                return Some(format!(
                    "P({sigma} | parents {pa:?}, rest {rest:?}) = {cond_full} \
                     but P({sigma} | parents {pa:?}) = {cond_pa}"
                ));
            }
        }
    }
    None
}

/// KL divergence computed through the face-DAG factorization: a sum over
/// simplices of parent-present-weighted conditional Bernoulli divergences.
///
/// Both measures must pass the exact local-Markov verification; the result
/// then matches [`kl_divergence`] up to float error.
pub fn locally_markov_kl(p: &ComplexMeasure, q: &ComplexMeasure) -> Result<f64, MeasureError> {
    if !p.same_shape(q) {
        return Err(MeasureError::ShapeMismatch);
    }
    let vars = all_simplices(p.vertex_count(), p.maxdim());
    if vars.len() > MARKOV_ENUMERATION_CAP {
        return Err(MeasureError::CapExceeded { count: vars.len(), cap: MARKOV_ENUMERATION_CAP });
    }
    if let Some(witness) = local_markov_witness(p, &vars) {
        return Err(MeasureError::NotLocallyMarkov(format!("first measure: {witness}")));
    }
    if let Some(witness) = local_markov_witness(q, &vars) {
        return Err(MeasureError::NotLocallyMarkov(format!("second measure: {witness}")));
    }
    let mut total = 0.0;
    for sigma in &vars {
        let parents = if sigma.dim() == 0 { Vec::new() } else { sigma.faces()? };
        let parents_present = |m: &ComplexMeasure| -> f64 {
            m.support()
                .filter(|(c, _)| parents.iter().all(|f| c.contains(f)))
                .map(|(_, prob)| prob)
                .sum()
        };
        let sigma_present = |m: &ComplexMeasure| -> f64 {
            // Face closure makes {sigma present} a subset of {parents present}.
            m.support().filter(|(c, _)| c.contains(sigma)).map(|(_, prob)| prob).sum()
        };
        let p_pa = parents_present(p);
        if p_pa <= 0.0 {
            continue;
        }
        let q_pa = parents_present(q);
        if q_pa <= 0.0 {
            return Ok(f64::INFINITY);
        }
        let cp = sigma_present(p) / p_pa;
        let cq = sigma_present(q) / q_pa;
        let term = bernoulli_term(cp.clamp(0.0, 1.0), cq.clamp(0.0, 1.0), false);
        if term.is_infinite() {
            return Ok(f64::INFINITY);
        }
        total += p_pa * term;
    }
    Ok(total)
}

/// Edge chain of the random-scale model: edges sorted by distance, each
/// annotated with the scale CDF at its distance.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOrderChain {
    distances: Vec<f64>,
    phi: Vec<f64>,
}

impl RankOrderChain {
    /// Sorts the distances ascending and evaluates the CDF at each.
    pub fn new(mut distances: Vec<f64>, dist: &ScaleDistribution) -> Result<Self, MeasureError> {
        distances.sort_by(|a, b| a.partial_cmp(b).expect("distances must not be NaN"));
        let phi = distances.iter().map(|&d| dist.cdf(d)).collect::<Result<Vec<_>, _>>()?;
        Ok(RankOrderChain { distances, phi })
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }
}

/// Joint probability of an edge presence pattern under the random-scale
/// model, computed as the Markov chain factorization along the sorted edges.
///
/// Presence of an edge forces presence of all shorter edges, so any pattern
/// with a longer edge present above an absent shorter one has probability 0.
pub fn rank_order_joint(chain: &RankOrderChain, assignment: &[bool]) -> Result<f64, MeasureError> {
    if assignment.len() != chain.len() {
        return Err(MeasureError::AssignmentLength {
            expected: chain.len(),
            got: assignment.len(),
        });
    }
    if chain.is_empty() {
        return Ok(1.0);
    }
    let mut prob = if assignment[0] { 1.0 - chain.phi[0] } else { chain.phi[0] };
    for i in 1..chain.len() {
        if prob == 0.0 {
            return Ok(0.0);
        }
        let survival_prev = 1.0 - chain.phi[i - 1];
        let survival_here = 1.0 - chain.phi[i];
        let conditional = match (assignment[i - 1], assignment[i]) {
            (false, true) => 0.0,
            (false, false) => 1.0,
            // survival_prev > 0 here: the running product contains the factor
            // P(previous edge present) which would otherwise be 0.
            (true, true) => survival_here / survival_prev,
            (true, false) => 1.0 - survival_here / survival_prev,
        };
        prob *= conditional;
    }
    Ok(prob)
}
