//! Finite partial orders with dense order tables, down-set enumeration, and
//! Moebius inversion.
//!
//! The Moebius table is computed once per poset and stores exact integers, so
//! zeta transform followed by inversion is an exact identity up to float
//! summation of the input values themselves.

use thiserror::Error;

/// Hard cap for [`enumerate_down_sets`]; the family can have up to `2^n`
/// members.
pub const DOWN_SET_CAP: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PosetError {
    #[error("relation is not reflexive at element {element}")]
    NotReflexive { element: usize },
    #[error("relation is not antisymmetric: {a} <= {b} and {b} <= {a}")]
    NotAntisymmetric { a: usize, b: usize },
    #[error("relation is not transitive: {a} <= {b} <= {c} but not {a} <= {c}")]
    NotTransitive { a: usize, b: usize, c: usize },
    #[error("poset has {len} elements, enumeration is capped at {cap}")]
    CapExceeded { len: usize, cap: usize },
    #[error("value vector has length {got}, poset has {expected} elements")]
    LengthMismatch { expected: usize, got: usize },
    #[error("order table has length {got}, expected {expected}")]
    TableShape { expected: usize, got: usize },
}

/// Finite poset over elements `0..n` with a dense `n * n` order table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinitePoset {
    n: usize,
    /// `leq[a * n + b]` holds iff `a <= b`.
    leq: Vec<bool>,
}

impl FinitePoset {
    /// Validates reflexivity, antisymmetry, and transitivity of a dense order
    /// table and wraps it. Violations name the witnessing elements.
    pub fn new(n: usize, leq: Vec<bool>) -> Result<Self, PosetError> {
        if leq.len() != n * n {
            return Err(PosetError::TableShape { expected: n * n, got: leq.len() });
        }
        let p = FinitePoset { n, leq };
        for a in 0..n {
            if !p.leq(a, a) {
                return Err(PosetError::NotReflexive { element: a });
            }
        }
        for a in 0..n {
            for b in (a + 1)..n {
                if p.leq(a, b) && p.leq(b, a) {
                    return Err(PosetError::NotAntisymmetric { a, b });
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                if !p.leq(a, b) {
                    continue;
                }
                for c in 0..n {
                    if p.leq(b, c) && !p.leq(a, c) {
                        return Err(PosetError::NotTransitive { a, b, c });
                    }
                }
            }
        }
        Ok(p)
    }

    /// Builds the order table from a comparison closure and validates it.
    pub fn from_leq_fn(n: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self, PosetError> {
        let mut leq = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                leq[a * n + b] = f(a, b);
            }
        }
        FinitePoset::new(n, leq)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a * self.n + b]
    }

    /// Strictly below: `a <= b` and `a != b`.
    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq(a, b)
    }

    /// A linear extension (every element appears after everything below it).
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut below_count: Vec<usize> = (0..self.n)
            .map(|b| (0..self.n).filter(|&a| self.lt(a, b)).count())
            .collect();
        let mut order = Vec::with_capacity(self.n);
        let mut placed = vec![false; self.n];
        for _ in 0..self.n {
            // The validated order is acyclic, so a minimal element exists.
            let next = (0..self.n)
                .find(|&b| !placed[b] && below_count[b] == 0)
                .expect("validated poset has a minimal element");
            placed[next] = true;
            order.push(next);
            for b in 0..self.n {
                if !placed[b] && self.lt(next, b) {
                    below_count[b] -= 1;
                }
            }
        }
        order
    }
}

/// Downward-closed subset of a poset, stored as a membership bitvec.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DownSet {
    members: Vec<bool>,
}

impl DownSet {
    /// Wraps a membership vector after checking downward closure.
    pub fn new(poset: &FinitePoset, members: Vec<bool>) -> Result<Self, PosetError> {
        if members.len() != poset.len() {
            return Err(PosetError::LengthMismatch { expected: poset.len(), got: members.len() });
        }
        for b in 0..poset.len() {
            if !members[b] {
                continue;
            }
            for a in 0..poset.len() {
                if poset.lt(a, b) && !members[a] {
                    // Reuse the transitivity variant shape for a closure
                    // failure witness: a < b is in violation.
                    return Err(PosetError::NotTransitive { a, b, c: b });
                }
            }
        }
        Ok(DownSet { members })
    }

    pub fn contains(&self, element: usize) -> bool {
        self.members[element]
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }

    pub fn union(&self, other: &DownSet) -> DownSet {
        let members = self.members.iter().zip(&other.members).map(|(&a, &b)| a || b).collect();
        DownSet { members }
    }

    pub fn intersection(&self, other: &DownSet) -> DownSet {
        let members = self.members.iter().zip(&other.members).map(|(&a, &b)| a && b).collect();
        DownSet { members }
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }
}

/// All down-sets of the poset, in ascending bitmask order.
///
/// Caps the poset size at [`DOWN_SET_CAP`] elements since the family can be
/// exponentially large.
pub fn enumerate_down_sets(poset: &FinitePoset) -> Result<Vec<DownSet>, PosetError> {
    let n = poset.len();
    if n > DOWN_SET_CAP {
        return Err(PosetError::CapExceeded { len: n, cap: DOWN_SET_CAP });
    }
    // For each element the bitmask of its strict down-set; a subset S is a
    // down-set iff the union of these masks over S stays inside S.
    let mut below = vec![0u32; n];
    for b in 0..n {
        for a in 0..n {
            if poset.lt(a, b) {
                below[b] |= 1 << a;
            }
        }
    }
    let mut out = Vec::new();
    for mask in 0u32..(1u32 << n) {
        let mut required = 0u32;
        let mut m = mask;
        while m != 0 {
            let b = m.trailing_zeros() as usize;
            required |= below[b];
            m &= m - 1;
        }
        if required & !mask == 0 {
            let members = (0..n).map(|i| mask & (1 << i) != 0).collect();
            out.push(DownSet { members });
        }
    }
    Ok(out)
}

/// Moebius function values for all comparable pairs of a poset.
///
/// Entries for incomparable pairs are zero so the table can be read densely.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoebiusTable {
    n: usize,
    values: Vec<i64>,
}

impl MoebiusTable {
    /// `m(a, b)`; zero when `a <= b` does not hold.
    pub fn get(&self, a: usize, b: usize) -> i64 {
        self.values[a * self.n + b]
    }
}

/// Computes the Moebius table by the defining recursion: `m(c, c) = 1` and
/// `m(c, d) = -sum of m(c, b) over c <= b < d`.
pub fn moebius(poset: &FinitePoset) -> MoebiusTable {
    let n = poset.len();
    let order = poset.linear_extension();
    let mut values = vec![0i64; n * n];
    for c in 0..n {
        for &d in &order {
            if !poset.leq(c, d) {
                continue;
            }
            if c == d {
                values[c * n + d] = 1;
                continue;
            }
            let mut sum = 0i64;
            for b in 0..n {
                if b != d && poset.leq(c, b) && poset.leq(b, d) {
                    sum += values[c * n + b];
                }
            }
            values[c * n + d] = -sum;
        }
    }
    MoebiusTable { n, values }
}

/// Cumulative sums down the order: `g(c) = sum of q(c') over c' <= c`.
pub fn zeta_transform(poset: &FinitePoset, q: &[f64]) -> Result<Vec<f64>, PosetError> {
    let n = poset.len();
    if q.len() != n {
        return Err(PosetError::LengthMismatch { expected: n, got: q.len() });
    }
    let mut g = vec![0.0; n];
    for (c, gc) in g.iter_mut().enumerate() {
        for (cp, &qv) in q.iter().enumerate() {
            if poset.leq(cp, c) {
                *gc += qv;
            }
        }
    }
    Ok(g)
}

/// Inverts a zeta transform: `f(c) = sum of g(c') * m(c', c) over c' <= c`.
pub fn moebius_invert(poset: &FinitePoset, g: &[f64]) -> Result<Vec<f64>, PosetError> {
    let n = poset.len();
    if g.len() != n {
        return Err(PosetError::LengthMismatch { expected: n, got: g.len() });
    }
    let table = moebius(poset);
    let mut f = vec![0.0; n];
    for (c, fc) in f.iter_mut().enumerate() {
        for (cp, &gv) in g.iter().enumerate() {
            if poset.leq(cp, c) {
                *fc += gv * table.get(cp, c) as f64;
            }
        }
    }
    Ok(f)
}
