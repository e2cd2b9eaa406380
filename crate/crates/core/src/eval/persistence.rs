//! Vietoris-Rips persistence in dimensions 0 and 1.
//!
//! `vr_persistence` is the production path: union-find for components plus
//! column reduction over GF(2) for one-cycles. `persistence_by_rank` is a
//! deliberately independent reference that recomputes rank invariants at
//! every pair of critical scales; it exists to validate the fast path on
//! small inputs.

use std::collections::BTreeMap;

use crate::filtration::DistanceMatrix;

use super::EvalError;

/// Largest point count `vr_persistence` accepts; the triangle count grows
/// cubically.
pub const PERSISTENCE_CAP: usize = 400;

/// Largest point count for the rank-counting reference implementation.
pub const RANK_ORACLE_CAP: usize = 16;

/// Persistence pairs per dimension as `(birth, death)`; essential classes
/// carry an infinite death. Sorted by birth then death.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagram {
    pub h0: Vec<(f64, f64)>,
    pub h1: Vec<(f64, f64)>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Merges the classes of `a` and `b`; false if already joined. The
    /// smaller root index survives so runs are reproducible.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (keep, drop) = (ra.min(rb), ra.max(rb));
        self.parent[drop] = keep;
        true
    }
}

/// Persistence diagram of the Vietoris-Rips filtration of a finite metric
/// space, dimensions 0 and 1, zero-persistence pairs dropped.
pub fn vr_persistence(dm: &DistanceMatrix) -> Result<Diagram, EvalError> {
    let n = dm.len();
    if n > PERSISTENCE_CAP {
        return Err(EvalError::CapExceeded { count: n, cap: PERSISTENCE_CAP });
    }
    let mut diagram = Diagram::default();
    if n == 0 {
        return Ok(diagram);
    }

    let mut edges: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((dm.get(i, j), i, j));
        }
    }
    edges.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));

    // One pass gives both the merge deaths and the cycle-creating edges.
    let mut uf = UnionFind::new(n);
    let mut positive: Vec<(usize, f64)> = Vec::new();
    for (pos, &(d, i, j)) in edges.iter().enumerate() {
        if uf.union(i, j) {
            if d > 0.0 {
                diagram.h0.push((0.0, d));
            }
        } else {
            positive.push((pos, d));
        }
    }
    let roots: std::collections::BTreeSet<usize> = (0..n).map(|i| uf.find(i)).collect();
    for _ in roots {
        diagram.h0.push((0.0, f64::INFINITY));
    }

    // Triangle columns over edge filtration positions, reduced left to
    // right; a surviving pivot pairs the triangle with the edge whose cycle
    // it fills.
    let mut edge_pos = vec![0usize; n * n];
    for (pos, &(_, i, j)) in edges.iter().enumerate() {
        edge_pos[i * n + j] = pos;
    }
    let mut triangles: Vec<(f64, [usize; 3])> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let scale = dm.get(i, j).max(dm.get(i, k)).max(dm.get(j, k));
                triangles.push((scale, [i, j, k]));
            }
        }
    }
    triangles.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite scales"));

    let mut owner: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (scale, [i, j, k]) in triangles {
        let mut col = vec![edge_pos[i * n + j], edge_pos[i * n + k], edge_pos[j * n + k]];
        col.sort_unstable();
        loop {
            let Some(&pivot) = col.last() else { break };
            match owner.get(&pivot) {
                Some(other) => col = xor_sorted(&col, other),
                None => {
                    let birth = edges[pivot].0;
                    if scale > birth {
                        diagram.h1.push((birth, scale));
                    }
                    owner.insert(pivot, col);
                    break;
                }
            }
        }
    }
    for (pos, d) in positive {
        if !owner.contains_key(&pos) {
            diagram.h1.push((d, f64::INFINITY));
        }
    }

    sort_bars(&mut diagram);
    Ok(diagram)
}

fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut x, mut y) = (0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => {
                out.push(a[x]);
                x += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[y]);
                y += 1;
            }
            std::cmp::Ordering::Equal => {
                x += 1;
                y += 1;
            }
        }
    }
    out.extend_from_slice(&a[x..]);
    out.extend_from_slice(&b[y..]);
    out
}

fn sort_bars(diagram: &mut Diagram) {
    let key = |p: &(f64, f64)| *p;
    diagram.h0.sort_by(|a, b| key(a).partial_cmp(&key(b)).expect("no NaN bars"));
    diagram.h1.sort_by(|a, b| key(a).partial_cmp(&key(b)).expect("no NaN bars"));
}

type Bits = Vec<u64>;

fn set_bit(v: &mut Bits, i: usize) {
    v[i / 64] |= 1u64 << (i % 64);
}

fn xor_in(a: &mut Bits, b: &Bits) {
    for (x, y) in a.iter_mut().zip(b) {
        *x ^= y;
    }
}

fn leading_bit(v: &Bits) -> Option<usize> {
    for (w, &word) in v.iter().enumerate().rev() {
        if word != 0 {
            return Some(w * 64 + 63 - word.leading_zeros() as usize);
        }
    }
    None
}

/// GF(2) rank of a set of bit vectors.
fn gf2_rank(vectors: &[Bits]) -> usize {
    let mut pivots: BTreeMap<usize, Bits> = BTreeMap::new();
    for v in vectors {
        let mut v = v.clone();
        while let Some(l) = leading_bit(&v) {
            match pivots.get(&l) {
                Some(p) => xor_in(&mut v, p),
                None => {
                    pivots.insert(l, v);
                    break;
                }
            }
        }
    }
    pivots.len()
}

/// Reference diagram by rank counting.
///
/// For every pair of critical scales the rank of the induced map on
/// one-dimensional homology is computed directly from a fundamental cycle
/// basis and the triangle boundary columns; bar multiplicities then follow
/// by inclusion-exclusion. Costs grow fast, hence the small cap.
pub fn persistence_by_rank(dm: &DistanceMatrix) -> Result<Diagram, EvalError> {
    let n = dm.len();
    if n > RANK_ORACLE_CAP {
        return Err(EvalError::CapExceeded { count: n, cap: RANK_ORACLE_CAP });
    }
    let mut diagram = Diagram::default();
    if n == 0 {
        return Ok(diagram);
    }

    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    let mut edge_id = vec![0usize; n * n];
    let mut next = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push((dm.get(i, j), i, j));
            edge_id[i * n + j] = next;
            next += 1;
        }
    }
    let words = next.div_ceil(64).max(1);
    edges.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));

    let mut scales: Vec<f64> = vec![0.0];
    scales.extend(edges.iter().map(|e| e.0));
    scales.sort_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    scales.dedup();
    let s = scales.len();

    // Components at every critical scale.
    let mut comp = vec![n; s];
    {
        let mut uf = UnionFind::new(n);
        let mut count = n;
        let mut e = 0usize;
        for (q, &t) in scales.iter().enumerate() {
            while e < edges.len() && edges[e].0 <= t {
                if uf.union(edges[e].1, edges[e].2) {
                    count -= 1;
                }
                e += 1;
            }
            comp[q] = count;
        }
    }
    for q in 1..s {
        for _ in 0..(comp[q - 1] - comp[q]) {
            diagram.h0.push((0.0, scales[q]));
        }
    }
    for _ in 0..comp[s - 1] {
        diagram.h0.push((0.0, f64::INFINITY));
    }

    // Fundamental cycle basis at each scale, from a forest grown in
    // filtration order.
    let mut bases: Vec<Vec<Bits>> = Vec::with_capacity(s);
    for &t in &scales {
        let mut uf = UnionFind::new(n);
        let mut tree: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut basis: Vec<Bits> = Vec::new();
        for &(_, u, v) in edges.iter().take_while(|e| e.0 <= t) {
            if uf.union(u, v) {
                tree[u].push(v);
                tree[v].push(u);
            } else {
                let mut bits = vec![0u64; words];
                set_bit(&mut bits, edge_id[u * n + v]);
                for (a, b) in forest_path(&tree, u, v) {
                    set_bit(&mut bits, edge_id[a.min(b) * n + a.max(b)]);
                }
                basis.push(bits);
            }
        }
        bases.push(basis);
    }

    // Cumulative triangle boundary columns and their ranks at each scale.
    let mut tri: Vec<(f64, Bits)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for k in (j + 1)..n {
                let scale = dm.get(i, j).max(dm.get(i, k)).max(dm.get(j, k));
                let mut bits = vec![0u64; words];
                set_bit(&mut bits, edge_id[i * n + j]);
                set_bit(&mut bits, edge_id[i * n + k]);
                set_bit(&mut bits, edge_id[j * n + k]);
                tri.push((scale, bits));
            }
        }
    }
    let tri_at = |t: f64| -> Vec<Bits> {
        tri.iter().filter(|x| x.0 <= t).map(|x| x.1.clone()).collect()
    };
    let boundary_rank: Vec<usize> = scales.iter().map(|&t| gf2_rank(&tri_at(t))).collect();

    // beta[p][q]: rank of the map on one-cycles from scale p to scale q.
    let beta = |p: isize, q: usize, bases: &[Vec<Bits>]| -> usize {
        if p < 0 {
            return 0;
        }
        let mut joined = bases[p as usize].clone();
        joined.extend(tri_at(scales[q]));
        gf2_rank(&joined) - boundary_rank[q]
    };

    for i in 0..s {
        for j in (i + 1)..s {
            let m = beta(i as isize, j - 1, &bases) + beta(i as isize - 1, j, &bases)
                - beta(i as isize - 1, j - 1, &bases)
                - beta(i as isize, j, &bases);
            for _ in 0..m {
                diagram.h1.push((scales[i], scales[j]));
            }
        }
        let ess = beta(i as isize, s - 1, &bases) - beta(i as isize - 1, s - 1, &bases);
        for _ in 0..ess {
            diagram.h1.push((scales[i], f64::INFINITY));
        }
    }

    sort_bars(&mut diagram);
    Ok(diagram)
}

/// Edges along the unique forest path between `u` and `v`.
fn forest_path(tree: &[Vec<usize>], u: usize, v: usize) -> Vec<(usize, usize)> {
    let n = tree.len();
    let mut parent = vec![usize::MAX; n];
    parent[u] = u;
    let mut queue = std::collections::VecDeque::from([u]);
    while let Some(x) = queue.pop_front() {
        if x == v {
            break;
        }
        for &y in &tree[x] {
            if parent[y] == usize::MAX {
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }
    let mut path = Vec::new();
    let mut cur = v;
    while parent[cur] != cur {
        path.push((parent[cur], cur));
        cur = parent[cur];
    }
    path
}
