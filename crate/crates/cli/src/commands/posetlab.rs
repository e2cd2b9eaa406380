//! The poset-lab subcommand: exact verification of the measure laws on
//! generated instances, one PASS/FAIL line per law.

use fuzzydr_core::filtration::{fuzzy_from_filtration, vr_scale, DistanceMatrix};
use fuzzydr_core::measures::{
    boolean_merge, cdm_invert, cdm_marginal, fuzzy_cross_entropy, kl_divergence,
    level_set_preimage, marginal, rank_order_joint, verify_ce_equals_kl, BoolMerge,
    ComplexMeasure, EdgeIndependentMeasure, MeasureError, RankOrderChain, SimplexMeasure,
};
use fuzzydr_core::poset::{moebius_invert, zeta_transform, FinitePoset};
use fuzzydr_core::scale::ScaleDistribution;
use fuzzydr_core::simplicial::{all_simplices, simplex, CrispComplex, FuzzyComplex, MergeOp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::PosetLabArgs;
use crate::jsonio::{measure_from_json, read_json};
use crate::CliError;

type LawFn = fn(&mut ChaCha8Rng) -> Result<String, String>;

/// Names and implementations, in reporting order.
pub const LAW_NAMES: [&str; 9] = [
    "marginal-roundtrip",
    "moebius-roundtrip",
    "cdm-roundtrip",
    "cdm-nonsurjective",
    "merge-laws",
    "ce-kl",
    "order-of-operations",
    "rank-order",
    "figure4",
];

fn law_table() -> [(&'static str, LawFn); 9] {
    [
        ("marginal-roundtrip", law_marginal_roundtrip),
        ("moebius-roundtrip", law_moebius_roundtrip),
        ("cdm-roundtrip", law_cdm_roundtrip),
        ("cdm-nonsurjective", law_cdm_nonsurjective),
        ("merge-laws", law_merge_laws),
        ("ce-kl", law_ce_kl),
        ("order-of-operations", law_order_of_operations),
        ("rank-order", law_rank_order),
        ("figure4", law_figure4),
    ]
}

pub fn run(args: &PosetLabArgs) -> Result<(), CliError> {
    if let Some(path) = &args.measure {
        let measure = measure_from_json(&read_json(path)?)?;
        println!(
            "measure: {} complexes over {} vertices, maxdim {}",
            measure.support_len(),
            measure.vertex_count(),
            measure.maxdim()
        );
        for (s, w) in marginal(&measure).support() {
            println!("  mu({:?}) = {w}", s.vertices());
        }
    }

    let seed = args.seed.unwrap_or(0);
    let table = law_table();
    if let Some(wanted) = &args.law {
        if !LAW_NAMES.contains(&wanted.as_str()) {
            return Err(CliError::Usage(format!(
                "unknown law `{wanted}`; expected one of {}",
                LAW_NAMES.join(", ")
            )));
        }
    }

    let mut failed = Vec::new();
    for (index, (name, law)) in table.iter().enumerate() {
        if args.law.as_deref().is_some_and(|wanted| wanted != *name) {
            continue;
        }
        // Decorrelate the laws so a shared seed still gives each its own
        // stream.
        let mut rng = ChaCha8Rng::seed_from_u64(law_seed(seed, index));
        match law(&mut rng) {
            Ok(detail) => println!("{name}: PASS {detail}"),
            Err(detail) => {
                println!("{name}: FAIL {detail}");
                failed.push((*name).to_string());
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::LawFailure(failed))
    }
}

fn law_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn random_monotone_fuzzy(rng: &mut ChaCha8Rng, n: u32, maxdim: usize) -> FuzzyComplex {
    let mut f = FuzzyComplex::new(n, maxdim);
    let sims = all_simplices(n, maxdim);
    for s in &sims {
        if rng.gen_bool(0.7) {
            f.set_weight(s.clone(), rng.gen::<f64>()).unwrap();
        }
    }
    // Sweep top dimension down, lifting faces to their cofaces' weights.
    for dim in (1..=maxdim).rev() {
        for s in sims.iter().filter(|s| s.dim() == dim) {
            let w = f.weight(s);
            if w > 0.0 {
                for face in s.faces().unwrap() {
                    if f.weight(&face) < w {
                        f.set_weight(face, w).unwrap();
                    }
                }
            }
        }
    }
    f
}

fn law_marginal_roundtrip(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let n = rng.gen_range(1..=5u32);
        let f = random_monotone_fuzzy(rng, n, 2);
        let m = level_set_preimage(&f).map_err(|e| format!("trial {trial}: {e}"))?;
        let total: f64 = m.support().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(format!("trial {trial}: total mass {total}"));
        }
        let back = marginal(&m);
        for s in all_simplices(n, 2) {
            worst = worst.max((back.weight(&s) - f.weight(&s)).abs());
        }
    }
    if worst > 1e-12 {
        return Err(format!("max roundtrip deviation {worst:e}"));
    }
    Ok(format!("50 instances, max roundtrip deviation {worst:e}"))
}

fn random_poset(rng: &mut ChaCha8Rng, n: usize) -> FinitePoset {
    // Order only from lower to higher index, then transitive closure, so the
    // relation is antisymmetric by construction.
    let mut leq = vec![false; n * n];
    for i in 0..n {
        leq[i * n + i] = true;
        for j in (i + 1)..n {
            if rng.gen_bool(0.4) {
                leq[i * n + j] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if leq[i * n + k] && leq[k * n + j] {
                    leq[i * n + j] = true;
                }
            }
        }
    }
    FinitePoset::new(n, leq).unwrap()
}

fn law_moebius_roundtrip(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for trial in 0..40 {
        let n = rng.gen_range(1..=8usize);
        let poset = random_poset(rng, n);
        let q: Vec<f64> = (0..n).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
        let g = zeta_transform(&poset, &q).map_err(|e| format!("trial {trial}: {e}"))?;
        let back = moebius_invert(&poset, &g).map_err(|e| format!("trial {trial}: {e}"))?;
        for (a, b) in q.iter().zip(&back) {
            worst = worst.max((a - b).abs());
        }
        let forward =
            zeta_transform(&poset, &moebius_invert(&poset, &q).unwrap()).unwrap();
        for (a, b) in q.iter().zip(&forward) {
            worst = worst.max((a - b).abs());
        }
    }
    if worst > 1e-12 {
        return Err(format!("max inversion deviation {worst:e}"));
    }
    Ok(format!("40 posets, max inversion deviation {worst:e}"))
}

fn random_dyadic_simplex_measure(rng: &mut ChaCha8Rng, n: u32, maxdim: usize) -> SimplexMeasure {
    let sims = all_simplices(n, maxdim);
    let mut counts = vec![0u32; sims.len()];
    for _ in 0..256 {
        counts[rng.gen_range(0..sims.len())] += 1;
    }
    let support: Vec<_> = sims
        .into_iter()
        .zip(counts)
        .filter(|(_, c)| *c > 0)
        .map(|(s, c)| (s, c as f64 / 256.0))
        .collect();
    SimplexMeasure::new(n, maxdim, support).unwrap()
}

fn law_cdm_roundtrip(rng: &mut ChaCha8Rng) -> Result<String, String> {
    for trial in 0..50 {
        let n = rng.gen_range(1..=4u32);
        let maxdim = rng.gen_range(0..=2usize);
        let q = random_dyadic_simplex_measure(rng, n, maxdim);
        let back =
            cdm_invert(&cdm_marginal(&q)).map_err(|e| format!("trial {trial}: {e}"))?;
        if back != q {
            return Err(format!("trial {trial}: inversion is not exact"));
        }
    }
    Ok("50 dyadic instances, exact inversion".into())
}

fn law_cdm_nonsurjective(_rng: &mut ChaCha8Rng) -> Result<String, String> {
    // Two crisp edges with no coface present: the classic non-image point.
    let f = FuzzyComplex::from_weights(
        4,
        2,
        [
            (simplex(&[0]), 1.0),
            (simplex(&[1]), 1.0),
            (simplex(&[2]), 1.0),
            (simplex(&[3]), 1.0),
            (simplex(&[0, 1]), 1.0),
            (simplex(&[2, 3]), 1.0),
        ],
    )
    .unwrap();
    match cdm_invert(&f) {
        Err(MeasureError::NoPreimage { reason }) => Ok(format!("NoPreimage: {reason}")),
        Err(other) => Err(format!("unexpected error: {other}")),
        Ok(_) => Err("the disjoint-edges complex unexpectedly has a preimage".into()),
    }
}

fn product_measure(probs: [f64; 3]) -> ComplexMeasure {
    let edges = [simplex(&[0, 1]), simplex(&[0, 2]), simplex(&[1, 2])];
    EdgeIndependentMeasure::new(3, edges.into_iter().zip(probs))
        .unwrap()
        .expand()
        .unwrap()
}

fn law_merge_laws(_rng: &mut ChaCha8Rng) -> Result<String, String> {
    let grid = [0.1, 0.5, 0.9];
    let edges = [simplex(&[0, 1]), simplex(&[0, 2]), simplex(&[1, 2])];
    let mut worst: f64 = 0.0;
    let mut combos = Vec::new();
    for &a in &grid {
        for &b in &grid {
            for &c in &grid {
                combos.push([a, b, c]);
            }
        }
    }
    for p1 in &combos {
        let m1 = product_measure(*p1);
        for p2 in &combos {
            let m2 = product_measure(*p2);
            let or = marginal(&boolean_merge(&m1, &m2, BoolMerge::Or).map_err(|e| e.to_string())?);
            let and =
                marginal(&boolean_merge(&m1, &m2, BoolMerge::And).map_err(|e| e.to_string())?);
            for (edge, (&q1, &q2)) in edges.iter().zip(p1.iter().zip(p2.iter())) {
                worst = worst.max((or.weight(edge) - (q1 + q2 - q1 * q2)).abs());
                worst = worst.max((and.weight(edge) - q1 * q2).abs());
            }
        }
    }
    if worst > 1e-12 {
        return Err(format!("max law deviation {worst:e}"));
    }
    Ok(format!("{} pairs, max law deviation {worst:e}", combos.len() * combos.len()))
}

/// Half the mass on the filled triangle and half on bare vertices, paired
/// with three independent fair edges whose triangle fills exactly when all
/// three are present. Edge marginals agree; only the joint laws differ.
fn correlated_pair() -> (ComplexMeasure, ComplexMeasure) {
    let tri = simplex(&[0, 1, 2]);
    let full = CrispComplex::closure(3, 2, [tri.clone()]).unwrap();
    let bare =
        CrispComplex::closure(3, 2, [simplex(&[0]), simplex(&[1]), simplex(&[2])]).unwrap();
    let p = ComplexMeasure::new(vec![(full, 0.5), (bare, 0.5)]).unwrap();
    let edges = [simplex(&[0, 1]), simplex(&[0, 2]), simplex(&[1, 2])];
    let mut support = Vec::new();
    for mask in 0..8u32 {
        let mut gens = vec![simplex(&[0]), simplex(&[1]), simplex(&[2])];
        for (b, e) in edges.iter().enumerate() {
            if mask >> b & 1 == 1 {
                gens.push(e.clone());
            }
        }
        if mask == 7 {
            gens.push(tri.clone());
        }
        support.push((CrispComplex::closure(3, 2, gens).unwrap(), 0.125));
    }
    (p, ComplexMeasure::new(support).unwrap())
}

fn law_ce_kl(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let n = rng.gen_range(2..=4u32);
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push(simplex(&[i, j]));
            }
        }
        let mut interior = || 0.05 + 0.9 * rng.gen::<f64>();
        let probs1: Vec<f64> = (0..pairs.len()).map(|_| interior()).collect();
        let probs2: Vec<f64> = (0..pairs.len()).map(|_| interior()).collect();
        let e1 = EdgeIndependentMeasure::new(n, pairs.iter().cloned().zip(probs1))
            .map_err(|e| e.to_string())?;
        let e2 = EdgeIndependentMeasure::new(n, pairs.iter().cloned().zip(probs2))
            .map_err(|e| e.to_string())?;
        let report = verify_ce_equals_kl(&e1, &e2).map_err(|e| format!("trial {trial}: {e}"))?;
        worst = worst.max(report.gap);
    }
    if worst > 1e-9 {
        return Err(format!("independent instances split by {worst:e}"));
    }

    let (p, q) = correlated_pair();
    let kl = kl_divergence(&p, &q);
    let ce = fuzzy_cross_entropy(&marginal(&p), &marginal(&q), &[]).map_err(|e| e.to_string())?;
    let gap = (kl - ce).abs();
    if gap <= 1e-3 {
        return Err(format!("correlated pair failed to split: kl {kl}, ce {ce}"));
    }
    Ok(format!(
        "50 independent instances agree within {worst:e}; correlated pair splits by {gap:.3}"
    ))
}

fn law_order_of_operations(_rng: &mut ChaCha8Rng) -> Result<String, String> {
    // Same three points under two metrics; merging the metrics first differs
    // from multiplying the fuzzy images.
    let d1 = DistanceMatrix::from_condensed(3, &[1.0, 1.0, 1.0]).unwrap();
    let d2 = DistanceMatrix::from_condensed(3, &[2.0, 1.0, 1.0]).unwrap();
    let nu = ScaleDistribution::Exponential { nu: 1.0 };
    let merged_metric = d1.pointwise_max(&d2).map_err(|e| e.to_string())?;
    let premerged = fuzzy_from_filtration(&merged_metric, 1, &nu).map_err(|e| e.to_string())?;

    // The pre-merge path must equal the survival weight of the merged metric
    // simplex by simplex.
    for s in all_simplices(3, 1) {
        let scale = vr_scale(&merged_metric, &s).map_err(|e| e.to_string())?;
        let expect = nu.survival(scale).map_err(|e| e.to_string())?;
        if (premerged.weight(&s) - expect).abs() > 1e-12 {
            return Err(format!(
                "pre-merge weight of {:?} is {}, expected {expect}",
                s.vertices(),
                premerged.weight(&s)
            ));
        }
    }

    let f1 = fuzzy_from_filtration(&d1, 1, &nu).map_err(|e| e.to_string())?;
    let f2 = fuzzy_from_filtration(&d2, 1, &nu).map_err(|e| e.to_string())?;
    let postmerged = f1.merge(&f2, MergeOp::Product).map_err(|e| e.to_string())?;
    let e = simplex(&[0, 1]);
    let gap = (premerged.weight(&e) - postmerged.weight(&e)).abs();
    if gap <= 1e-3 {
        return Err(format!("paths coincide: gap {gap:e}"));
    }
    Ok(format!(
        "pre-merge {} vs post-merge {} on one edge, gap {gap:.3}",
        premerged.weight(&e),
        postmerged.weight(&e)
    ))
}

fn law_rank_order(rng: &mut ChaCha8Rng) -> Result<String, String> {
    let families = [
        ScaleDistribution::Exponential { nu: 0.8 },
        ScaleDistribution::Weibull { lambda: 1.2, k: 1.7 },
        ScaleDistribution::LogLogistic { a: 1.0, b: 2.0 },
    ];
    let mut worst: f64 = 0.0;
    for dist in &families {
        let mut distances: Vec<f64> = (0..5).map(|_| 0.1 + 2.0 * rng.gen::<f64>()).collect();
        distances.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let chain = RankOrderChain::new(distances.clone(), dist).map_err(|e| e.to_string())?;
        let n = chain.len();
        let mut total = 0.0;
        for mask in 0..(1u32 << n) {
            let assignment: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            total += rank_order_joint(&chain, &assignment).map_err(|e| e.to_string())?;
        }
        worst = worst.max((total - 1.0).abs());

        // Monotone prefixes carry the interval masses between consecutive
        // distances.
        for t in 0..=n {
            let assignment: Vec<bool> = (0..n).map(|i| i < t).collect();
            let joint = rank_order_joint(&chain, &assignment).map_err(|e| e.to_string())?;
            let survival = |d: f64| dist.survival(d).map_err(|e| e.to_string());
            let expect = if t == 0 {
                1.0 - survival(distances[0])?
            } else if t == n {
                survival(distances[n - 1])?
            } else {
                survival(distances[t - 1])? - survival(distances[t])?
            };
            worst = worst.max((joint - expect).abs());
        }
    }
    if worst > 1e-12 {
        return Err(format!("max factorization deviation {worst:e}"));
    }
    Ok(format!("3 families, max factorization deviation {worst:e}"))
}

/// The four-complex illustration measure on six vertices with probabilities
/// 2/8, 3/8, 2/8, 1/8.
pub fn four_complex_measure() -> ComplexMeasure {
    let c1 = CrispComplex::closure(
        6,
        2,
        [
            simplex(&[0, 1, 2]),
            simplex(&[0, 3]),
            simplex(&[1, 3]),
            simplex(&[3, 4]),
            simplex(&[3, 5]),
        ],
    )
    .unwrap();
    let c2 = CrispComplex::closure(6, 2, [simplex(&[0, 1, 2]), simplex(&[3, 4, 5])]).unwrap();
    let c3 = CrispComplex::closure(
        6,
        2,
        [simplex(&[0, 3, 4]), simplex(&[3, 4, 5]), simplex(&[1, 2, 3])],
    )
    .unwrap();
    let c4 = CrispComplex::closure(6, 2, [simplex(&[0, 1])]).unwrap();
    ComplexMeasure::new(vec![
        (c1, 2.0 / 8.0),
        (c2, 3.0 / 8.0),
        (c3, 2.0 / 8.0),
        (c4, 1.0 / 8.0),
    ])
    .unwrap()
}

fn law_figure4(_rng: &mut ChaCha8Rng) -> Result<String, String> {
    let f = marginal(&four_complex_measure());
    let triangle = f.weight(&simplex(&[3, 4, 5]));
    let vertex = f.weight(&simplex(&[2]));
    if (triangle - 0.625).abs() > 1e-12 {
        return Err(format!("mu([x3,x4,x5]) = {triangle}, expected 0.625"));
    }
    if (vertex - 0.875).abs() > 1e-12 {
        return Err(format!("mu([x2]) = {vertex}, expected 0.875"));
    }
    if f.check_monotone().is_ok() {
        Ok(format!("mu([x3,x4,x5]) = {triangle}, mu([x2]) = {vertex}"))
    } else {
        Err("the illustration marginal is not monotone".into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_law_passes_under_several_seeds() {
        for seed in 0..3u64 {
            for (index, (name, law)) in law_table().iter().enumerate() {
                let mut rng = ChaCha8Rng::seed_from_u64(law_seed(seed, index));
                assert!(law(&mut rng).is_ok(), "law {name} failed under seed {seed}");
            }
        }
    }

    #[test]
    fn law_names_match_the_table() {
        let table = law_table();
        for (name, entry) in LAW_NAMES.iter().zip(table.iter()) {
            assert_eq!(*name, entry.0);
        }
    }
}
