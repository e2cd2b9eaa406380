//! Cross-module laws of the measure machinery on randomized instances.

use fuzzydr_core::filtration::{
    filtration_measure, fuzzy_from_filtration, DistanceMatrix,
};
use fuzzydr_core::measures::{
    boolean_merge, cdm_invert, cdm_marginal, fuzzy_cross_entropy, kl_divergence,
    level_set_preimage, locally_markov_kl, marginal, rank_order_joint, verify_ce_equals_kl,
    BoolMerge, ComplexMeasure, EdgeIndependentMeasure, MeasureError, RankOrderChain,
    SimplexMeasure,
};
use fuzzydr_core::scale::ScaleDistribution;
use fuzzydr_core::simplicial::{
    all_simplices, simplex, CrispComplex, FuzzyComplex, MergeOp,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_monotone_fuzzy(rng: &mut ChaCha8Rng, n: u32, maxdim: usize) -> FuzzyComplex {
    let mut f = FuzzyComplex::new(n, maxdim);
    let sims = all_simplices(n, maxdim);
    for s in &sims {
        if rng.gen_bool(0.7) {
            f.set_weight(s.clone(), rng.gen::<f64>()).unwrap();
        }
    }
    // Sweep from the top dimension down, lifting each face to at least the
    // weight of its cofaces.
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
    assert!(f.check_monotone().is_ok());
    f
}

#[test]
fn level_set_preimage_inverts_marginal_on_random_complexes() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for trial in 0..200 {
        let n = rng.gen_range(1..=5u32);
        let maxdim = rng.gen_range(0..=2usize);
        let f = random_monotone_fuzzy(&mut rng, n, maxdim);
        let m = level_set_preimage(&f).unwrap();
        let back = marginal(&m);
        for s in all_simplices(n, maxdim) {
            let (a, b) = (f.weight(&s), back.weight(&s));
            assert!((a - b).abs() < 1e-12, "trial {trial}, {s}: {a} vs {b}");
        }
        let total: f64 = m.support().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12, "trial {trial}: total {total}");
    }
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

#[test]
fn containment_marginal_inverts_exactly_on_dyadic_measures() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for trial in 0..100 {
        let n = rng.gen_range(1..=4u32);
        let maxdim = rng.gen_range(0..=2usize);
        let q = random_dyadic_simplex_measure(&mut rng, n, maxdim);
        let f = cdm_marginal(&q);
        let back = cdm_invert(&f).unwrap();
        // All masses are multiples of 1/256, so inversion is exact.
        for s in all_simplices(n, maxdim) {
            assert_eq!(back.prob(&s), q.prob(&s), "trial {trial}, {s}");
        }
    }
}

#[test]
fn boolean_merges_obey_the_marginal_laws_on_a_grid() {
    let grid = [0.1, 0.5, 0.9];
    let edges = [simplex(&[0, 1]), simplex(&[0, 2]), simplex(&[1, 2])];
    let mut combos = Vec::new();
    for &a in &grid {
        for &b in &grid {
            for &c in &grid {
                combos.push([a, b, c]);
            }
        }
    }
    for p in &combos {
        for q in &combos {
            let e1 = EdgeIndependentMeasure::new(
                3,
                edges.iter().cloned().zip(p.iter().copied()),
            )
            .unwrap();
            let e2 = EdgeIndependentMeasure::new(
                3,
                edges.iter().cloned().zip(q.iter().copied()),
            )
            .unwrap();
            let (m1, m2) = (e1.expand().unwrap(), e2.expand().unwrap());
            let union = marginal(&boolean_merge(&m1, &m2, BoolMerge::Or).unwrap());
            let inter = marginal(&boolean_merge(&m1, &m2, BoolMerge::And).unwrap());
            for (s, (&mu1, &mu2)) in edges.iter().zip(p.iter().zip(q.iter())) {
                let or_expect = mu1 + mu2 - mu1 * mu2;
                let and_expect = mu1 * mu2;
                assert!(
                    (union.weight(s) - or_expect).abs() < 1e-12,
                    "{s}: {} vs {or_expect}",
                    union.weight(s)
                );
                assert!(
                    (inter.weight(s) - and_expect).abs() < 1e-12,
                    "{s}: {} vs {and_expect}",
                    inter.weight(s)
                );
            }
        }
    }
}

#[test]
fn boolean_merges_obey_the_marginal_laws_on_random_measures() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for _ in 0..40 {
        let n = rng.gen_range(2..=4u32);
        let maxdim = rng.gen_range(0..=2usize);
        let f1 = random_monotone_fuzzy(&mut rng, n, maxdim);
        let f2 = random_monotone_fuzzy(&mut rng, n, maxdim);
        let m1 = level_set_preimage(&f1).unwrap();
        let m2 = level_set_preimage(&f2).unwrap();
        let union = marginal(&boolean_merge(&m1, &m2, BoolMerge::Or).unwrap());
        let inter = marginal(&boolean_merge(&m1, &m2, BoolMerge::And).unwrap());
        for s in all_simplices(n, maxdim) {
            let (mu1, mu2) = (f1.weight(&s), f2.weight(&s));
            assert!((union.weight(&s) - (mu1 + mu2 - mu1 * mu2)).abs() < 1e-12);
            assert!((inter.weight(&s) - mu1 * mu2).abs() < 1e-12);
        }
    }
}

#[test]
fn merging_metrics_before_the_filtration_differs_from_merging_after() {
    // Same three points under two metrics; one path takes the pointwise
    // maximum of the metrics and then the fuzzy image, the other multiplies
    // the two fuzzy images simplex by simplex.
    let d1 = DistanceMatrix::from_condensed(3, &[1.0, 1.0, 1.0]).unwrap();
    let d2 = DistanceMatrix::from_condensed(3, &[2.0, 1.0, 1.0]).unwrap();
    let nu = ScaleDistribution::Exponential { nu: 1.0 };
    let premerged =
        fuzzy_from_filtration(&d1.pointwise_max(&d2).unwrap(), 1, &nu).unwrap();
    let f1 = fuzzy_from_filtration(&d1, 1, &nu).unwrap();
    let f2 = fuzzy_from_filtration(&d2, 1, &nu).unwrap();
    let postmerged = f1.merge(&f2, MergeOp::Product).unwrap();
    let e = simplex(&[0, 1]);
    assert!((premerged.weight(&e) - (-2.0f64).exp()).abs() < 1e-12);
    assert!((postmerged.weight(&e) - (-3.0f64).exp()).abs() < 1e-12);
    let gap = (premerged.weight(&e) - postmerged.weight(&e)).abs();
    assert!(gap > 1e-3, "paths coincide unexpectedly: gap {gap}");
}

#[test]
fn cross_entropy_equals_kl_for_independent_edge_measures() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for trial in 0..100 {
        let n = rng.gen_range(2..=4u32);
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                pairs.push(simplex(&[i, j]));
            }
        }
        let interior = |rng: &mut ChaCha8Rng| 0.05 + 0.9 * rng.gen::<f64>();
        let e1 = EdgeIndependentMeasure::new(
            n,
            pairs.iter().cloned().map(|s| (s, interior(&mut rng))),
        )
        .unwrap();
        let e2 = EdgeIndependentMeasure::new(
            n,
            pairs.iter().cloned().map(|s| (s, interior(&mut rng))),
        )
        .unwrap();
        let report = verify_ce_equals_kl(&e1, &e2).unwrap();
        assert!(
            report.gap < 1e-9,
            "trial {trial}: ce {} vs kl {}",
            report.cross_entropy,
            report.kl
        );
    }
}

#[test]
fn cross_entropy_and_kl_split_for_correlated_measures() {
    // Half the mass on the filled triangle, half on bare vertices, against
    // three independent fair edges whose triangle fills exactly when all
    // three are present. Edge marginals agree (1/2 everywhere), so only the
    // triangle marginal sees the correlation and the marginal divergence
    // falls well short of the exact one.
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
    let q = ComplexMeasure::new(support).unwrap();
    let kl = kl_divergence(&p, &q);
    assert!((kl - 4.0f64.ln()).abs() < 1e-12, "kl {kl}");
    let ce = fuzzy_cross_entropy(&marginal(&p), &marginal(&q), &[]).unwrap();
    // Only the triangle term is nonzero: its marginals are 1/2 and 1/8.
    let expect = 0.5 * 4.0f64.ln() + 0.5 * (4.0f64 / 7.0).ln();
    assert!((ce - expect).abs() < 1e-12, "ce {ce} vs {expect}");
    assert!((ce - kl).abs() > 1e-3);
}

#[test]
fn filtration_measures_are_not_locally_markov() {
    // A single random scale drives every simplex at once, so disjoint edges
    // are perfectly correlated even though neither is a face of the other.
    let dm = DistanceMatrix::from_condensed(4, &[1.0, 2.0, 3.0, 1.0, 2.0, 1.0]).unwrap();
    let nu = ScaleDistribution::Exponential { nu: 1.0 };
    let m = filtration_measure(&dm, 1, &nu).unwrap();
    match locally_markov_kl(&m, &m) {
        Err(MeasureError::NotLocallyMarkov(witness)) => {
            assert!(!witness.is_empty());
        }
        other => panic!("expected a local Markov failure, got {other:?}"),
    }
}

#[test]
fn rank_order_chain_is_a_probability_over_prefix_patterns() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let families = [
        ScaleDistribution::Exponential { nu: 0.8 },
        ScaleDistribution::Weibull { lambda: 1.2, k: 1.7 },
        ScaleDistribution::LogLogistic { a: 1.0, b: 2.0 },
    ];
    for dist in &families {
        let mut distances: Vec<f64> = (0..5).map(|_| 0.1 + 2.0 * rng.gen::<f64>()).collect();
        distances.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let chain = RankOrderChain::new(distances.clone(), dist).unwrap();
        let n = chain.len();
        let mut total = 0.0;
        for mask in 0..(1u32 << n) {
            let assignment: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            total += rank_order_joint(&chain, &assignment).unwrap();
        }
        assert!((total - 1.0).abs() < 1e-12, "{dist}: total {total}");

        // Monotone prefixes carry the interval masses between consecutive
        // distances.
        for t in 0..=n {
            let assignment: Vec<bool> = (0..n).map(|i| i < t).collect();
            let joint = rank_order_joint(&chain, &assignment).unwrap();
            let expect = if t == 0 {
                1.0 - dist.survival(distances[0]).unwrap()
            } else if t == n {
                dist.survival(distances[n - 1]).unwrap()
            } else {
                dist.survival(distances[t - 1]).unwrap()
                    - dist.survival(distances[t]).unwrap()
            };
            assert!((joint - expect).abs() < 1e-12, "{dist}, prefix {t}: {joint} vs {expect}");
        }
    }
}

#[test]
fn filtration_marginal_identity_on_random_point_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let families = [
        ScaleDistribution::Exponential { nu: 1.3 },
        ScaleDistribution::Weibull { lambda: 0.9, k: 2.0 },
        ScaleDistribution::LogLogistic { a: 1.5, b: 3.0 },
    ];
    for trial in 0..20 {
        let n = rng.gen_range(2..=5usize);
        let mut condensed = Vec::new();
        let pts: Vec<(f64, f64)> =
            (0..n).map(|_| (rng.gen::<f64>() * 2.0, rng.gen::<f64>() * 2.0)).collect();
        for i in 0..n {
            for j in (i + 1)..n {
                let (dx, dy) = (pts[i].0 - pts[j].0, pts[i].1 - pts[j].1);
                condensed.push((dx * dx + dy * dy).sqrt());
            }
        }
        let dm = DistanceMatrix::from_condensed(n, &condensed).unwrap();
        let dist = &families[trial % families.len()];
        let maxdim = 1 + trial % 2;
        let direct = fuzzy_from_filtration(&dm, maxdim, dist).unwrap();
        let via_measure = marginal(&filtration_measure(&dm, maxdim, dist).unwrap());
        for s in all_simplices(n as u32, maxdim) {
            let (a, b) = (direct.weight(&s), via_measure.weight(&s));
            assert!((a - b).abs() < 1e-12, "trial {trial}, {s}: {a} vs {b}");
        }
    }
}
