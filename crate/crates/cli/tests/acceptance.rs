//! Release gate: twelve numbered criteria, each a separate test that prints
//! one `criterion N: PASS` or `criterion N: FAIL` line and enforces a
//! wall-clock budget. Every check recomputes its expected values locally so
//! the gate does not lean on the library's own test fixtures.

use std::fs;
use std::time::{Duration, Instant};

use clap::Parser;
use fuzzydr_cli::args::Cli;
use fuzzydr_cli::commands::posetlab::four_complex_measure;
use fuzzydr_cli::dataset::{synth, SynthSpec};
use fuzzydr_cli::run;
use fuzzydr_core::embed::{
    edge_loss_and_grad, pca_init, train, triplet_loss_and_grad, EmbedMode, TrainConfig, NU_CLAMP,
};
use fuzzydr_core::eval::{
    evaluate, persistence_by_rank, trustworthiness, vr_persistence, EvalConfig,
};
use fuzzydr_core::filtration::{
    cech3_radius, filtration_measure, fuzzy_from_filtration, vr_scale, DistanceMatrix,
};
use fuzzydr_core::matrix::Matrix;
use fuzzydr_core::measures::{
    boolean_merge, cdm_invert, cdm_marginal, fuzzy_cross_entropy, kl_divergence,
    level_set_preimage, marginal, rank_order_joint, verify_ce_equals_kl, BoolMerge, ComplexMeasure,
    EdgeIndependentMeasure, MeasureError, RankOrderChain, SimplexMeasure,
};
use fuzzydr_core::poset::{moebius_invert, zeta_transform, FinitePoset};
use fuzzydr_core::scale::ScaleDistribution;
use fuzzydr_core::simplicial::{
    all_simplices, simplex, CrispComplex, FuzzyComplex, MergeOp, SimplexKey,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

/// Runs one criterion body, prints its verdict line, and enforces the budget.
fn gate(label: &str, budget: Duration, body: impl FnOnce() -> Result<String, String>) {
    let clock = Instant::now();
    let outcome = body();
    let elapsed = clock.elapsed();
    match outcome {
        Ok(detail) => {
            println!("{label}: PASS ({detail}; {elapsed:.2?})");
            assert!(elapsed <= budget, "{label} took {elapsed:.2?}, budget {budget:?}");
        }
        Err(why) => {
            println!("{label}: FAIL ({why})");
            panic!("{label}: {why}");
        }
    }
}

fn ck(ok: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

#[test]
fn criterion_01_four_complex_marginals() {
    gate("criterion 1", Duration::from_secs(1), || {
        let mu = marginal(&four_complex_measure());
        let top = mu.weight(&simplex(&[3, 4, 5]));
        let vertex = mu.weight(&simplex(&[2]));
        ck((top - 0.625).abs() <= 1e-12, || format!("mu([3,4,5]) = {top}"))?;
        ck((vertex - 0.875).abs() <= 1e-12, || format!("mu([2]) = {vertex}"))?;
        Ok(format!("mu([3,4,5]) = {top}, mu([2]) = {vertex}"))
    });
}

/// True when every vertex of `a` also occurs in `b`; both are sorted.
fn is_face(a: &SimplexKey, b: &SimplexKey) -> bool {
    let mut rest = b.vertices();
    for v in a.vertices() {
        match rest.iter().position(|w| w == v) {
            Some(p) => rest = &rest[p + 1..],
            None => return false,
        }
    }
    true
}

/// Monotone weights built by maxing independent draws over cofaces, so the
/// construction is independent of the library's face-sweep generator.
fn random_monotone(rng: &mut ChaCha8Rng, n: u32, maxdim: usize) -> FuzzyComplex {
    let sims = all_simplices(n, maxdim);
    let raw: Vec<f64> =
        sims.iter().map(|_| if rng.gen_bool(0.75) { rng.gen::<f64>() } else { 0.0 }).collect();
    let mut f = FuzzyComplex::new(n, maxdim);
    for (i, s) in sims.iter().enumerate() {
        let mut w: f64 = raw[i];
        for (j, t) in sims.iter().enumerate() {
            if is_face(s, t) {
                w = w.max(raw[j]);
            }
        }
        if w > 0.0 {
            f.set_weight(s.clone(), w).unwrap();
        }
    }
    f
}

#[test]
fn criterion_02_marginal_after_level_set_preimage_is_identity() {
    gate("criterion 2", Duration::from_secs(5), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EC2);
        let mut worst: f64 = 0.0;
        for trial in 0..200 {
            let n = rng.gen_range(1..=5u32);
            let f = random_monotone(&mut rng, n, 2);
            let m = level_set_preimage(&f).map_err(|e| format!("trial {trial}: {e}"))?;
            let total: f64 = m.support().map(|(_, p)| p).sum();
            ck((total - 1.0).abs() <= 1e-12, || format!("trial {trial}: total mass {total}"))?;
            let back = marginal(&m);
            for s in all_simplices(n, 2) {
                let dev = (back.weight(&s) - f.weight(&s)).abs();
                ck(dev <= 1e-12, || {
                    format!("trial {trial}: weight of {s:?} off by {dev:e}")
                })?;
                worst = worst.max(dev);
            }
        }
        Ok(format!("200 instances, max deviation {worst:e}"))
    })
}

fn random_poset(rng: &mut ChaCha8Rng, n: usize) -> FinitePoset {
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

/// Masses are multiples of 1/256, so sums and alternating sums stay exact
/// in binary floating point and the roundtrips below can demand equality.
fn random_dyadic_masses(rng: &mut ChaCha8Rng, cells: usize) -> Vec<f64> {
    let mut counts = vec![0u32; cells];
    for _ in 0..256 {
        counts[rng.gen_range(0..cells)] += 1;
    }
    counts.into_iter().map(|c| c as f64 / 256.0).collect()
}

#[test]
fn criterion_03_moebius_and_cdm_roundtrips_are_exact() {
    gate("criterion 3", Duration::from_secs(5), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EC3);
        for trial in 0..100 {
            let n = rng.gen_range(1..=8usize);
            let poset = random_poset(&mut rng, n);
            let q: Vec<f64> = (0..n).map(|_| rng.gen_range(0..=256u32) as f64 / 256.0).collect();
            let g = zeta_transform(&poset, &q).map_err(|e| format!("trial {trial}: {e}"))?;
            let back = moebius_invert(&poset, &g).map_err(|e| format!("trial {trial}: {e}"))?;
            ck(back == q, || format!("trial {trial}: zeta/moebius roundtrip is not exact"))?;
            let forward = zeta_transform(&poset, &back).unwrap();
            ck(forward == g, || format!("trial {trial}: moebius/zeta roundtrip is not exact"))?;
        }
        for trial in 0..100 {
            let n = rng.gen_range(1..=4u32);
            let maxdim = rng.gen_range(0..=2usize);
            let sims = all_simplices(n, maxdim);
            let masses = random_dyadic_masses(&mut rng, sims.len());
            let support: Vec<(SimplexKey, f64)> =
                sims.into_iter().zip(masses).filter(|(_, p)| *p > 0.0).collect();
            let q = SimplexMeasure::new(n, maxdim, support).unwrap();
            let back = cdm_invert(&cdm_marginal(&q)).map_err(|e| format!("trial {trial}: {e}"))?;
            ck(back == q, || format!("trial {trial}: cdm roundtrip is not exact"))?;
        }
        let two_edges = FuzzyComplex::from_weights(
            4,
            1,
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
        match cdm_invert(&two_edges) {
            Err(MeasureError::NoPreimage { .. }) => {}
            other => return Err(format!("two disjoint edges: expected NoPreimage, got {other:?}")),
        }
        Ok("100 zeta/moebius + 100 cdm roundtrips exact, counterexample rejected".into())
    })
}

fn product_measure(probs: [f64; 3]) -> (EdgeIndependentMeasure, ComplexMeasure) {
    let edges = [simplex(&[0, 1]), simplex(&[0, 2]), simplex(&[1, 2])];
    let e = EdgeIndependentMeasure::new(3, edges.into_iter().zip(probs)).unwrap();
    let expanded = e.expand().unwrap();
    (e, expanded)
}

#[test]
fn criterion_04_merge_laws_and_order_of_operations() {
    gate("criterion 4", Duration::from_secs(10), || {
        let grid = [0.1, 0.5, 0.9];
        let edges = [simplex(&[0, 1]), simplex(&[0, 2]), simplex(&[1, 2])];
        let mut configs: Vec<[f64; 3]> = Vec::new();
        for a in grid {
            for b in grid {
                for c in grid {
                    configs.push([a, b, c]);
                }
            }
        }
        let mut worst: f64 = 0.0;
        for p1 in &configs {
            let (_, m1) = product_measure(*p1);
            for p2 in &configs {
                let (_, m2) = product_measure(*p2);
                let or = boolean_merge(&m1, &m2, BoolMerge::Or).map_err(|e| e.to_string())?;
                let and = boolean_merge(&m1, &m2, BoolMerge::And).map_err(|e| e.to_string())?;
                let mu_or = marginal(&or);
                let mu_and = marginal(&and);
                for (k, edge) in edges.iter().enumerate() {
                    let (q1, q2) = (p1[k], p2[k]);
                    let dev_or = (mu_or.weight(edge) - (q1 + q2 - q1 * q2)).abs();
                    let dev_and = (mu_and.weight(edge) - q1 * q2).abs();
                    ck(dev_or <= 1e-12, || {
                        format!("OR marginal off by {dev_or:e} at {p1:?} x {p2:?}")
                    })?;
                    ck(dev_and <= 1e-12, || {
                        format!("AND marginal off by {dev_and:e} at {p1:?} x {p2:?}")
                    })?;
                    worst = worst.max(dev_or).max(dev_and);
                }
            }
        }

        // Merging the metrics first and merging the fuzzy images first give
        // different edge weights; the metric-first path matches the survival
        // value of the merged metric exactly.
        let d1 = DistanceMatrix::from_condensed(3, &[1.0, 1.0, 1.0]).unwrap();
        let d2 = DistanceMatrix::from_condensed(3, &[2.0, 1.0, 1.0]).unwrap();
        let phi = ScaleDistribution::exponential(1.0).unwrap();
        let dmax = d1.pointwise_max(&d2).map_err(|e| e.to_string())?;
        let premerged = fuzzy_from_filtration(&dmax, 2, &phi).map_err(|e| e.to_string())?;
        for s in all_simplices(3, 2) {
            let expected = phi.survival(vr_scale(&dmax, &s).unwrap()).unwrap();
            let got = premerged.weight(&s);
            ck(got == expected, || {
                format!("premerged weight of {s:?} is {got}, survival gives {expected}")
            })?;
        }
        let f1 = fuzzy_from_filtration(&d1, 2, &phi).map_err(|e| e.to_string())?;
        let f2 = fuzzy_from_filtration(&d2, 2, &phi).map_err(|e| e.to_string())?;
        let postmerged = f1.merge(&f2, MergeOp::Product).map_err(|e| e.to_string())?;
        let edge = simplex(&[0, 1]);
        let gap = (premerged.weight(&edge) - postmerged.weight(&edge)).abs();
        ck(gap > 1e-3, || format!("order-of-operations gap {gap:e} is not above 1e-3"))?;
        Ok(format!("729 product pairs, max marginal deviation {worst:e}; order gap {gap:.3}"))
    })
}

#[test]
fn criterion_05_cross_entropy_equals_kl_for_independent_edges() {
    gate("criterion 5", Duration::from_secs(10), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EC5);
        let mut worst: f64 = 0.0;
        for trial in 0..100 {
            let n = rng.gen_range(2..=5u32);
            let edges: Vec<SimplexKey> = all_simplices(n, 1)
                .into_iter()
                .filter(|s| s.dim() == 1)
                .collect();
            let draw = |rng: &mut ChaCha8Rng| {
                let probs: Vec<(SimplexKey, f64)> =
                    edges.iter().map(|e| (e.clone(), rng.gen_range(0.05..0.95))).collect();
                EdgeIndependentMeasure::new(n, probs).unwrap()
            };
            let e1 = draw(&mut rng);
            let e2 = draw(&mut rng);
            let report = verify_ce_equals_kl(&e1, &e2).map_err(|e| format!("trial {trial}: {e}"))?;
            ck(report.gap <= 1e-9, || {
                format!(
                    "trial {trial}: CE {} vs KL {} gap {:e}",
                    report.cross_entropy, report.kl, report.gap
                )
            })?;
            worst = worst.max(report.gap);
        }

        // Dependent pair: p ties the triangle and its faces together while q
        // scatters independent edge patterns, so the marginal cross entropy
        // loses the correlation.
        let verts = || (0..3u32).map(|v| simplex(&[v]));
        let all_on = CrispComplex::closure(3, 2, [simplex(&[0, 1, 2])]).unwrap();
        let all_off = CrispComplex::closure(3, 2, verts().collect::<Vec<_>>()).unwrap();
        let p = ComplexMeasure::new(vec![(all_on, 0.5), (all_off, 0.5)]).unwrap();
        let edges = [simplex(&[0, 1]), simplex(&[0, 2]), simplex(&[1, 2])];
        let mut q_support = Vec::new();
        for mask in 0..8usize {
            let mut generators: Vec<SimplexKey> = verts().collect();
            for (k, e) in edges.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    generators.push(e.clone());
                }
            }
            if mask == 7 {
                generators.push(simplex(&[0, 1, 2]));
            }
            q_support.push((CrispComplex::closure(3, 2, generators).unwrap(), 0.125));
        }
        let q = ComplexMeasure::new(q_support).unwrap();
        let kl = kl_divergence(&p, &q);
        let ce = fuzzy_cross_entropy(&marginal(&p), &marginal(&q), &[]).unwrap();
        let gap = (ce - kl).abs();
        ck(gap > 1e-3, || format!("dependent pair: CE {ce} vs KL {kl}, gap {gap:e}"))?;
        Ok(format!("100 independent pairs, max gap {worst:e}; dependent gap {gap:.3}"))
    })
}

#[test]
fn criterion_06_filtration_measure_and_rank_order_identities() {
    gate("criterion 6", Duration::from_secs(10), || {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EC6);
        let mut worst: f64 = 0.0;
        for trial in 0..40 {
            let n = rng.gen_range(2..=5usize);
            let rows: Vec<Vec<f64>> =
                (0..n).map(|_| vec![rng.gen::<f64>() * 4.0, rng.gen::<f64>() * 4.0]).collect();
            let dm = DistanceMatrix::from_points(&Matrix::from_rows(&rows));
            let phi = if trial % 2 == 0 {
                ScaleDistribution::exponential(0.5 + rng.gen::<f64>()).unwrap()
            } else {
                ScaleDistribution::weibull(0.5 + rng.gen::<f64>(), 0.8 + rng.gen::<f64>()).unwrap()
            };
            let m = filtration_measure(&dm, 2, &phi).map_err(|e| format!("trial {trial}: {e}"))?;
            let total: f64 = m.support().map(|(_, p)| p).sum();
            ck((total - 1.0).abs() <= 1e-12, || {
                format!("trial {trial}: probabilities sum to {total}")
            })?;
            let mu = marginal(&m);
            for s in all_simplices(n as u32, 2) {
                let expected = phi.survival(vr_scale(&dm, &s).unwrap()).unwrap();
                let dev = (mu.weight(&s) - expected).abs();
                ck(dev <= 1e-12, || {
                    format!("trial {trial}: marginal of {s:?} off by {dev:e}")
                })?;
                worst = worst.max(dev);
            }
        }

        let families = [
            ScaleDistribution::exponential(0.8).unwrap(),
            ScaleDistribution::weibull(1.2, 1.7).unwrap(),
            ScaleDistribution::log_logistic(1.0, 2.0).unwrap(),
        ];
        for phi in &families {
            let distances: Vec<f64> = {
                let mut d: Vec<f64> = (0..4).map(|_| 0.2 + 3.0 * rng.gen::<f64>()).collect();
                d.sort_by(|a, b| a.partial_cmp(b).unwrap());
                d
            };
            let chain = RankOrderChain::new(distances.clone(), phi).map_err(|e| e.to_string())?;
            let surv =
                |i: usize| -> f64 { phi.survival(distances[i]).unwrap() };
            let mut total = 0.0;
            for mask in 0..16usize {
                let assignment: Vec<bool> = (0..4).map(|i| mask & (1 << i) != 0).collect();
                let joint = rank_order_joint(&chain, &assignment).map_err(|e| e.to_string())?;
                total += joint;
                // Only threshold patterns get mass: a common random scale
                // admits every distance below it, so the admitted set is a
                // prefix of the sorted chain.
                let t = assignment.iter().take_while(|b| **b).count();
                let expected = if assignment[t..].iter().any(|b| *b) {
                    0.0
                } else if t == 0 {
                    1.0 - surv(0)
                } else if t == 4 {
                    surv(3)
                } else {
                    surv(t - 1) - surv(t)
                };
                let dev = (joint - expected).abs();
                ck(dev <= 1e-12, || {
                    format!("mask {mask:04b}: joint {joint} vs factorization {expected}")
                })?;
                worst = worst.max(dev);
            }
            ck((total - 1.0).abs() <= 1e-12, || {
                format!("rank-order masses sum to {total}")
            })?;
        }
        Ok(format!("40 filtration measures + 3 rank-order families, max deviation {worst:e}"))
    })
}

#[test]
fn criterion_07_enclosing_ball_radii_and_interleaving() {
    gate("criterion 7", Duration::from_secs(5), || {
        let right = cech3_radius(3.0, 4.0, 5.0).map_err(|e| e.to_string())?;
        ck((right - 2.5).abs() <= 1e-12, || format!("(3,4,5) radius {right}"))?;
        let unit = cech3_radius(1.0, 1.0, 1.0).map_err(|e| e.to_string())?;
        let third = 1.0 / 3.0f64.sqrt();
        ck((unit - third).abs() <= 1e-9, || format!("equilateral radius {unit} vs {third}"))?;

        let mut rng = ChaCha8Rng::seed_from_u64(0x5EC7);
        for trial in 0..10_000 {
            let p: Vec<(f64, f64)> =
                (0..3).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
            let d01 = (p[0].0 - p[1].0).hypot(p[0].1 - p[1].1);
            let d02 = (p[0].0 - p[2].0).hypot(p[0].1 - p[2].1);
            let d12 = (p[1].0 - p[2].0).hypot(p[1].1 - p[2].1);
            let r = cech3_radius(d01, d02, d12).map_err(|e| format!("trial {trial}: {e}"))?;
            let dmax = d01.max(d02).max(d12);
            ck(r >= dmax / 2.0 * (1.0 - 1e-12), || {
                format!("trial {trial}: radius {r} below half diameter {}", dmax / 2.0)
            })?;
            ck(r <= dmax / 3.0f64.sqrt() * (1.0 + 1e-9), || {
                format!("trial {trial}: radius {r} above {}", dmax / 3.0f64.sqrt())
            })?;
        }
        Ok(format!("(3,4,5) -> {right}, equilateral -> {unit:.9}, 10000 triangles bracketed"))
    })
}

const FD_STEP: f64 = 1e-5;
const REL_TOLERANCE: f64 = 1e-4;
const BRANCH_MARGIN: f64 = 1e-3;

fn phi_y() -> ScaleDistribution {
    ScaleDistribution::LogLogistic { a: 1.0, b: 2.0 }
}

/// Relative distance of a triangle from the right-angle branch switch of the
/// enclosing-ball radius.
fn branch_margin(y: &Matrix) -> f64 {
    let a = y.row_distance(1, 2);
    let b = y.row_distance(0, 2);
    let c = y.row_distance(0, 1);
    let sq = a * a + b * b + c * c;
    let longest = a.max(b).max(c);
    (sq - 2.0 * longest * longest).abs() / sq.max(1e-300)
}

fn clamp_clear(dist: &ScaleDistribution, r: f64) -> bool {
    let s = dist.survival(r).unwrap();
    s > 2.0 * NU_CLAMP && s < 1.0 - 2.0 * NU_CLAMP
}

fn fd(y: &Matrix, point: usize, coord: usize, loss: impl Fn(&Matrix) -> f64) -> f64 {
    let mut up = y.clone();
    let mut down = y.clone();
    up.set(point, coord, up.get(point, coord) + FD_STEP);
    down.set(point, coord, down.get(point, coord) - FD_STEP);
    (loss(&up) - loss(&down)) / (2.0 * FD_STEP)
}

#[test]
fn criterion_08_gradients_match_finite_differences() {
    gate("criterion 8", Duration::from_secs(30), || {
        let phi = phi_y();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EC8);
        let mut accepted = 0usize;
        let mut worst: f64 = 0.0;
        while accepted < 200 {
            let y = Matrix::from_rows(&[
                vec![rng.gen::<f64>() * 2.0, rng.gen::<f64>() * 2.0],
                vec![rng.gen::<f64>() * 2.0, rng.gen::<f64>() * 2.0],
                vec![rng.gen::<f64>() * 2.0, rng.gen::<f64>() * 2.0],
            ]);
            if branch_margin(&y) < BRANCH_MARGIN {
                continue;
            }
            let (radius, _) = fuzzydr_core::embed::meb_radius_grad(&y, [0, 1, 2]);
            if !clamp_clear(&phi, radius) {
                continue;
            }
            let positive = accepted % 2 == 0;
            let mu = 0.3 + 0.6 * rng.gen::<f64>();
            let (_, grad) = triplet_loss_and_grad(&y, [0, 1, 2], mu, positive, &phi)
                .map_err(|e| e.to_string())?;
            for (p, g) in &grad {
                for coord in 0..2 {
                    let numeric = fd(&y, *p, coord, |m| {
                        triplet_loss_and_grad(m, [0, 1, 2], mu, positive, &phi).unwrap().0
                    });
                    let rel = (g[coord] - numeric).abs() / numeric.abs().max(1e-6);
                    ck(rel < REL_TOLERANCE || (g[coord] - numeric).abs() < 1e-8, || {
                        format!(
                            "triplet config {accepted}, point {p}, coord {coord}: \
                             analytic {} vs numeric {numeric}",
                            g[coord]
                        )
                    })?;
                    worst = worst.max(rel.min(1.0));
                }
            }
            accepted += 1;
        }

        accepted = 0;
        while accepted < 200 {
            let y = Matrix::from_rows(&[
                vec![rng.gen::<f64>() * 2.0, rng.gen::<f64>() * 2.0],
                vec![rng.gen::<f64>() * 2.0, rng.gen::<f64>() * 2.0],
            ]);
            let d = y.row_distance(0, 1);
            if d < 0.05 || !clamp_clear(&phi, d) {
                continue;
            }
            let positive = accepted % 2 == 0;
            let mu = 0.3 + 0.6 * rng.gen::<f64>();
            let (_, grad) =
                edge_loss_and_grad(&y, 0, 1, mu, positive, &phi).map_err(|e| e.to_string())?;
            for (p, g) in &grad {
                for coord in 0..2 {
                    let numeric = fd(&y, *p, coord, |m| {
                        edge_loss_and_grad(m, 0, 1, mu, positive, &phi).unwrap().0
                    });
                    let rel = (g[coord] - numeric).abs() / numeric.abs().max(1e-6);
                    ck(rel < REL_TOLERANCE || (g[coord] - numeric).abs() < 1e-8, || {
                        format!(
                            "edge config {accepted}, point {p}, coord {coord}: \
                             analytic {} vs numeric {numeric}",
                            g[coord]
                        )
                    })?;
                }
            }
            accepted += 1;
        }
        Ok(format!("200 triplet + 200 edge configs, worst relative error {worst:e}"))
    })
}

/// Lloyd's algorithm with two centers seeded at the farthest point pair,
/// scored by majority-label purity.
fn two_means_purity(coords: &Matrix, labels: &[usize]) -> f64 {
    let n = coords.rows();
    let (mut a, mut b, mut best) = (0, 1, 0.0f64);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = coords.row_distance(i, j);
            if d > best {
                best = d;
                a = i;
                b = j;
            }
        }
    }
    let dim = coords.cols();
    let row = |i: usize| (0..dim).map(|c| coords.get(i, c)).collect::<Vec<f64>>();
    let mut centers = [row(a), row(b)];
    let mut assign = vec![0usize; n];
    for _ in 0..25 {
        for i in 0..n {
            let dist_to = |center: &[f64]| -> f64 {
                (0..dim).map(|c| (coords.get(i, c) - center[c]).powi(2)).sum()
            };
            assign[i] = usize::from(dist_to(&centers[1]) < dist_to(&centers[0]));
        }
        for side in 0..2 {
            let members: Vec<usize> = (0..n).filter(|&i| assign[i] == side).collect();
            if members.is_empty() {
                continue;
            }
            for c in 0..dim {
                centers[side][c] =
                    members.iter().map(|&i| coords.get(i, c)).sum::<f64>() / members.len() as f64;
            }
        }
    }
    let mut agree = 0usize;
    for side in 0..2 {
        let members: Vec<usize> = (0..n).filter(|&i| assign[i] == side).collect();
        let ones = members.iter().filter(|&&i| labels[i] == 1).count();
        agree += ones.max(members.len() - ones);
    }
    agree as f64 / n as f64
}

fn gaussian_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Matrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
                    let v: f64 = rng.gen();
                    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
                })
                .collect()
        })
        .collect();
    Matrix::from_rows(&rows)
}

#[test]
fn criterion_09_embedding_quality_on_synthetic_data() {
    gate("criterion 9", Duration::from_secs(300), || {
        let mut failures = Vec::new();
        let blob_spec = SynthSpec::Blobs { clusters: 2, n: 500, dim: 10, sep: 10.0 };
        let mut t_min = f64::INFINITY;
        let mut purity_min = f64::INFINITY;
        for seed in 0..5u64 {
            let data = synth(&blob_spec, seed);
            let labels = data.labels.as_ref().expect("generator labels its clusters");
            let config = TrainConfig {
                mode: EmbedMode::Triplet,
                epochs: 200,
                k: 15,
                seed,
                ..TrainConfig::default()
            };
            let result = train(&data.points, &config).map_err(|e| format!("seed {seed}: {e}"))?;
            let t = trustworthiness(
                &DistanceMatrix::from_points(&data.points),
                &DistanceMatrix::from_points(&result.coords),
                15,
            )
            .map_err(|e| format!("seed {seed}: {e}"))?;
            let purity = two_means_purity(&result.coords, labels);
            t_min = t_min.min(t);
            purity_min = purity_min.min(purity);
            if t < 0.90 {
                failures.push(format!("blobs seed {seed}: trustworthiness {t:.4} below 0.90"));
            }
            if purity < 0.98 {
                failures.push(format!("blobs seed {seed}: purity {purity:.4} below 0.98"));
            }
        }

        let circle_spec = SynthSpec::Circle { n: 300, r: 1.0, noise: 0.05 };
        let mut h1_margin_min = f64::INFINITY;
        for seed in 0..5u64 {
            let data = synth(&circle_spec, seed);
            let config = TrainConfig { epochs: 200, k: 15, seed, ..TrainConfig::default() };
            let result = train(&data.points, &config).map_err(|e| format!("seed {seed}: {e}"))?;
            let eval_config = EvalConfig { repeats: 5, seed, ..EvalConfig::default() };
            let trained = evaluate(&data.points, &result.coords, &eval_config)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            let mut control_rng = ChaCha8Rng::seed_from_u64(seed);
            let control = gaussian_cloud(&mut control_rng, data.points.rows(), 2);
            let random = evaluate(&data.points, &control, &eval_config)
                .map_err(|e| format!("seed {seed}: {e}"))?;
            h1_margin_min = h1_margin_min.min(random.wasserstein_h1 - trained.wasserstein_h1);
            if trained.wasserstein_h1 >= random.wasserstein_h1 {
                failures.push(format!(
                    "circle seed {seed}: loop mismatch {} not below random control {}",
                    trained.wasserstein_h1, random.wasserstein_h1
                ));
            }
        }
        let summary = format!(
            "blobs worst T {t_min:.4} / worst purity {purity_min:.4}; \
             circle worst H1 margin over control {h1_margin_min:.4}"
        );
        ck(failures.is_empty(), || format!("{summary}; {}", failures.join("; ")))?;
        Ok(summary)
    })
}

#[test]
fn criterion_10_identity_and_pca_metric_sanity() {
    gate("criterion 10", Duration::from_secs(30), || {
        let data = synth(&SynthSpec::Blobs { clusters: 2, n: 80, dim: 5, sep: 6.0 }, 3);
        let config = EvalConfig::default();
        let identity = evaluate(&data.points, &data.points, &config).map_err(|e| e.to_string())?;
        ck(identity.trustworthiness == 1.0, || {
            format!("identity trustworthiness {}", identity.trustworthiness)
        })?;
        ck(identity.wasserstein_h0 == 0.0, || {
            format!("identity H0 mismatch {}", identity.wasserstein_h0)
        })?;
        ck(identity.wasserstein_h1 == 0.0, || {
            format!("identity H1 mismatch {}", identity.wasserstein_h1)
        })?;
        let pca = pca_init(&data.points, 2, config.seed).map_err(|e| e.to_string())?;
        let report = evaluate(&data.points, &pca.coords, &config).map_err(|e| e.to_string())?;
        ck((report.procrustes_g - 1.0).abs() <= 1e-6, || {
            format!("PCA alignment score {}", report.procrustes_g)
        })?;
        Ok(format!(
            "identity T = {}, W = 0; PCA G = {}",
            identity.trustworthiness, report.procrustes_g
        ))
    })
}

#[test]
fn criterion_11_persistence_matches_rank_oracle() {
    gate("criterion 11", Duration::from_secs(60), || {
        let mut datasets: Vec<(String, Matrix)> = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5EC11);
        for trial in 0..30 {
            let n = rng.gen_range(4..=12usize);
            let rows: Vec<Vec<f64>> =
                (0..n).map(|_| vec![rng.gen::<f64>() * 3.0, rng.gen::<f64>() * 3.0]).collect();
            datasets.push((format!("planar {trial} (n={n})"), Matrix::from_rows(&rows)));
        }
        for trial in 0..10 {
            let n = rng.gen_range(4..=12usize);
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..3).map(|_| rng.gen::<f64>() * 3.0).collect())
                .collect();
            datasets.push((format!("spatial {trial} (n={n})"), Matrix::from_rows(&rows)));
        }
        for (rows, cols) in [(2, 3), (3, 3), (2, 4), (3, 4)] {
            let pts: Vec<Vec<f64>> = (0..rows)
                .flat_map(|r| (0..cols).map(move |c| vec![r as f64, c as f64]))
                .collect();
            datasets.push((format!("grid {rows}x{cols}"), Matrix::from_rows(&pts)));
        }
        let ring: Vec<Vec<f64>> = (0..12)
            .map(|i| {
                let angle = std::f64::consts::TAU * i as f64 / 12.0;
                vec![angle.cos(), angle.sin()]
            })
            .collect();
        datasets.push(("ring 12".into(), Matrix::from_rows(&ring)));
        datasets.push((
            "duplicates".into(),
            Matrix::from_rows(&[
                vec![0.0, 0.0],
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![1.0, 0.0],
                vec![0.5, 2.0],
            ]),
        ));
        datasets.push((
            "collinear".into(),
            Matrix::from_rows(&(0..7).map(|i| vec![i as f64, 0.0]).collect::<Vec<_>>()),
        ));

        for (name, points) in &datasets {
            let dm = DistanceMatrix::from_points(points);
            let fast = vr_persistence(&dm).map_err(|e| format!("{name}: {e}"))?;
            let oracle = persistence_by_rank(&dm).map_err(|e| format!("{name}: {e}"))?;
            ck(fast == oracle, || {
                format!("{name}: diagrams differ\n fast: {fast:?}\n oracle: {oracle:?}")
            })?;
        }
        Ok(format!("{} datasets match the rank oracle exactly", datasets.len()))
    })
}

fn invoke(args: &[&str]) {
    let cli = Cli::try_parse_from(std::iter::once("fuzzydr").chain(args.iter().copied()))
        .expect("flags must parse");
    run(cli).expect("command must succeed");
}

#[test]
fn criterion_12_repeated_runs_are_byte_identical() {
    gate("criterion 12", Duration::from_secs(60), || {
        let dirs = [TempDir::new().unwrap(), TempDir::new().unwrap()];
        for dir in &dirs {
            invoke(&[
                "embed",
                "--in",
                "blobs:c=2,n=120,d=6,sep=8",
                "--mode",
                "edge",
                "--k",
                "10",
                "--epochs",
                "30",
                "--seed",
                "7",
                "--out",
                dir.path().to_str().unwrap(),
            ]);
        }
        let first = fs::read(dirs[0].path().join("embedding.csv")).map_err(|e| e.to_string())?;
        let second = fs::read(dirs[1].path().join("embedding.csv")).map_err(|e| e.to_string())?;
        ck(!first.is_empty(), || "embedding file is empty".into())?;
        ck(first == second, || "repeated runs differ".into())?;
        Ok(format!("two runs, {} identical bytes", first.len()))
    })
}
