mod support;

use lda_core::decoding::{BpConfig, BpDecoder};
use lda_core::field::FpMatrix;
use lda_core::geometry::{
    capped_count_upper_bound, closest_point, count_integer_points, nsm_estimate, packing_radius, BallSpec,
};
use lda_core::graph::{
    sample_standard_ensemble, small_neighborhood_violation, verify_expansion, ExpansionParams, Property, Verdict,
    VerifyMode,
};
use lda_core::lattice::ConstructionALattice;
use lda_core::rng::stream_rng;
use rand::Rng;
use support::Oracle;

#[test]
fn cvp_and_svp_match_brute_force() {
    let mut rng = stream_rng(21, 0);
    for (n, p, rows) in [(4, 3, 2), (5, 5, 3), (6, 3, 2), (3, 5, 1)] {
        let h = support::random_matrix(&mut rng, rows, n, p);
        let l = ConstructionALattice::from_checks(h.clone()).unwrap();
        let words = support::brute_codewords(&h);
        for q in 0..30 {
            let x: Vec<f64> = (0..n)
                .map(|_| {
                    let v = rng.random_range(-8.0..8.0);
                    // Half-integers put queries on Voronoi boundaries.
                    if q % 3 == 0 { (v * 2.0f64).round() / 2.0 } else { v }
                })
                .collect();
            let (y, d) = closest_point(&l, &x).unwrap();
            let (by, bd) = support::brute_closest(&words, p, &x);
            assert_eq!(y, by, "x = {x:?}");
            assert_eq!(d, bd);
        }
        let r = packing_radius(&l).unwrap();
        let s = support::brute_shortest_sq(&h);
        assert_eq!(r.shortest_length, (s as f64).sqrt());
        assert!(support::brute_member(&h, &r.shortest_vector));
    }
}

#[test]
fn exhaustive_expansion_matches_subset_oracle() {
    let rate = 0.5;
    let params = ExpansionParams::with_default_radii(rate, 1.0, 1.1, 2.05, 2.1);
    for seed in 0..6 {
        let g = sample_standard_ensemble(12, 3, 6, seed).unwrap();
        let report = verify_expansion(&g, &params, 12, VerifyMode::Exhaustive).unwrap();
        for prop in Property::ALL {
            let got = match &report.get(prop).verdict {
                Verdict::Certified => Oracle::Certified,
                Verdict::Falsified { witness, .. } => Oracle::Falsified(witness.clone()),
                Verdict::Undecided { reason } => panic!("undecided: {reason}"),
            };
            assert_eq!(got, support::brute_property(&g, &params, prop), "seed {seed} {prop:?}");
        }
        if report.all_certified() {
            assert_eq!(small_neighborhood_violation(&g, params.alpha).unwrap(), None);
        }
    }
}

#[test]
fn ensemble_edges_are_equally_likely() {
    let (n, dv, dc) = (6, 2, 3);
    let m = n * dv / dc;
    let seeds = 10_000;
    let mut counts = vec![0u64; m * n];
    for seed in 0..seeds {
        let g = sample_standard_ensemble(n, dv, dc, seed).unwrap();
        for (c, list) in g.check_lists().iter().enumerate() {
            for &v in list {
                counts[c * n + v] += 1;
            }
        }
    }
    let q = dv as f64 / m as f64;
    let se = (q * (1.0 - q) / seeds as f64).sqrt();
    for (e, &k) in counts.iter().enumerate() {
        let f = k as f64 / seeds as f64;
        assert!((f - q).abs() <= 3.0 * se, "edge {e}: {f} vs {q}");
    }
}

#[test]
fn tree_beliefs_are_exact_marginals() {
    // Path-shaped Tanner tree on 7 variables.
    let p = 5;
    let h = FpMatrix::from_rows(
        &[
            vec![1, 3, 2, 0, 0, 0, 0],
            vec![0, 0, 4, 1, 2, 0, 0],
            vec![0, 0, 0, 0, 3, 3, 1],
        ],
        7,
        p,
    )
    .unwrap();
    let words = support::brute_codewords(&h);
    let mut rng = stream_rng(8, 0);
    let dec = BpDecoder::new(&h, BpConfig { max_iters: 8, damping: 0.0, early_stop: false }).unwrap();
    for _ in 0..20 {
        let priors: Vec<Vec<f64>> = (0..7)
            .map(|_| {
                let m: Vec<f64> = (0..p).map(|_| rng.random_range(0.01..1.0)).collect();
                let s: f64 = m.iter().sum();
                m.iter().map(|v| v / s).collect()
            })
            .collect();
        let exact = support::brute_marginals(&words, &priors);
        let out = dec.decode(&priors).unwrap();
        for (b, e) in out.beliefs.iter().zip(&exact) {
            for (u, v) in b.iter().zip(e) {
                assert!((u - v).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn nsm_error_shrinks_like_inverse_root_samples() {
    let l = ConstructionALattice::integer_lattice(3, 5).unwrap();
    let small = nsm_estimate(&l, 1_000, 1, 0).unwrap();
    let large = nsm_estimate(&l, 100_000, 1, 0).unwrap();
    let ratio = small.half_width / large.half_width;
    assert!((7.0..13.0).contains(&ratio), "ratio {ratio}");
    for e in [&small, &large] {
        assert!((e.mean - 1.0 / 12.0).abs() <= 4.0 * e.half_width);
    }
}

#[test]
fn capped_counts_obey_upper_bound() {
    let mut rng = stream_rng(3, 0);
    for _ in 0..40 {
        let n = rng.random_range(2..=5);
        let m = rng.random_range(1..=n);
        let r = rng.random_range(0.5..4.0);
        let center = vec![0.0; n];
        let count = count_integer_points(&BallSpec::new(center, r).with_support_cap(m), 10_000_000).unwrap();
        assert!(count as f64 <= capped_count_upper_bound(n, m, r));
    }
}

/// Averaged over every `H` in `F_3^{2x4}`, the number of lattice points in
/// the ball is at least `sqrt(E) = |Z^n ∩ rho B| / p^m`.
#[test]
fn mean_lattice_count_dominates_root_energy() {
    let (n, m, p) = (4usize, 2usize, 3u64);
    let rho: f64 = 2.5;
    let count_z = count_integer_points(&BallSpec::new(vec![0.0; n], rho), 1_000_000).unwrap() as f64;
    let root_e = count_z / (p as f64).powi(m as i32);
    let r = rho.ceil() as i64;
    let ball: Vec<Vec<i64>> = (0..(2 * r + 1).pow(n as u32))
        .map(|mut idx| {
            (0..n)
                .map(|_| {
                    let v = idx % (2 * r + 1) - r;
                    idx /= 2 * r + 1;
                    v
                })
                .collect::<Vec<i64>>()
        })
        .filter(|x| x.iter().map(|a| (a * a) as f64).sum::<f64>() <= rho * rho)
        .collect();
    assert_eq!(ball.len() as f64, count_z);
    let total_h = p.pow((m * n) as u32);
    let mut sum = 0u64;
    for idx in 0..total_h {
        let mut v = idx;
        let rows: Vec<Vec<u64>> = (0..m)
            .map(|_| {
                (0..n)
                    .map(|_| {
                        let e = v % p;
                        v /= p;
                        e
                    })
                    .collect()
            })
            .collect();
        let h = FpMatrix::from_rows(&rows, n, p).unwrap();
        sum += ball.iter().filter(|x| support::brute_member(&h, x)).count() as u64;
    }
    let mean = sum as f64 / total_h as f64;
    assert!(mean >= root_e, "{mean} < {root_e}");
}
