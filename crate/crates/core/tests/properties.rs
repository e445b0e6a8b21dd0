mod support;

use lda_core::bounds::{delta_mse, fullrank_bound, lambda_threshold_mse, mse_hypotheses_hold, ParameterSet};
use lda_core::decoding::{check_message_fft, check_message_naive, coordinate_priors, ml_decode, BpConfig, BpDecoder};
use lda_core::field::{same_row_space, FpMatrix};
use lda_core::geometry::{
    closest_point, count_integer_points, effective_radius, integer_point_sandwich, packing_radius, BallSpec,
};
use lda_core::graph::{neighborhood, sample_standard_ensemble, Side};
use lda_core::lattice::{exact_dual_basis, support_image, ConstructionALattice};
use num_traits::Signed;
use num_rational::Ratio;
use proptest::prelude::*;

const PRIMES: [u64; 4] = [2, 3, 5, 7];

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = FpMatrix> {
    (prop::sample::select(PRIMES.to_vec()), 1..=max_rows, 1..=max_cols).prop_flat_map(|(p, r, c)| {
        prop::collection::vec(0..p, r * c).prop_map(move |v| {
            let rows: Vec<Vec<u64>> = v.chunks(c).map(|s| s.to_vec()).collect();
            FpMatrix::from_rows(&rows, c, p).unwrap()
        })
    })
}

/// A lattice together with integer coefficients for building members.
fn lattice_and_coeffs(max_n: usize) -> impl Strategy<Value = (ConstructionALattice, Vec<i64>, Vec<i64>)> {
    matrix(3, max_n).prop_flat_map(|h| {
        let n = h.cols();
        (
            Just(ConstructionALattice::from_checks(h).unwrap()),
            prop::collection::vec(-6i64..6, n + 8),
            prop::collection::vec(-6i64..6, n + 8),
        )
    })
}

/// `sum_i c_i g_i + p z` from code generators `g_i`.
fn member(l: &ConstructionALattice, coeffs: &[i64]) -> Vec<i64> {
    let n = l.n();
    let p = l.p() as i64;
    let basis = &l.code().basis;
    let mut x = vec![0i64; n];
    for r in 0..basis.rows() {
        for j in 0..n {
            x[j] += coeffs[r] * basis.get(r, j) as i64;
        }
    }
    for j in 0..n {
        x[j] += p * coeffs[coeffs.len() - 1 - j];
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rank_equals_transpose_rank(m in matrix(6, 6)) {
        prop_assert_eq!(m.rank(), m.transpose().rank());
    }

    #[test]
    fn nullspace_rows_are_annihilated(m in matrix(5, 7)) {
        let code = m.nullspace_basis();
        for r in 0..code.basis.rows() {
            prop_assert!(m.mul_vec(code.basis.row(r)).iter().all(|&v| v == 0));
        }
        prop_assert_eq!(code.dimension() + m.rank(), m.cols());
    }

    #[test]
    fn dual_is_an_involution(m in matrix(5, 7)) {
        let code = m.nullspace_basis();
        let back = code.dual().dual();
        prop_assert!(same_row_space(&back.basis, &code.basis));
    }

    #[test]
    fn membership_is_a_group((l, a, b) in lattice_and_coeffs(6)) {
        let x = member(&l, &a);
        let y = member(&l, &b);
        prop_assert!(l.contains(&x));
        let sum: Vec<i64> = x.iter().zip(&y).map(|(u, v)| u + v).collect();
        let neg: Vec<i64> = x.iter().map(|u| -u).collect();
        prop_assert!(l.contains(&sum));
        prop_assert!(l.contains(&neg));
        prop_assert!(support::brute_member(l.check_matrix(), &sum));
    }

    #[test]
    fn dual_determinants_multiply_to_one((l, _, _) in lattice_and_coeffs(6)) {
        let d = exact_dual_basis(&l).unwrap();
        let prod = d.primal.determinant().unwrap() * d.dual.determinant().unwrap();
        prop_assert_eq!(prod.abs(), Ratio::from_integer(1));
    }

    #[test]
    fn quotient_by_pzn_has_p_to_the_k_classes(m in matrix(3, 5)) {
        let l = ConstructionALattice::from_checks(m.clone()).unwrap();
        let classes = support::brute_codewords(&m).len() as u64;
        prop_assert_eq!(classes, l.p().pow(l.code_dim() as u32));
    }

    #[test]
    fn closest_distance_is_translation_invariant(
        (l, a, _) in lattice_and_coeffs(5),
        x in prop::collection::vec(-20.0f64..20.0, 5),
    ) {
        let x = &x[..l.n()];
        let v = member(&l, &a);
        let shifted: Vec<f64> = x.iter().zip(&v).map(|(u, w)| u + *w as f64).collect();
        let (_, d0) = closest_point(&l, x).unwrap();
        let (_, d1) = closest_point(&l, &shifted).unwrap();
        prop_assert!((d0 - d1).abs() < 1e-9);
    }

    #[test]
    fn ml_decode_is_translation_equivariant(
        (l, a, _) in lattice_and_coeffs(5),
        x in prop::collection::vec(-20.0f64..20.0, 5),
    ) {
        let x = &x[..l.n()];
        let v = member(&l, &a);
        let shifted: Vec<f64> = x.iter().zip(&v).map(|(u, w)| u + *w as f64).collect();
        let base = ml_decode(&l, x).unwrap();
        let moved = ml_decode(&l, &shifted).unwrap();
        let expect: Vec<i64> = base.iter().zip(&v).map(|(u, w)| u + w).collect();
        prop_assert_eq!(moved, expect);
    }

    #[test]
    fn packing_radius_below_effective_radius((l, _, _) in lattice_and_coeffs(6)) {
        let r = packing_radius(&l).unwrap();
        prop_assert!(r.r_pack <= effective_radius(&l) + 1e-12);
    }

    #[test]
    fn integer_counts_obey_sandwich(
        center in prop::collection::vec(-3.0f64..3.0, 1..=4),
        r in 0.5f64..6.0,
    ) {
        let n = center.len();
        let count = count_integer_points(&BallSpec::new(center, r), 10_000_000).unwrap() as f64;
        let (lo, hi) = integer_point_sandwich(n, r);
        prop_assert!(lo <= count && count <= hi);
    }

    #[test]
    fn fft_check_matches_naive(
        p in prop::sample::select(vec![3u64, 5, 7, 11]),
        raw in prop::collection::vec((1u64..1000, prop::collection::vec(0.001f64..1.0, 11)), 2..6),
    ) {
        let coefs: Vec<u64> = raw.iter().map(|(c, _)| 1 + c % (p - 1)).collect();
        let masses: Vec<Vec<f64>> = raw
            .iter()
            .map(|(_, m)| {
                let m = &m[..p as usize];
                let s: f64 = m.iter().sum();
                m.iter().map(|v| v / s).collect()
            })
            .collect();
        for t in 0..coefs.len() {
            let a = check_message_naive(&coefs, &masses, t, p);
            let b = check_message_fft(&coefs, &masses, t, p).unwrap();
            for (u, v) in a.iter().zip(&b) {
                prop_assert!((u - v).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn bp_messages_stay_normalized(
        m in matrix(4, 8),
        y in prop::collection::vec(-10.0f64..10.0, 8),
        sigma in 0.2f64..3.0,
    ) {
        let y = &y[..m.cols()];
        let p = m.modulus();
        let dec = BpDecoder::new(&m, BpConfig { max_iters: 15, damping: 0.0, early_stop: false }).unwrap();
        let priors: Vec<Vec<f64>> = y.iter().map(|&v| coordinate_priors(v, sigma, p, 4).unwrap()).collect();
        let out = dec.decode(&priors).unwrap();
        prop_assert!(out.max_normalization_error <= 1e-9);
        for b in &out.beliefs {
            prop_assert!((b.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn check_subset_image_is_its_neighborhood(seed in 0u64..1000, mask in 1u32..(1 << 6)) {
        let g = sample_standard_ensemble(12, 3, 6, seed).unwrap();
        let subset: Vec<usize> = (0..g.m()).filter(|i| mask >> i & 1 == 1).collect();
        let u: Vec<u64> = (0..g.m()).map(|i| (mask >> i & 1) as u64).collect();
        let image = support_image(&g, &u).unwrap();
        let nb = neighborhood(&g, &subset, Side::Check).unwrap();
        prop_assert_eq!(image.len(), support::neighbors(g.check_lists(), &subset));
        prop_assert_eq!(image, nb);
    }

    #[test]
    fn check_subsets_expand_by_inverse_rate(seed in 0u64..1000, mask in 1u32..(1 << 6)) {
        let g = sample_standard_ensemble(12, 3, 6, seed).unwrap();
        let subset: Vec<usize> = (0..g.m()).filter(|i| mask >> i & 1 == 1).collect();
        let nb = support::neighbors(g.check_lists(), &subset) as f64;
        prop_assert!(nb >= subset.len() as f64 / (1.0 - g.rate()) - 1e-9);
    }

    #[test]
    fn delta_positive_under_mse_hypotheses(
        r in 0.05f64..0.95,
        da in 0.01f64..20.0,
        db in 0.01f64..40.0,
        stretch in 1.000001f64..5.0,
    ) {
        let a = 2.0 * (1.0 + r) + da;
        let b = 2.0 * (1.0 + r) / (1.0 - r) + db;
        let mut ps = ParameterSet::new(r, 1.0, 1.0, a, 1.0, b);
        ps.lambda = lambda_threshold_mse(&ps).unwrap() * stretch;
        prop_assert!(mse_hypotheses_hold(&ps));
        prop_assert!(delta_mse(&ps) > 0.0);
    }

    #[test]
    fn fullrank_bound_decreases_in_each_argument(
        n in 2.0f64..1e4,
        lambda in 0.1f64..10.0,
        delta in 0.0f64..5.0,
        bump in 0.01f64..3.0,
    ) {
        let base = fullrank_bound(n, lambda, delta);
        prop_assert!(fullrank_bound(n * (1.0 + bump), lambda, delta) < base);
        prop_assert!(fullrank_bound(n, lambda + bump, delta) < base);
        prop_assert!(fullrank_bound(n, lambda, delta + bump) < base);
    }
}
