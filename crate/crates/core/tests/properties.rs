//! Randomized invariants: bounds, symmetries, and exact identities that must
//! hold for every valid input, not just the hand-built unit cases.

use alpha_embeddings::alpha::{
    alpha_coefficients, alpha_coefficients_stable, embed_all, reference_measure,
};
use alpha_embeddings::eval::spearman;
use alpha_embeddings::geometry::{
    alpha_geodesic, alpha_log_map, conditional_with_mode, h_inverse, h_map, pushforward, Alpha,
    FisherSolver, ReferenceKind, ShiftMode, SimplexPoint,
};
use alpha_embeddings::measures::{
    alpha_cosine_with_solver, analogy_kappa, SimilarityMethod,
};
use alpha_embeddings::trainer::{glove_weight, synthetic_words, EmbeddingModel};
use alpha_embeddings::util::kahan_sum;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn simplex(n: usize) -> impl Strategy<Value = SimplexPoint> {
    prop::collection::vec(0.05f64..1.0, n)
        .prop_map(|v| SimplexPoint::from_positive(DVector::from_vec(v)).unwrap())
}

fn model(n: usize, d: usize) -> impl Strategy<Value = EmbeddingModel> {
    prop::collection::vec(-1.0f64..1.0, 2 * n * d).prop_map(move |flat| {
        let u = DMatrix::from_row_slice(n, d, &flat[..n * d]);
        let v = DMatrix::from_row_slice(n, d, &flat[n * d..]);
        EmbeddingModel::new(u, v, DVector::zeros(n), DVector::zeros(n), synthetic_words(n))
            .unwrap()
    })
}

fn centered_pair(n: usize) -> impl Strategy<Value = (DVector<f64>, DVector<f64>)> {
    prop::collection::vec(-1.0f64..1.0, 2 * n).prop_map(move |flat| {
        let center = |s: &[f64]| {
            let mean = kahan_sum(s.iter().copied()) / s.len() as f64;
            DVector::from_iterator(s.len(), s.iter().map(|x| x - mean))
        };
        (center(&flat[..n]), center(&flat[n..]))
    })
}

const FINITE_ALPHAS: [f64; 6] = [-3.0, -1.0, -0.5, 0.0, 0.5, 2.0];

proptest! {
    #[test]
    fn weight_is_bounded_and_monotone(
        x1 in 0.0f64..500.0,
        x2 in 0.0f64..500.0,
        x_max in 1.0f64..200.0,
        exponent in 0.1f64..1.0,
    ) {
        let w1 = glove_weight(x1, x_max, exponent).unwrap();
        let w2 = glove_weight(x2, x_max, exponent).unwrap();
        prop_assert!((0.0..=1.0).contains(&w1));
        if x1 <= x2 {
            prop_assert!(w1 <= w2);
        }
    }

    #[test]
    fn normalized_points_sum_to_one(raw in prop::collection::vec(1e-3f64..1e3, 2..40)) {
        let p = SimplexPoint::from_positive(DVector::from_vec(raw)).unwrap();
        let sum = kahan_sum(p.as_vector().iter().copied());
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        prop_assert!(p.as_vector().iter().all(|&x| x > 0.0));
    }

    #[test]
    fn h_map_round_trips(p in simplex(6), ai in 0usize..FINITE_ALPHAS.len(), one in any::<bool>()) {
        let alpha = Alpha::new(if one { 1.0 } else { FINITE_ALPHAS[ai] }).unwrap();
        let back = h_inverse(&h_map(&p, alpha).unwrap()).unwrap();
        for (a, b) in p.as_vector().iter().zip(back.as_vector().iter()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn geodesic_endpoints_are_exact(p in simplex(5), q in simplex(5), ai in 0usize..FINITE_ALPHAS.len()) {
        let alpha = Alpha::new(FINITE_ALPHAS[ai]).unwrap();
        let at_one = alpha_geodesic(&p, &q, alpha, 1.0).unwrap();
        let at_zero = alpha_geodesic(&p, &q, alpha, 0.0).unwrap();
        prop_assert_eq!(at_one.as_vector(), p.as_vector());
        prop_assert_eq!(at_zero.as_vector(), q.as_vector());
        let mid = alpha_geodesic(&p, &q, alpha, 0.37).unwrap();
        prop_assert!(mid.as_vector().iter().all(|&x| x > 0.0));
    }

    #[test]
    fn log_map_vanishes_at_the_base_point(p in simplex(7), ai in 0usize..FINITE_ALPHAS.len()) {
        let alpha = Alpha::new(FINITE_ALPHAS[ai]).unwrap();
        let v = alpha_log_map(&p, &p, alpha).unwrap();
        prop_assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn pushforward_preserves_the_inner_product(
        p in simplex(8),
        (a, b) in centered_pair(8),
        ai in 0usize..FINITE_ALPHAS.len(),
    ) {
        let alpha = Alpha::new(FINITE_ALPHAS[ai]).unwrap();
        let pv = p.as_vector();
        let mixture = kahan_sum((0..8).map(|i| a[i] * b[i] / pv[i]));
        let ha = pushforward(&p, &a, alpha).unwrap();
        let hb = pushforward(&p, &b, alpha).unwrap();
        let av = FINITE_ALPHAS[ai];
        let spherical = kahan_sum((0..8).map(|i| ha[i] * hb[i] * pv[i].powf(av)));
        prop_assert!((mixture - spherical).abs() <= 1e-10 * mixture.abs().max(1.0));
    }

    #[test]
    fn stable_coefficients_stay_collinear_below_one(
        pw in simplex(6),
        pr in simplex(6),
        t in 0u8..12,
    ) {
        let alpha = Alpha::new(-5.0 + 0.5 * t as f64).unwrap();
        let exact = alpha_coefficients(&pw, &pr, alpha).unwrap();
        let stable = alpha_coefficients_stable(&pw, &pr, alpha).unwrap();
        let (ne, ns) = (exact.norm(), stable.norm());
        prop_assume!(ne > 1e-12 && ns > 1e-12);
        let cosine = exact.dot(&stable) / (ne * ns);
        prop_assert!(cosine >= 1.0 - 1e-8, "cosine {cosine} at alpha {}", alpha.value());
    }

    #[test]
    fn conditionals_are_distributions(m in model(6, 2), w in 0usize..6) {
        for mode in [ShiftMode::U, ShiftMode::UPlusV] {
            let p = conditional_with_mode(&m, w, mode).unwrap();
            let sum = kahan_sum(p.as_vector().iter().copied());
            prop_assert!((sum - 1.0).abs() <= 1e-12);
            prop_assert!(p.as_vector().iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn matched_cosines_are_symmetric_bounded_and_scale_free(
        m in model(5, 2),
        ai in 0usize..FINITE_ALPHAS.len(),
        scale in 0.1f64..50.0,
        a in 0usize..5,
        b in 0usize..5,
    ) {
        let reference = reference_measure(&m, ReferenceKind::Uniform0, ShiftMode::U, None).unwrap();
        let alpha = Alpha::new(FINITE_ALPHAS[ai]).unwrap();
        let set = embed_all(&m, &reference, alpha, None).unwrap();
        let solver = FisherSolver::new(&set.fisher).unwrap();
        let mut scaled = set.clone();
        scaled.w *= scale;
        for name in ["E-0-NI-PI", "E-0-NF-PF"] {
            let method: SimilarityMethod = name.parse().unwrap();
            let s = alpha_cosine_with_solver(a, b, &set, &method, Some(&solver)).unwrap();
            let s_rev = alpha_cosine_with_solver(b, a, &set, &method, Some(&solver)).unwrap();
            let s_scaled = alpha_cosine_with_solver(a, b, &scaled, &method, Some(&solver)).unwrap();
            prop_assert_eq!(s, s_rev);
            prop_assert!(s.abs() <= 1.0 + 1e-12);
            prop_assert!((s - s_scaled).abs() <= 1e-12);
        }
    }

    #[test]
    fn kappa_is_swap_symmetric_and_nonnegative(
        m in model(6, 2),
        quad in prop::array::uniform4(0usize..6),
    ) {
        let reference = reference_measure(&m, ReferenceKind::Uniform0, ShiftMode::U, None).unwrap();
        let set = embed_all(&m, &reference, Alpha::ZERO, None).unwrap();
        let solver = FisherSolver::new(&set.fisher).unwrap();
        let [a, b, c, d] = quad;
        let k1 = analogy_kappa(&set, &solver, a, b, c, d);
        let k2 = analogy_kappa(&set, &solver, b, a, d, c);
        prop_assert!(k1 >= 0.0);
        prop_assert!((k1 - k2).abs() <= 1e-12 * k1.max(1.0));
    }

    #[test]
    fn spearman_ignores_monotone_transforms(
        x in prop::collection::vec(-100.0f64..100.0, 5..25),
        y_seed in prop::collection::vec(-100.0f64..100.0, 25),
    ) {
        let y = &y_seed[..x.len()];
        let base = match spearman(&x, y) {
            Ok(r) => r,
            Err(_) => return Ok(()),
        };
        prop_assert!(base.abs() <= 1.0 + 1e-12);
        let ex: Vec<f64> = x.iter().map(|v| (v / 50.0).exp()).collect();
        let cy: Vec<f64> = y.iter().map(|v| 3.0 * v + 11.0).collect();
        prop_assert_eq!(spearman(&ex, &cy).unwrap(), base);
    }

    #[test]
    fn batch_embeddings_match_single_words(m in model(5, 2), ai in 0usize..FINITE_ALPHAS.len()) {
        let reference = reference_measure(&m, ReferenceKind::Uniform0, ShiftMode::U, None).unwrap();
        let alpha = Alpha::new(FINITE_ALPHAS[ai]).unwrap();
        let set = embed_all(&m, &reference, alpha, None).unwrap();
        for w in 0..5 {
            let single = alpha_embeddings::alpha::alpha_embedding(
                &m,
                w,
                &reference,
                alpha,
                alpha_embeddings::alpha::default_stable(alpha),
            )
            .unwrap();
            prop_assert_eq!(set.w.row(w).transpose(), single);
        }
    }
}
