use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use revdiss::linalg::rank;
use revdiss::model::ExternalCoupling;
use revdiss::spectra::set_distance;
use revdiss::{
    build_effective_matrix, build_full_matrix, build_ring_matrix, chirality, eig2_closed, eig_numeric, ring_s_closed,
    s14_closed, s21_closed, s41_closed, s_general, EffectiveParams, FourPort, FullParams, RingParams,
};

fn effective() -> impl Strategy<Value = EffectiveParams<f64>> {
    (0.1f64..20.0, 0.0f64..20.0, 0.0f64..2.0 * PI, 0.2f64..3.0, -5.0f64..5.0)
        .prop_map(|(g, j, theta, ki, w)| EffectiveParams::new(w, ki, ExternalCoupling::Critical, g, j, theta).unwrap())
}

fn ring() -> impl Strategy<Value = RingParams<f64>> {
    (0.5f64..60.0, 0.0f64..20.0, 0.0f64..20.0, 0.0f64..2.0 * PI)
        .prop_map(|(kappa, g, j, theta)| RingParams::new(0.0, kappa, g, j, theta).unwrap())
}

proptest! {
    #[test]
    fn spectrum_is_two_pi_periodic(p in effective()) {
        let shifted = p.with_theta(p.theta() + 2.0 * PI).unwrap();
        let d = set_distance(&eig2_closed(&p).eigenvalues, &eig2_closed(&shifted).eigenvalues);
        prop_assert!(d <= 1e-9 * (1.0 + p.g() + p.j()), "{d}");
    }

    // M(-θ) is the transpose of M(θ), so the spectrum is even in θ.
    #[test]
    fn spectrum_is_even_in_theta(p in effective()) {
        let mirrored = p.with_theta(-p.theta()).unwrap();
        let d = set_distance(&eig2_closed(&p).eigenvalues, &eig2_closed(&mirrored).eigenvalues);
        prop_assert!(d <= 1e-9 * (1.0 + p.g() + p.j()), "{d}");
    }

    #[test]
    fn numeric_spectrum_matches_closed_form(p in effective()) {
        let d = set_distance(&eig_numeric(&build_effective_matrix(&p)).unwrap().eigenvalues, &eig2_closed(&p).eigenvalues);
        prop_assert!(d <= 1e-8, "{d}");
    }

    #[test]
    fn general_solve_matches_closed_forms(p in effective(), delta in -200.0f64..200.0) {
        let four = FourPort::from_modes(&s_general(&build_effective_matrix(&p), p.omega() - delta).unwrap());
        prop_assert!((four.s21 - s21_closed(&p, delta)).norm() <= 1e-10);
        prop_assert!((four.s41 - s41_closed(&p, delta)).norm() <= 1e-10);
        prop_assert!((four.s14 - s14_closed(&p, delta)).norm() <= 1e-10);
    }

    #[test]
    fn eps_are_defective(g in 0.1f64..20.0, n in 1i64..6) {
        let theta = (2 * n - 1) as f64 * FRAC_PI_2;
        let p = EffectiveParams::critical(g, g, theta).unwrap();
        let m = build_effective_matrix(&p);
        let lambda = eig2_closed(&p).eigenvalues[0];
        prop_assert_eq!(rank(&m.matrix().shifted(lambda), 1e-10), 1);
    }

    #[test]
    fn ring_matrix_is_normal(p in ring()) {
        let m = build_ring_matrix(&p);
        let scale = (p.kappa() + p.g() + p.j()).powi(2);
        prop_assert!(m.matrix().normality_defect() <= 1e-13 * scale);
    }

    #[test]
    fn scattering_is_passive(p in effective(), delta in -100.0f64..100.0) {
        let s = s_general(&build_effective_matrix(&p), p.omega() - delta).unwrap();
        prop_assert!(s.max_singular_value().unwrap() <= 1.0 + 1e-9);
    }

    // The dissipative ring coupling has loss eigenvalues κ − 2J·cos(θ + 2πk/3);
    // with port rate κ the ring is passive once κ ≥ 4J.
    #[test]
    fn lossy_ring_is_passive(j in 0.0f64..20.0, extra in 0.0f64..40.0, g in 0.0f64..20.0, theta in 0.0f64..2.0 * PI, delta in -100.0f64..100.0) {
        let r = RingParams::new(0.0, 4.0 * j + extra + 0.1, g, j, theta).unwrap();
        let m = build_ring_matrix(&r);
        prop_assert!(m.is_passive());
        let s = s_general(&m, r.omega() - delta).unwrap();
        prop_assert!(s.max_singular_value().unwrap() <= 1.0 + 1e-9);
    }

    #[test]
    fn passive_ring_predicate_bounds_scattering(r in ring(), delta in -100.0f64..100.0) {
        let m = build_ring_matrix(&r);
        if m.is_passive() {
            let s = s_general(&m, r.omega() - delta).unwrap();
            prop_assert!(s.max_singular_value().unwrap() <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn full_model_scattering_is_passive(p in effective(), gamma_over_g in 1.0f64..100.0, delta in -100.0f64..100.0) {
        let full = FullParams::lift(&p, gamma_over_g * p.g()).unwrap();
        let m = build_full_matrix(&full, p.kappa()).unwrap();
        let s = s_general(&m, full.delta_a() - delta).unwrap();
        prop_assert!(s.max_singular_value().unwrap() <= 1.0 + 1e-9);
    }

    #[test]
    fn reciprocal_at_integer_multiples_of_pi(p in effective(), k in 0i32..4, delta in -200.0f64..200.0) {
        let q = p.with_theta(k as f64 * PI).unwrap();
        prop_assert!((s41_closed(&q, delta).norm() - s14_closed(&q, delta).norm()).abs() <= 1e-12);
    }

    #[test]
    fn chirality_flips_under_half_turn(g in 0.5f64..20.0, theta in 0.0f64..2.0 * PI, delta in -50.0f64..50.0) {
        let p = EffectiveParams::critical(g, g, theta).unwrap();
        let a = chirality(&p, delta).unwrap().alpha;
        let b = chirality(&p.with_theta(theta + PI).unwrap(), delta).unwrap().alpha;
        prop_assert!((a + b).abs() <= 1e-9, "{a} {b}");
    }

    #[test]
    fn ring_cyclic_equalities_are_exact(p in ring(), delta in -100.0f64..100.0) {
        if let Ok(rs) = ring_s_closed(&p, delta) {
            let s = &rs.smatrix;
            let a = |r, c| s.get(r, c).norm();
            prop_assert!(a(1, 0) == a(2, 1) && a(2, 1) == a(0, 2));
            prop_assert!(a(0, 1) == a(1, 2) && a(1, 2) == a(2, 0));
        }
    }
}

#[test]
fn closed_forms_agree_with_general_solve_on_ten_thousand_samples() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let p = EffectiveParams::new(
            rng.gen_range(-5.0..5.0),
            rng.gen_range(0.2..3.0),
            ExternalCoupling::Critical,
            rng.gen_range(0.1..20.0),
            rng.gen_range(0.0..20.0),
            rng.gen_range(0.0..2.0 * PI),
        )
        .unwrap();
        let delta = rng.gen_range(-200.0..200.0);
        let four = FourPort::from_modes(&s_general(&build_effective_matrix(&p), p.omega() - delta).unwrap());
        worst = worst
            .max((four.s21 - s21_closed(&p, delta)).norm())
            .max((four.s41 - s41_closed(&p, delta)).norm())
            .max((four.s14 - s14_closed(&p, delta)).norm());
    }
    assert!(worst <= 1e-10, "{worst}");
}
