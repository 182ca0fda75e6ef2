use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sgdlab_core::checkers::{
    a6_ratio, check_descent_inequality, check_variance_control, estimate_local_holder, find_eigenvalue_threshold,
    grid_holder_sup, lemma4_margin, probe_radial_conditions, RadialOptions, Verdict,
};
use sgdlab_core::engine::{ParameterVector, Schedule};
use sgdlab_core::objectives::{catalog_lookup, CatalogParams, Objective, CATALOG_NAMES};

/// Dense 1-D oracle for the Hölder constant of the Gaussian bump at φ = 3, r = 0.5,
/// computed once over 10⁶ grid points.
const GAUSS_BUMP_HOLDER_AT_3: f64 = 0.017_823_6;

#[test]
fn gauss_bump_holder_matches_dense_oracle() {
    let est = estimate_local_holder(&Objective::gauss_bump(1), &ParameterVector::new(vec![3.0]).unwrap(), 0.5, 1.0, 10_000).unwrap();
    assert!((est.value - GAUSS_BUMP_HOLDER_AT_3).abs() < 1e-4, "{}", est.value);
}

#[test]
fn rectifier_holder_approaches_quarter_with_dense_sampling() {
    let obj = Objective::smooth_rectifier(1);
    let phi = ParameterVector::new(vec![0.0]).unwrap();
    let dense = estimate_local_holder(&obj, &phi, 0.5, 1.0, 100_000).unwrap();
    assert!(dense.value <= 0.25 && dense.value > 0.2499, "{}", dense.value);
}

proptest! {
    #[test]
    fn holder_estimate_is_monotone_in_samples(
        which in 0usize..CATALOG_NAMES.len(),
        n in 2usize..200,
        extra in 1usize..200,
        r in 0.1f64..2.0,
        offset in 0.0f64..5.0,
    ) {
        let obj = catalog_lookup(CATALOG_NAMES[which], 2, CatalogParams::default()).unwrap();
        let phi = ParameterVector::new(vec![obj.r0 + r + offset, 0.3]).unwrap();
        let a = estimate_local_holder(&obj, &phi, r, 1.0, n).unwrap();
        let b = estimate_local_holder(&obj, &phi, r, 1.0, n + extra).unwrap();
        prop_assert!(b.value >= a.value);
    }

    #[test]
    fn quadratic_holder_is_exactly_one(phi in prop::collection::vec(-1e3f64..1e3, 1..4), r in 1e-3f64..1e2) {
        let obj = Objective::quadratic(phi.len());
        let est = estimate_local_holder(&obj, &ParameterVector::new(phi).unwrap(), r, 1.0, 50).unwrap();
        prop_assert_eq!(est.value, 1.0);
    }

    #[test]
    fn variance_control_is_unconditional(
        samples in prop::collection::vec(0.0f64..1e3, 1..100),
        alpha in 1e-6f64..=1.0,
    ) {
        prop_assert_eq!(check_variance_control(&samples, alpha).unwrap().verdict, Verdict::Pass);
    }

    #[test]
    fn radial_ratio_recomputes_from_record(rho0 in 2.5f64..50.0, growth in 1.5f64..10.0, scale in 0.0f64..3.0) {
        let obj = Objective::loglog1p_abs(1);
        let radii = [rho0, rho0 * growth, rho0 * growth * growth];
        let g = move |t: &[f64]| Ok(scale * t[0].abs());
        let p = probe_radial_conditions(&obj, g, 1.0, 1.0, &radii, 0.1, &RadialOptions::default()).unwrap();
        for rec in &p.records {
            let again = a6_ratio(rec.grad_norm_sq, rec.l_r, rec.g_value, p.alpha);
            prop_assert!((again - rec.ratio).abs() <= 1e-12 * rec.ratio.abs().max(1e-300));
        }
    }

    #[test]
    fn eigen_threshold_satisfies_the_descent_form(
        c in 0.05f64..3.0,
        beta in 0.3f64..1.2,
        big_c in 0.1f64..20.0,
        alpha in 0.1f64..=1.0,
        spread in 1.0f64..4.0,
    ) {
        let s = Schedule::diagonal_power(vec![c, c / spread], vec![beta, beta], 1.0).unwrap();
        if let Some(k) = find_eigenvalue_threshold(&s, big_c, alpha, 5_000).unwrap() {
            prop_assert!(lemma4_margin(&s, k, big_c, alpha) >= -1e-12);
            let hi = s.lambda_max(k);
            prop_assert!(hi.powf(alpha) * hi / s.lambda_min(k) <= 1.0 / big_c);
        }
    }
}

#[test]
fn descent_holds_with_doubled_grid_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for name in CATALOG_NAMES {
        let obj = catalog_lookup(name, 1, CatalogParams { q: Some(0.7), r0: Some(2.0) }).unwrap();
        let b = obj.default_box();
        let l = 2.0 * grid_holder_sup(&obj, &b, 1.0, 800).unwrap();
        let rep = check_descent_inequality(&obj, 2_000, l, 1.0, &b, &mut rng).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass, "{name}: {}", rep.worst_violation);
    }
}
