mod common;

use common::*;
use dirac_core::pipeline::analyze_system;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bracket_is_antisymmetric(f in expr(), g in expr()) {
        check_antisymmetry(&f, &g)?;
    }

    #[test]
    fn bracket_is_a_derivation(f in expr(), g in expr(), h in expr()) {
        check_leibniz(&f, &g, &h)?;
    }

    #[test]
    fn jacobi_identity_holds_numerically(f in expr(), g in expr(), h in expr(), pt in point()) {
        check_jacobi(&f, &g, &h, &pt)?;
    }

    #[test]
    fn derivative_matches_finite_difference(f in expr(), pt in point(), var in 0usize..4) {
        check_derivative(&f, &pt, var)?;
    }

    #[test]
    fn canonical_form_survives_printing(f in expr()) {
        check_print_parse(&f)?;
    }

    #[test]
    fn addition_and_product_commute(f in expr(), g in expr()) {
        prop_assert_eq!(&f + &g, &g + &f);
        prop_assert_eq!(&f * &g, &g * &f);
        prop_assert!((&f - &f).is_zero());
    }

    #[test]
    fn evaluation_is_a_ring_homomorphism(f in expr(), g in expr(), pt in point()) {
        let (a, b) = (f.evaluate(&pt).unwrap(), g.evaluate(&pt).unwrap());
        let prod = (&f * &g).evaluate(&pt).unwrap();
        prop_assert!((prod - a * b).abs() <= 1e-12 * (1.0 + (a * b).abs()));
        let sum = (&f + &g).evaluate(&pt).unwrap();
        prop_assert!((sum - a - b).abs() <= 1e-12 * (1.0 + a.abs() + b.abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The second-class constraints are Casimirs of the Dirac bracket.
    #[test]
    fn dirac_bracket_annihilates_second_class(f in expr(), a in 1i64..5) {
        let sys = system_a().with_gauge(e(&format!("y - {a}*x")));
        let analysis = analyze_system(sys, None).unwrap();
        let red = analysis.reduced.unwrap();
        for chi in &red.second_class {
            let db = red.bracket.bracket(chi, &f).unwrap();
            prop_assert!(db.is_zero(), "{{{chi}, f}}_D = {db}");
        }
        let g = e("x*p_x + p_y^2");
        let ab = red.bracket.bracket(&f, &g).unwrap() + red.bracket.bracket(&g, &f).unwrap();
        prop_assert!(ab.is_zero());
    }
}
