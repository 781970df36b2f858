//! Property tests of the linear-model invariants: passivity, the all-pass
//! transfer function, agreement between the resolvent and product-form
//! evaluations, and the controllability/observability/stability
//! equivalence including engineered degeneracies.

use proptest::prelude::*;
use tavis::decompose::{co_subsystem, structural_decompose};
use tavis::linear::{
    build_linear_model, is_controllable, is_hurwitz, is_observable, passivity_residual,
    transfer_function, transfer_product_form,
};
use tavis::{C64, SystemParams};

/// Parameter sets with detunings snapped to a coarse lattice so exact
/// degeneracies (shared detunings, which create dark states when couplings
/// are nonzero, or zero couplings) occur with high probability.
fn lattice_params() -> impl Strategy<Value = SystemParams> {
    (1usize..=5)
        .prop_flat_map(|n| {
            let omega = prop::collection::vec(-128i32..=128, n);
            let gamma = prop::collection::vec(prop_oneof![Just(0.0), 0.05f64..2.0], n);
            (Just(n), omega, -128i32..=128, gamma, 0.1f64..3.0)
        })
        .prop_map(|(n, omega, omega_r, gamma, kappa)| {
            let omega: Vec<f64> = omega.into_iter().map(|w| w as f64 / 64.0).collect();
            SystemParams::new(n, omega_r as f64 / 64.0, omega, gamma, kappa).unwrap()
        })
}

fn smooth_params() -> impl Strategy<Value = SystemParams> {
    (1usize..=6)
        .prop_flat_map(|n| {
            let omega = prop::collection::vec(-2.0f64..2.0, n);
            let gamma = prop::collection::vec(0.05f64..2.0, n);
            (Just(n), omega, -2.0f64..2.0, gamma, 0.1f64..3.0)
        })
        .prop_map(|(n, omega, omega_r, gamma, kappa)| {
            SystemParams::new(n, omega_r, omega, gamma, kappa).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn models_are_passive_and_all_pass(params in smooth_params(), w in -10.0f64..10.0) {
        let model = build_linear_model(&params).unwrap();
        prop_assert!(passivity_residual(&model) < 1e-14);
        let eval = transfer_function(&model, C64::new(0.0, w)).unwrap();
        prop_assert!((eval.g_value.norm() - 1.0).abs() < 1e-9,
            "|G| = {} at w = {w}", eval.g_value.norm());
    }

    #[test]
    fn product_form_equals_the_resolvent(params in lattice_params(), w in -10.0f64..10.0) {
        // The resolvent is singular exactly at dark-state frequencies; the
        // product form must agree everywhere the resolvent exists.
        let model = build_linear_model(&params).unwrap();
        let s = C64::new(0.0, w);
        if let Ok(direct) = transfer_function(&model, s) {
            let product = transfer_product_form(&params, s).unwrap();
            prop_assert!((direct.g_value - product.g_value).norm() < 1e-8,
                "resolvent {} vs product {}", direct.g_value, product.g_value);
        }
    }

    #[test]
    fn controllability_observability_stability_coincide(params in lattice_params()) {
        let model = build_linear_model(&params).unwrap();
        let c = is_controllable(&model).is_full();
        let o = is_observable(&model).is_full();
        let h = is_hurwitz(&model);
        prop_assert_eq!(c, o, "controllable {} but observable {}", c, o);
        prop_assert_eq!(c, h, "controllable {} but hurwitz {}", c, h);
    }

    #[test]
    fn decomposition_is_orthogonal_and_preserves_the_transfer(params in lattice_params()) {
        let decomp = structural_decompose(&params).unwrap();
        let t = &decomp.transform;
        let gram = t.transpose() * t;
        let dim = t.nrows();
        for i in 0..dim {
            for j in 0..dim {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((gram[(i, j)] - want).abs() < 1e-13);
            }
        }
        // The reduced model keeps the input-output behaviour.
        let co = co_subsystem(&decomp, &params).unwrap();
        let s = C64::new(0.0, 0.37);
        if let Ok(full) = transfer_function(&build_linear_model(&params).unwrap(), s) {
            let reduced = transfer_function(&co, s).unwrap();
            prop_assert!((full.g_value - reduced.g_value).norm() < 1e-8);
        }
    }
}
