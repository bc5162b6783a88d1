use proptest::prelude::*;

use scorebayes_core::numerics::{linspace, trapezoid};
use scorebayes_core::priors::{transform_prior, tsallis_regression_variances, vmf_godambe, vmf_reference_prior, PriorSpec, TabulatedPrior};
use scorebayes_core::scoring::{CoordTransform, ParamTransform};

proptest! {
    #[test]
    fn tabulated_prior_has_unit_mass(logs in proptest::collection::vec(-30.0f64..30.0, 3..60)) {
        let nodes = linspace(-2.0, 5.0, logs.len());
        let t = TabulatedPrior::new(nodes.clone(), logs, vec![0.0; nodes.len()]).unwrap();
        let vals: Vec<f64> = t.log_values().iter().map(|v| v.exp()).collect();
        prop_assert!((trapezoid(&nodes, &vals) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vmf_prior_bounded_and_below_fisher(kappa in 1e-6f64..500.0) {
        let p = vmf_reference_prior(kappa).unwrap();
        prop_assert!(p > 0.0 && p <= 0.5f64.sqrt() + 1e-12);
        // the Hyvarinen estimator is never more efficient than the MLE
        let a1 = scorebayes_core::numerics::bessel_ratio_a1(kappa).unwrap();
        let fisher = 1.0 - a1 / kappa - a1 * a1;
        prop_assert!(vmf_godambe(kappa).unwrap() <= fisher * (1.0 + 1e-9));
    }

    #[test]
    fn flat_prior_on_log_scale(psi in -20.0f64..20.0) {
        let on_psi = transform_prior(PriorSpec::Flat, ParamTransform::new(vec![CoordTransform::Exp { rate: 1.0 }]));
        prop_assert!((on_psi.log_density(&[psi]).unwrap() - psi).abs() < 1e-12);
    }

    #[test]
    fn tsallis_variances_grow_with_gamma(g in 1.0f64..3.0, dg in 0.01f64..1.0, s2 in 0.01f64..100.0) {
        let (vb1, _) = tsallis_regression_variances(g, s2);
        let (vb2, _) = tsallis_regression_variances(g + dg, s2);
        prop_assert!(vb2 > vb1);
        prop_assert!(vb1 >= s2 * (1.0 - 1e-12));
    }
}
