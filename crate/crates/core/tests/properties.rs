//! Property-based checks on the algebraic layer.

use proptest::prelude::*;
use qgalerkin::controls::ControlLaw;
use qgalerkin::spectral::{
    build_planar_even, build_planar_odd, energy_growth_bound, galerkin_error_bound,
    planar_even_model, planar_odd_model, truncation_tail_bound,
};

proptest! {
    #[test]
    fn registry_couplings_are_skew_adjoint(n in 2usize..40, seed in 0u64..1000) {
        let j = (seed as usize % n) + 1;
        let k = ((seed as usize / n) % n) + 1;
        for model in [planar_odd_model(), planar_even_model()] {
            let b_jk = model.coupling(j, k);
            let b_kj = model.coupling(k, j);
            prop_assert!((b_kj + b_jk.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn efficiency_never_exceeds_one(
        values in prop::collection::vec(-3.0f64..3.0, 2..24),
        omega_scale in 0.0f64..12.0,
    ) {
        let Ok(u) = ControlLaw::sampled(values, 2.0, 1) else { return Ok(()) };
        let Ok(l1) = u.l1_over_period() else { return Ok(()) };
        prop_assume!(l1 > 1e-9);
        let c = u.fourier_coefficient(omega_scale).unwrap().norm();
        prop_assert!(c <= l1 * (1.0 + 1e-9), "{c} > {l1}");
    }

    #[test]
    fn bounds_monotone_in_k_and_h0(
        c in 0.1f64..3.0,
        k1 in 0.0f64..4.0,
        dk in 0.01f64..2.0,
        h0 in 0.1f64..5.0,
        lambda in 4.0f64..1e6,
    ) {
        let k2 = k1 + dk;
        prop_assert!(
            energy_growth_bound(c, k1, h0).unwrap()
                <= energy_growth_bound(c, k2, h0).unwrap()
        );
        prop_assert!(
            energy_growth_bound(c, k1, h0).unwrap()
                <= energy_growth_bound(c, k1, h0 * 2.0).unwrap()
        );
        prop_assert!(
            truncation_tail_bound(c, k1, lambda, h0).unwrap()
                <= truncation_tail_bound(c, k2, lambda, h0).unwrap()
        );
        // tail bounds shrink as the cutoff eigenvalue grows
        prop_assert!(
            truncation_tail_bound(c, k1, lambda * 4.0, h0).unwrap()
                <= truncation_tail_bound(c, k1, lambda, h0).unwrap()
        );
        prop_assert!(
            galerkin_error_bound(c, k1, lambda, 1.0, h0).unwrap()
                <= galerkin_error_bound(c, k2, lambda, 1.0, h0).unwrap()
        );
    }

    #[test]
    fn galerkin_compression_matches_model(n in 2usize..30) {
        let odd = build_planar_odd(n).unwrap();
        let even = build_planar_even(n).unwrap();
        for k in 1..=n {
            prop_assert_eq!(odd.eigenvalue(k), (k * k) as f64);
            prop_assert_eq!(even.eigenvalue(k), ((k - 1) * (k - 1)) as f64);
        }
        for j in 1..=n {
            for k in 1..=n {
                prop_assert_eq!(odd.coupling(j, k), planar_odd_model().coupling(j, k));
            }
        }
    }
}
