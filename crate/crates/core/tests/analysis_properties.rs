use ppevo_core::analysis::{scaling_regression, slope_estimate, SpacingProfile, TrajectorySample};
use proptest::prelude::*;

fn sample() -> impl Strategy<Value = TrajectorySample> {
    prop::collection::vec((0.01f64..1.0, -5.0f64..5.0), 15..60).prop_map(|steps| {
        let mut t = 0.0;
        let (times, values) = steps
            .into_iter()
            .map(|(dt, v)| {
                t += dt;
                (t, v + 0.7 * t)
            })
            .unzip();
        TrajectorySample::from_parts(times, values).unwrap()
    })
}

proptest! {
    #[test]
    fn slope_scales_with_values(s in sample(), c in -10.0f64..10.0) {
        let base = slope_estimate(&s, 0.0).unwrap();
        let scaled = slope_estimate(&s.map(|v| c * v), 0.0).unwrap();
        prop_assert!((scaled.slope - c * base.slope).abs() <= 1e-12 * (1.0 + (c * base.slope).abs()));
        prop_assert!((scaled.stderr - c.abs() * base.stderr).abs() <= 1e-10 * (1.0 + base.stderr));
    }

    #[test]
    fn estimators_are_pure(s in sample()) {
        prop_assert_eq!(slope_estimate(&s, 0.3), slope_estimate(&s, 0.3));
    }

    #[test]
    fn profile_masses_are_nonincreasing(
        alphas in prop::collection::vec(1.0f64..2.0, 2..200),
        eps in 0.001f64..0.1,
    ) {
        let p = SpacingProfile::from_attack_rates(&alphas, eps).unwrap();
        prop_assert!(p.masses.iter().all(|&m| m >= 0.0));
        prop_assert!(p.masses.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(p.abscissae.windows(2).all(|w| w[0] <= w[1]));
        let q = SpacingProfile::from_log_death_rates(&alphas).unwrap();
        prop_assert!(q.masses.iter().all(|&m| m >= 0.0));
        prop_assert!(q.masses.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn exact_power_laws_are_recovered(k in -2.0f64..2.0, c in 0.1f64..10.0) {
        let pairs: Vec<(f64, f64)> = [0.00125, 0.0025, 0.005, 0.01]
            .iter()
            .map(|&e: &f64| (e, c * e.powf(k)))
            .collect();
        let fit = scaling_regression(&pairs).unwrap();
        prop_assert!((fit.exponent - k).abs() < 1e-9);
    }
}
