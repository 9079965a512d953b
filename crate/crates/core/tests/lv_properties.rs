use ppevo_core::lv::*;
use proptest::prelude::*;

fn predator() -> impl Strategy<Value = PredatorTrait> {
    (0.2f64..5.0, 0.02f64..2.0).prop_map(|(a, d)| PredatorTrait::new(a, d).unwrap())
}

fn prey() -> impl Strategy<Value = PreyTrait> {
    (0.2f64..4.0, 1.05f64..6.0).prop_map(|(a, b)| PreyTrait::new(a, b))
}

fn params() -> impl Strategy<Value = SystemParams> {
    (1.05f64..5.0).prop_map(|b| SystemParams::new(b, 1.0).unwrap())
}

fn residual(sys: &LvSystem, x: &[f64]) -> f64 {
    let mut f = vec![0.0; x.len()];
    sys.rhs(x, &mut f);
    f.iter().fold(0.0, |m, v| m.max(v.abs()))
}

proptest! {
    #[test]
    fn predator_equilibrium_is_a_fixed_point(
        mut preds in prop::collection::vec(predator(), 1..6),
        p in params(),
    ) {
        sort_by_ratio(&mut preds);
        let eq = attracting_equilibrium(&preds, p);
        let sys = LvSystem::one_prey(&preds, p);
        prop_assert!(residual(&sys, &eq.to_state()) < 1e-12);
    }

    #[test]
    fn coexisting_prefix_has_positive_densities(
        preds in prop::collection::vec(predator(), 1..6),
        p in params(),
    ) {
        let set = coexisting_set(&preds, p);
        let eq = predator_equilibrium(&set, p).unwrap();
        prop_assert!(eq.prey[0] > 0.0);
        prop_assert!(eq.predators.iter().all(|&s| s > 0.0));
    }

    #[test]
    fn prey_equilibrium_is_a_fixed_point(
        ys in prop::collection::vec(prey(), 1..3),
        delta in 0.1f64..2.0,
    ) {
        if let Ok(eq) = saturated_equilibrium(&ys, delta) {
            let sys = LvSystem::one_predator(&ys, delta);
            prop_assert!(residual(&sys, &eq.to_state()) < 1e-12);
        }
    }

    #[test]
    fn resident_is_neutral_and_curves_meet(y in prey(), delta in 0.1f64..2.0) {
        prop_assert_eq!(invasion_fitness(y, y, delta).unwrap(), 0.0);
        if let Ok((g, h)) = invadability_curves(y, y.alpha, delta) {
            prop_assert!((g - y.beta).abs() < 1e-12 * y.beta.max(1.0));
            prop_assert!((h - y.beta).abs() < 1e-12 * y.beta.max(1.0));
        }
    }

    #[test]
    fn three_prey_never_coexist(
        a in prey(), b in prey(), c in prey(),
        delta in 0.1f64..2.0,
    ) {
        match classify_prey_outcome(&[a, b], c, delta) {
            Ok(out) => prop_assert!(out.prey.len() <= 2),
            Err(ppevo_core::Error::DegenerateTie) | Err(ppevo_core::Error::NotViable) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn fixed_delta_check_is_the_last_prefix_condition(
        mut alphas in prop::collection::vec(0.3f64..8.0, 1..8),
        p in params(),
    ) {
        alphas.sort_by(|x, y| y.total_cmp(x));
        alphas.dedup();
        let mut preds: Vec<PredatorTrait> =
            alphas.iter().map(|&a| PredatorTrait::new(a, 1.0).unwrap()).collect();
        sort_by_ratio(&mut preds);
        let cond = prefix_condition(&preds, p);
        prop_assert_eq!(check_fixed_delta(&alphas, p), *cond.last().unwrap());
    }

    #[test]
    fn fixed_alpha_check_is_the_last_prefix_condition(
        mut xs in prop::collection::vec(-1.0f64..6.0, 1..8),
        p in params(),
    ) {
        xs.sort_by(|x, y| y.total_cmp(x));
        xs.dedup();
        let mut preds: Vec<PredatorTrait> =
            xs.iter().map(|&x| PredatorTrait::new(1.0, (-x).exp()).unwrap()).collect();
        sort_by_ratio(&mut preds);
        let cond = prefix_condition(&preds, p);
        let direct = check_fixed_alpha(&xs, p);
        // both sides are the same inequality rearranged; allow disagreement
        // only when it is within rounding of equality
        if direct != *cond.last().unwrap() {
            let last = *xs.last().unwrap();
            let lhs: f64 = (-last).exp()
                * (p.beta() + xs.iter().map(|&x| 1.0 - (-(x - last)).exp()).sum::<f64>());
            prop_assert!((lhs - p.r()).abs() < 1e-12, "{lhs} vs {}", p.r());
        }
    }
}
