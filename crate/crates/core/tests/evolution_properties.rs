use ppevo_core::analysis::dispersion_test;
use ppevo_core::coupling::DpepInBrw;
use ppevo_core::evolution::*;
use ppevo_core::lv::*;
use ppevo_core::RngStream;
use proptest::prelude::*;

fn unit_params() -> SystemParams {
    SystemParams::from_growth_rate(1.0, 1.0).unwrap()
}

fn prey_log(seed: u64) -> Vec<EventRecord> {
    let mut ep = PreyEp::new(PreyTrait::new(2.0, 4.0), PreyEpConfig::new(0.05, 1.0)).unwrap();
    let mut rng = RngStream::new(seed, 0);
    let mut log = Vec::new();
    ep.run_until(100.0, &mut rng, Some(&mut log));
    log
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn equal_seeds_replay_identically(seed in any::<u64>()) {
        prop_assert_eq!(prey_log(seed), prey_log(seed));

        let run_apep = |s| {
            let mut a = Apep::new(3.0, ApepConfig { epsilon: 0.01, params: unit_params() }).unwrap();
            let mut rng = RngStream::new(s, 1);
            (0..500).map(|_| a.step(&mut rng)).collect::<Vec<_>>()
        };
        prop_assert_eq!(run_apep(seed), run_apep(seed));

        let run_dpep = |s| {
            let mut d = Dpep::new(2.5, DpepConfig::new(unit_params())).unwrap();
            let mut rng = RngStream::new(s, 2);
            (0..500).map(|_| d.step(&mut rng)).collect::<Vec<_>>()
        };
        prop_assert_eq!(run_dpep(seed), run_dpep(seed));

        let run_pred = |s| {
            let cfg = PredatorEpConfig::new(0.01, unit_params());
            let mut p = PredatorEp::new(PredatorTrait::new(3.0, 0.45).unwrap(), cfg).unwrap();
            let mut rng = RngStream::new(s, 3);
            (0..300).map(|_| p.step(&mut rng)).collect::<Vec<_>>()
        };
        prop_assert_eq!(run_pred(seed), run_pred(seed));
    }

    #[test]
    fn prey_pairs_carry_mutual_invasion_certificates(seed in any::<u64>(), eps in 0.01f64..0.1) {
        let mut ep = PreyEp::new(PreyTrait::new(2.0, 4.0), PreyEpConfig::new(eps, 1.0)).unwrap();
        let mut rng = RngStream::new(seed, 0);
        for _ in 0..400 {
            ep.step(&mut rng);
            let s = ep.state();
            prop_assert!(s.y1.is_some());
            if let (Some(a), Some(b)) = (s.y1, s.y2) {
                prop_assert!(invasion_fitness(a, b, 1.0).unwrap() > 0.0);
                prop_assert!(invasion_fitness(b, a, 1.0).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn prey_process_is_never_absorbed(seed in any::<u64>(), eps in 0.01f64..0.05) {
        let mut ep = PreyEp::new(PreyTrait::new(2.0, 4.0), PreyEpConfig::new(eps, 1.0)).unwrap();
        let mut rng = RngStream::new(seed, 0);
        ep.run_until(2.0 / eps, &mut rng, None);
        prop_assert!(!ep.is_absorbed());
    }

    #[test]
    fn canonical_path_stays_viable(alpha in 0.5f64..3.0, beta in 2.0f64..6.0, delta in 0.2f64..1.0) {
        let y0 = PreyTrait::new(alpha, beta);
        prop_assume!(is_viable(y0, delta));
        let path = canonical_ode(y0, delta, 3.0, 0.01).unwrap();
        for w in path.windows(2) {
            prop_assert!(is_viable(w[1].1, delta));
            prop_assert!(w[1].1.beta > w[0].1.beta);
        }
    }

    #[test]
    fn apep_condition_holds_after_every_step(seed in any::<u64>(), eps in 0.005f64..0.05) {
        let p = unit_params();
        let mut a = Apep::new(3.0, ApepConfig { epsilon: eps, params: p }).unwrap();
        let mut rng = RngStream::new(seed, 0);
        for _ in 0..1500 {
            a.step(&mut rng);
            prop_assert!(check_fixed_delta(a.alphas(), p));
            let min = a.alpha_min();
            prop_assert!(a.alphas().iter().all(|&x| x - min >= 0.0 && x - min < p.r()));
            prop_assert!(a.alphas().windows(2).all(|w| w[0] > w[1]));
        }
    }

    #[test]
    fn dpep_condition_holds_after_every_step(seed in any::<u64>(), x0 in 0.8f64..3.0) {
        let p = unit_params();
        let mut d = Dpep::new(x0, DpepConfig::new(p)).unwrap();
        let mut rng = RngStream::new(seed, 0);
        for _ in 0..3000 {
            d.step(&mut rng);
            prop_assert!(d.check());
            prop_assert_eq!(d.x_max(), d.xs()[0]);
            prop_assert_eq!(d.x_min(), *d.xs().last().unwrap());
        }
    }

    #[test]
    fn predator_set_is_its_own_coexisting_prefix(seed in any::<u64>()) {
        let p = unit_params();
        let cfg = PredatorEpConfig::new(0.02, p);
        let mut ep = PredatorEp::new(PredatorTrait::new(3.0, 0.45).unwrap(), cfg).unwrap();
        let mut rng = RngStream::new(seed, 0);
        for _ in 0..500 {
            ep.step(&mut rng);
            prop_assert_eq!(coexisting_prefix(ep.predators(), p), ep.predators().len());
        }
    }

    #[test]
    fn dpep_particles_are_walk_particles(seed in any::<u64>()) {
        let d = Dpep::new(2.5, DpepConfig::new(unit_params())).unwrap();
        let mut c = DpepInBrw::new(d);
        let mut rng = RngStream::new(seed, 0);
        for i in 1..=8 {
            c.run_until(i as f64, &mut rng, 1_000_000).unwrap();
            prop_assert!(c.is_included());
        }
    }
}

#[test]
fn coexistence_events_look_poisson() {
    let eps = 0.01;
    let streams: Vec<Vec<f64>> = (0..200)
        .map(|s| {
            let mut ep =
                PreyEp::new(PreyTrait::new(2.0, 4.0), PreyEpConfig::new(eps, 1.0)).unwrap();
            let mut rng = RngStream::replicate(99, s);
            ep.run_until(2.0 / eps, &mut rng, None);
            ep.state().coexistence_event_times.iter().map(|t| t * eps).collect()
        })
        .collect();
    let d = dispersion_test(&streams, 2.0, 1).unwrap();
    assert!((0.8..=1.25).contains(&d.index), "{d:?}");
}
