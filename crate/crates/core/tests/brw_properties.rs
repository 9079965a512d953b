use ppevo_core::brw::*;
use ppevo_core::coupling::{DpepOverToy, KilledInBrw};
use ppevo_core::evolution::{Dpep, DpepConfig};
use ppevo_core::lv::SystemParams;
use ppevo_core::RngStream;
use proptest::prelude::*;

proptest! {
    #[test]
    fn lambda_is_concave(x1 in 0.001f64..0.999, x2 in 0.001f64..0.999, w in 0.0f64..1.0) {
        let mid = lambda(w * x1 + (1.0 - w) * x2).unwrap();
        let chord = w * lambda(x1).unwrap() + (1.0 - w) * lambda(x2).unwrap();
        prop_assert!(mid >= chord - 1e-9);
    }

    #[test]
    fn lambda_is_strictly_decreasing(x in 0.0f64..0.99, dx in 1e-4f64..0.01) {
        prop_assert!(lambda(x + dx).unwrap() < lambda(x).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn births_never_move_particles(seed in any::<u64>()) {
        let mut rng = RngStream::new(seed, 0);
        let mut walk = BranchingRandomWalk::new(&[0.0], BrwConfig::default());
        for i in 1..=12 {
            let before = walk.positions().to_vec();
            walk.run_until(i as f64 * 0.5, &mut rng).unwrap();
            prop_assert_eq!(&walk.positions()[..before.len()], &before[..]);
        }
    }

    #[test]
    fn killed_walk_respects_barrier_and_counts(
        seed in any::<u64>(),
        offset in 0.5f64..5.0,
        slope in 0.0f64..0.8,
    ) {
        let b = KillBoundary { offset, slope };
        let mut rng = RngStream::new(seed, 0);
        let mut walk = BranchingRandomWalk::new(
            &[0.0],
            BrwConfig { boundary: Some(b), budget: 200_000 },
        );
        for i in 1..=16 {
            let t = i as f64 * 0.5;
            walk.run_until(t, &mut rng).unwrap();
            prop_assert!(walk.positions().iter().all(|&x| x > b.position(walk.clock())));
            prop_assert_eq!(walk.len() as u64 + walk.kills(), 1 + walk.births());
        }
    }

    #[test]
    fn killed_counts_are_dominated(seed in any::<u64>(), offset in 0.5f64..5.0) {
        let b = KillBoundary { offset, slope: 0.3 };
        let mut c = KilledInBrw::new(0.0, b);
        let mut rng = RngStream::new(seed, 0);
        for i in 1..=14 {
            let t = i as f64 * 0.5;
            c.run_until(t, &mut rng);
            for x in [f64::NEG_INFINITY, 0.0, 0.4 * t] {
                let (all, killed) = c.counts_at_least(x);
                prop_assert!(killed <= all);
            }
        }
    }

    #[test]
    fn toy_keeps_m_particles(seed in any::<u64>(), m in 1usize..40) {
        let mut toy = ToyModel::at_origin(m).unwrap();
        let mut rng = RngStream::new(seed, 0);
        for _ in 0..2000 {
            toy.step(&mut rng);
            prop_assert_eq!(toy.m(), m);
            prop_assert!(toy.positions().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn dpep_dominates_the_toy(seed in any::<u64>(), m in 1usize..24) {
        let params = SystemParams::from_growth_rate(1.0, 1.0).unwrap();
        let mut d = Dpep::new(2.5, DpepConfig::new(params)).unwrap();
        let mut rng = RngStream::new(seed, 0);
        // wait until the m rightmost types can never be removed
        while d.len() < m || (-d.xs()[m - 1]).exp() * (params.beta() + m as f64) >= params.r() {
            d.step(&mut rng);
        }
        let mut c = DpepOverToy::start(d, m).unwrap();
        for _ in 0..5000 {
            c.step(&mut rng);
            prop_assert!(c.dpep().len() >= m);
            prop_assert!(c.dominates());
        }
    }
}

#[test]
fn speeds_solve_their_equations() {
    let a = solve_speed_a();
    let b = solve_speed_b();
    assert!((lambda(a).unwrap() + 1.0).abs() < 1e-10);
    assert!((lambda(b).unwrap() + 1.0 - b).abs() < 1e-10);
}

#[test]
fn extinction_falls_as_the_barrier_recedes() {
    let fraction = |k: f64| {
        killed_growth_exponent(0.3, 0.4, k, 6.0, 0.25, 0.3, 300, 17, 1_000_000)
            .unwrap()
            .extinction_fraction
    };
    let f: Vec<f64> = [0.5, 1.0, 3.0, 10.0].into_iter().map(fraction).collect();
    assert!(f.windows(2).all(|w| w[0] >= w[1]), "{f:?}");
    assert!(f[0] > f[3], "{f:?}");
}
