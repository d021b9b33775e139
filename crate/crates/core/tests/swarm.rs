use std::sync::Mutex;

use anfis_core::pso::{optimize, step, SwarmConfig, SwarmState};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn sphere_config(seed: u64) -> SwarmConfig {
    let mut c = SwarmConfig::new(vec![(-5.0, 5.0); 10]);
    c.inertia = 0.7;
    c.seed = seed;
    c
}

#[test]
fn sphere_converges_on_most_seeds() {
    let hits = (0..10)
        .filter(|&s| optimize(&sphere_config(s), sphere, None).unwrap().best_fitness < 1e-4)
        .count();
    assert!(hits >= 9, "{hits}/10 seeds converged");
}

#[test]
fn same_seed_same_trajectory() {
    let a = optimize(&sphere_config(3), sphere, None).unwrap();
    let mut serial = sphere_config(3);
    serial.parallel = false;
    let b = optimize(&serial, sphere, None).unwrap();
    assert_eq!(a, b);
}

#[test]
fn init_particle_bounds_the_result() {
    let mut c = sphere_config(11);
    c.iterations = 5;
    let start = vec![0.01; 10];
    let out = optimize(&c, sphere, Some(&start)).unwrap();
    assert!(out.best_fitness <= sphere(&start));
}

fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|v| v * v - 10.0 * (2.0 * std::f64::consts::PI * v).cos())
            .sum::<f64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn history_never_increases(seed in any::<u64>(), dim in 1usize..6) {
        let mut c = SwarmConfig::new(vec![(-4.0, 4.0); dim]);
        c.iterations = 60;
        c.n_particles = 15;
        c.seed = seed;
        let out = optimize(&c, rastrigin, None).unwrap();
        prop_assert_eq!(out.history.len(), 60);
        for w in out.history.windows(2) {
            prop_assert!(w[1].1 <= w[0].1);
        }
        prop_assert_eq!(out.history.last().unwrap().1, out.best_fitness);
    }

    #[test]
    fn every_evaluation_stays_in_box(seed in any::<u64>(), inertia in 0.0..1.2f64) {
        let bounds = vec![(-1.0, 2.0), (0.5, 0.75), (-10.0, -9.0)];
        let mut c = SwarmConfig::new(bounds.clone());
        c.inertia = inertia;
        c.iterations = 40;
        c.n_particles = 12;
        c.seed = seed;
        let seen = Mutex::new(Vec::new());
        let f = |x: &[f64]| {
            seen.lock().unwrap().push(x.to_vec());
            rastrigin(x)
        };
        optimize(&c, f, Some(&[100.0, -100.0, 0.0])).unwrap();
        let seen = seen.into_inner().unwrap();
        prop_assert_eq!(seen.len(), 12 * 41);
        for x in seen {
            for (v, (lo, hi)) in x.iter().zip(&bounds) {
                prop_assert!(v >= lo && v <= hi);
            }
        }
    }

    #[test]
    fn personal_bests_dominate(seed in any::<u64>()) {
        let mut c = SwarmConfig::new(vec![(-3.0, 3.0); 4]);
        c.n_particles = 10;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = SwarmState::initialize(&c, &rastrigin, None, &mut rng).unwrap();
        for _ in 0..30 {
            let before: Vec<f64> = state.particles.iter().map(|p| p.pbest_fitness).collect();
            step(&mut state, &c, &rastrigin, &mut rng);
            for (p, b) in state.particles.iter().zip(before) {
                prop_assert!(p.pbest_fitness <= b);
                prop_assert!(p.pbest_fitness <= p.fitness);
                prop_assert_eq!(p.pbest_fitness, rastrigin(&p.pbest_position));
                prop_assert!(state.gbest_fitness <= p.pbest_fitness);
                for (v, vm) in p.velocity.iter().zip(&c.v_max) {
                    prop_assert!(v.abs() <= *vm);
                }
            }
        }
    }
}
