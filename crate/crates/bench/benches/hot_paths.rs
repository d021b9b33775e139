use std::hint::black_box;

use anfis_core::data::{generate_synthetic, planted_teacher};
use anfis_core::lsq::{assemble_design, solve_consequents};
use anfis_core::pso::{step, SwarmConfig, SwarmState};
use anfis_core::trainer::{pack_parameters, PremiseFitness};
use anfis_core::{cluster, seed_model, Normalization, SchemaSpec, Teacher};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rows(n: usize, m: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..m)
        .map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect()
}

fn bench_evaluate(c: &mut Criterion) {
    let schema = SchemaSpec::default();
    let model = planted_teacher(&schema, 10, 1).unwrap();
    let data = generate_synthetic(&schema, 82, &Teacher::Model(model.clone()), 0.0, 2).unwrap();
    c.bench_function("evaluate_batch 10 rules x 6 inputs x 82 rows", |b| {
        b.iter(|| model.evaluate_batch(black_box(&data.x)).unwrap())
    });
}

fn bench_lsq(c: &mut Criterion) {
    let x = rows(6, 62, 3);
    let seeds = cluster(&x, 10, 4).unwrap();
    let model = seed_model(&seeds, 6).unwrap();
    let y: Vec<f64> = x.iter().map(|r| r.iter().sum::<f64>().sin()).collect();
    c.bench_function("assemble + solve 62 x 70", |b| {
        b.iter(|| {
            let d = assemble_design(&model, black_box(&x)).unwrap();
            solve_consequents(&d, &y).unwrap()
        })
    });
}

fn bench_fitness(c: &mut Criterion) {
    let x = rows(6, 62, 5);
    let y: Vec<f64> = x.iter().map(|r| r[0] * r[1] + r[2]).collect();
    let norm = Normalization::fit(&x, &y).unwrap();
    let scaled: Vec<Vec<f64>> = x.iter().map(|r| norm.scale_input(r)).collect();
    let template = seed_model(&cluster(&scaled, 10, 6).unwrap(), 6)
        .unwrap()
        .replace_normalization(norm)
        .unwrap();
    let params = pack_parameters(&template);
    let fitness = PremiseFitness::new(template, &x, &y, 0.0).unwrap();
    c.bench_function("premise fitness (120 params)", |b| {
        b.iter(|| fitness.rmse(black_box(&params)))
    });
}

fn bench_pso_step(c: &mut Criterion) {
    let sphere = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    let mut config = SwarmConfig::new(vec![(-5.0, 5.0); 120]);
    config.parallel = false;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let state = SwarmState::initialize(&config, &sphere, None, &mut rng).unwrap();
    c.bench_function("pso step 60 particles x 120 dims (sphere)", |b| {
        b.iter_batched(
            || (state.clone(), rng.clone()),
            |(mut s, mut r)| step(&mut s, &config, &sphere, &mut r),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_evaluate, bench_lsq, bench_fitness, bench_pso_step);
criterion_main!(benches);
