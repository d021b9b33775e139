use anfis_core::data::{generate_synthetic, planted_teacher};
use anfis_core::{train, Dataset, SchemaSpec, Teacher, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn small_config(seed: u64) -> TrainConfig {
    let mut c = TrainConfig {
        n_clusters: 3,
        seed,
        ..TrainConfig::default()
    };
    c.pso.iterations = 25;
    c.pso.n_particles = 20;
    c
}

/// Two tight, far-apart blobs, each labelled by its own plane.
fn piecewise_planes(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.3).unwrap();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for k in 0..60 {
        let (c, sign) = if k % 2 == 0 { (-5.0, 1.0) } else { (5.0, -1.0) };
        let r = vec![c + noise.sample(&mut rng), c + noise.sample(&mut rng)];
        y.push(if sign > 0.0 {
            2.0 * r[0] - r[1] + 1.0
        } else {
            -r[0] + 3.0 * r[1] - 2.0
        });
        x.push(r);
    }
    Dataset::new(vec!["a".into(), "b".into()], "y".into(), x, y).unwrap()
}

fn planted(seed: u64, rows: usize) -> Dataset {
    let schema = SchemaSpec::default();
    let teacher = planted_teacher(&schema, 4, seed).unwrap();
    generate_synthetic(&schema, rows, &Teacher::Model(teacher), 0.0, seed + 1).unwrap()
}

#[test]
fn recovers_piecewise_linear_teacher() {
    let mut c = small_config(0);
    c.n_clusters = 2;
    let report = train(&piecewise_planes(4), &c).unwrap();
    assert!(report.train.metrics.rmse < 1e-6, "{}", report.train.metrics.rmse);
    assert!(report.test.metrics.rmse < 1e-6, "{}", report.test.metrics.rmse);
}

#[test]
fn single_iteration_history() {
    let mut c = small_config(1);
    c.pso.iterations = 1;
    let report = train(&planted(1, 40), &c).unwrap();
    assert_eq!(report.rmse_history, vec![(1, report.rmse_history[0].1)]);
}

#[test]
fn training_is_deterministic() {
    let data = planted(2, 50);
    let a = train(&data, &small_config(7)).unwrap();
    let b = train(&data, &small_config(7)).unwrap();
    assert_eq!(a.model, b.model);
    assert_eq!(a.rmse_history, b.rmse_history);
    assert_eq!(a.train, b.train);
    assert_eq!(a.test, b.test);
}

#[test]
fn split_partitions_rows() {
    let data = planted(3, 41);
    let report = train(&data, &small_config(3)).unwrap();
    assert_eq!(report.train.indices.len(), 31);
    assert_eq!(report.test.indices.len(), 10);
    let mut all: Vec<usize> = report.train.indices.iter().chain(&report.test.indices).copied().collect();
    all.sort_unstable();
    assert_eq!(all, (0..41).collect::<Vec<_>>());
    for (i, a) in report.test.indices.iter().zip(&report.test.actual) {
        assert_eq!(data.y[*i], *a);
    }
}

#[test]
fn never_worse_than_clustered_start() {
    for seed in 0..6 {
        let report = train(&planted(seed, 60), &small_config(seed)).unwrap();
        assert!(report.train.metrics.rmse <= report.initial_rmse);
        let last = report.rmse_history.last().unwrap().1;
        assert!((last - report.train.metrics.rmse).abs() <= 1e-9 * report.initial_rmse.max(1.0));
    }
}

#[test]
fn normalization_comes_from_training_rows() {
    let data = planted(5, 48);
    let report = train(&data, &small_config(5)).unwrap();
    let train_rows = data.subset(&report.train.indices);
    let norm = report.model.normalization();
    for j in 0..data.n_features() {
        let z: Vec<f64> = train_rows.x.iter().map(|r| norm.inputs[j].apply(r[j])).collect();
        let mean = z.iter().sum::<f64>() / z.len() as f64;
        let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / z.len() as f64;
        assert!(mean.abs() < 1e-12);
        assert!((var.sqrt() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn rejects_too_few_rows_for_clusters() {
    let mut c = small_config(0);
    c.n_clusters = 40;
    assert!(train(&planted(0, 30), &c).is_err());
}
