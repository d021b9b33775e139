use anfis_core::lsq::{assemble_design, solve_consequents};
use anfis_core::{AnfisModel, GaussianMF, Rule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn premises(rng: &mut ChaCha8Rng, n_rules: usize, n_inputs: usize) -> AnfisModel {
    let rules = (0..n_rules)
        .map(|_| {
            let p = (0..n_inputs)
                .map(|_| GaussianMF::new(rng.random_range(-1.5..1.5), rng.random_range(0.6..1.5)).unwrap())
                .collect();
            Rule::with_zero_consequent(p).unwrap()
        })
        .collect();
    AnfisModel::new(rules).unwrap()
}

fn rows(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| (0..n).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(design: &anfis_core::DesignMatrix, theta: &[f64], y: &[f64]) -> f64 {
    let fit = design.apply(theta).unwrap();
    norm(&fit.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>())
}

#[test]
fn design_times_theta_is_forward_pass() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let model = premises(&mut rng, 3, 2);
    let theta: Vec<f64> = (0..9).map(|_| rng.random_range(-2.0..2.0)).collect();
    let model = model.with_consequents(&theta).unwrap();
    let x = rows(&mut rng, 25, 2);
    let design = assemble_design(&model, &x).unwrap();
    let via_design = design.apply(&theta).unwrap();
    let direct = model.evaluate_batch(&x).unwrap();
    for (a, b) in via_design.iter().zip(&direct) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn recovers_planted_consequents() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let model = premises(&mut rng, 2, 2);
        let truth: Vec<f64> = (0..6).map(|_| rng.random_range(-3.0..3.0)).collect();
        let x = rows(&mut rng, 60, 2);
        let design = assemble_design(&model, &x).unwrap();
        let y = design.apply(&truth).unwrap();
        let sol = solve_consequents(&design, &y).unwrap();
        assert!(!sol.rank_deficient);
        let err: Vec<f64> = sol.theta.iter().zip(&truth).map(|(a, b)| a - b).collect();
        assert!(norm(&err) <= 1e-8 * norm(&truth), "{:?} vs {:?}", sol.theta, truth);
    }
}

#[test]
fn residual_is_locally_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let model = premises(&mut rng, 3, 2);
    let x = rows(&mut rng, 40, 2);
    let design = assemble_design(&model, &x).unwrap();
    let y: Vec<f64> = x.iter().map(|r| (r[0] * 1.7).sin() + r[1] * r[1]).collect();
    let theta = solve_consequents(&design, &y).unwrap().theta;
    let best = residual(&design, &theta, &y);
    for _ in 0..1000 {
        let scale = 10f64.powf(rng.random_range(-6.0..0.0));
        let moved: Vec<f64> = theta.iter().map(|t| t + scale * rng.random_range(-1.0..1.0)).collect();
        assert!(residual(&design, &moved, &y) >= best - 1e-10);
    }
}

#[test]
fn interpolates_column_space_targets() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // underdetermined: 4 rules x 3 = 12 unknowns, 9 samples
    let model = premises(&mut rng, 4, 2);
    let x = rows(&mut rng, 9, 2);
    let design = assemble_design(&model, &x).unwrap();
    let y: Vec<f64> = (0..9).map(|_| rng.random_range(-1.0..1.0)).collect();
    let sol = solve_consequents(&design, &y).unwrap();
    assert!(residual(&design, &sol.theta, &y) <= 1e-8 * norm(&y));
    let zero_resid = norm(&y);
    assert!(residual(&design, &sol.theta, &y) <= zero_resid);
}

#[test]
fn solve_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let model = premises(&mut rng, 3, 3);
    let x = rows(&mut rng, 30, 3);
    let design = assemble_design(&model, &x).unwrap();
    let y: Vec<f64> = x.iter().map(|r| r.iter().sum::<f64>().cos()).collect();
    let a = solve_consequents(&design, &y).unwrap();
    let b = solve_consequents(&design, &y).unwrap();
    let bits = |v: &[f64]| v.iter().map(|t| t.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.theta), bits(&b.theta));
}
