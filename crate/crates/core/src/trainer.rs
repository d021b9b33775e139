//! Hybrid training: k-means seeds the rule base, the swarm searches premise
//! parameters, and every candidate's consequents are fit by least squares.
//!
//! Everything inside the optimizer happens in z-score space computed from the
//! training split. Reported errors are in original target units.

use serde::{Deserialize, Serialize};

use crate::clustering::{self, SPREAD_FLOOR_FRACTION};
use crate::data::{split_indices, Dataset};
use crate::error::{AnfisError, Result};
use crate::fuzzy::{AnfisModel, GaussianMF, Normalization, Rule, WIDTH_FLOOR};
use crate::lsq::{assemble_design_scaled, solve_consequents_damped};
use crate::metrics::{self, Metrics};
use crate::pso::{self, PsoParams};

/// Parameters per Gaussian membership function (center, width).
pub const PARAMS_PER_MF: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub n_clusters: usize,
    pub split_fraction: f64,
    pub seed: u64,
    /// Half-width of the center search box, and upper end of the width box,
    /// in feature standard deviations.
    pub premise_bounds_scale: f64,
    /// Tikhonov damping for the consequent solve.
    pub ridge: f64,
    pub pso: PsoParams,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            n_clusters: 10,
            split_fraction: 0.75,
            seed: 0,
            premise_bounds_scale: 3.0,
            ridge: 0.0,
            pso: PsoParams::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_clusters == 0 {
            return Err(AnfisError::config("n_clusters", "must be at least 1"));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(AnfisError::config(
                "split_fraction",
                "must lie strictly between 0 and 1",
            ));
        }
        if !(self.premise_bounds_scale.is_finite() && self.premise_bounds_scale > SPREAD_FLOOR_FRACTION)
        {
            return Err(AnfisError::config(
                "premise_bounds_scale",
                format!("must be finite and > {SPREAD_FLOOR_FRACTION}"),
            ));
        }
        if !(self.ridge.is_finite() && self.ridge >= 0.0) {
            return Err(AnfisError::config("ridge", "must be finite and >= 0"));
        }
        self.pso.validate()
    }
}

/// Tunable-parameter count `clusters * variables * params-per-MF`, where the
/// variables are the inputs plus the output.
pub fn tunable_parameter_count(n_clusters: usize, n_inputs: usize) -> usize {
    n_clusters * (n_inputs + 1) * PARAMS_PER_MF
}

/// Length of the swarm's search vector: one center and one width per input
/// per rule.
pub fn premise_parameter_count(n_clusters: usize, n_inputs: usize) -> usize {
    n_clusters * n_inputs * PARAMS_PER_MF
}

/// Flatten premises rule-major as `[c_11, s_11, c_12, s_12, ...]`.
pub fn pack_parameters(model: &AnfisModel) -> Vec<f64> {
    model
        .rules()
        .iter()
        .flat_map(|r| r.premise().iter().flat_map(|mf| [mf.center(), mf.width()]))
        .collect()
}

/// Inverse of [`pack_parameters`]. Widths below [`WIDTH_FLOOR`] (including
/// negative ones) decode to the floor. Consequents and normalization come
/// from `template`.
pub fn unpack_parameters(params: &[f64], template: &AnfisModel) -> Result<AnfisModel> {
    let n = template.n_inputs();
    let expected = premise_parameter_count(template.n_rules(), n);
    if params.len() != expected {
        return Err(AnfisError::Shape {
            context: "premise vector",
            expected,
            found: params.len(),
        });
    }
    let rules = template
        .rules()
        .iter()
        .zip(params.chunks_exact(n * PARAMS_PER_MF))
        .map(|(rule, chunk)| {
            let premise = chunk
                .chunks_exact(PARAMS_PER_MF)
                .map(|cw| {
                    let width = if cw[1] > WIDTH_FLOOR { cw[1] } else { WIDTH_FLOOR };
                    GaussianMF::new(cw[0], width)
                })
                .collect::<Result<Vec<_>>>()?;
            Rule::new(premise, rule.consequent().to_vec())
        })
        .collect::<Result<Vec<_>>>()?;
    AnfisModel::with_normalization(rules, template.normalization().clone())
}

/// Training-split objective for the swarm.
///
/// Holds the training rows already scaled by the template's normalization so
/// each evaluation only rebuilds the design matrix and solves.
#[derive(Debug, Clone)]
pub struct PremiseFitness {
    template: AnfisModel,
    scaled_x: Vec<Vec<f64>>,
    scaled_y: Vec<f64>,
    ridge: f64,
}

impl PremiseFitness {
    /// `x` and `y` are in raw units.
    pub fn new(template: AnfisModel, x: &[Vec<f64>], y: &[f64], ridge: f64) -> Result<Self> {
        if x.len() != y.len() {
            return Err(AnfisError::Shape {
                context: "training targets",
                expected: x.len(),
                found: y.len(),
            });
        }
        let scaled_x = x
            .iter()
            .map(|r| template.scale_input(r))
            .collect::<Result<Vec<_>>>()?;
        let t = template.normalization().target;
        let scaled_y = y.iter().map(|&v| t.apply(v)).collect();
        Ok(PremiseFitness {
            template,
            scaled_x,
            scaled_y,
            ridge,
        })
    }

    pub fn template(&self) -> &AnfisModel {
        &self.template
    }

    /// Decode premises and fit consequents. Returns the completed model, its
    /// RMSE in scaled target units, and whether the solve was rank deficient.
    pub fn fit(&self, params: &[f64]) -> Result<(AnfisModel, f64, bool)> {
        let premises = unpack_parameters(params, &self.template)?;
        let design = assemble_design_scaled(&premises, &self.scaled_x)?;
        let sol = solve_consequents_damped(&design, &self.scaled_y, self.ridge)?;
        let fitted = design.apply(&sol.theta)?;
        let rmse = metrics::rmse(&self.scaled_y, &fitted);
        Ok((premises.with_consequents(&sol.theta)?, rmse, sol.rank_deficient))
    }

    /// Scaled-space training RMSE; any failure maps to `+inf`.
    pub fn rmse(&self, params: &[f64]) -> f64 {
        match self.fit(params) {
            Ok((_, r, _)) if r.is_finite() => r,
            _ => f64::INFINITY,
        }
    }
}

/// Rows, targets and predictions for one side of the split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub indices: Vec<usize>,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
    pub metrics: Metrics,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub model: AnfisModel,
    /// Global-best training RMSE after each swarm iteration, target units.
    pub rmse_history: Vec<(usize, f64)>,
    /// Training RMSE of the clustered starting point, target units.
    pub initial_rmse: f64,
    pub train: SplitResult,
    pub test: SplitResult,
    /// `clusters * (inputs + 1) * 2`.
    pub n_tunable: usize,
    /// Dimension actually searched by the swarm.
    pub n_premise_parameters: usize,
    pub warnings: Vec<String>,
}

fn split_result(model: &AnfisModel, data: &Dataset, indices: Vec<usize>) -> Result<SplitResult> {
    let sub = data.subset(&indices);
    let predicted = model.evaluate_batch(&sub.x)?;
    let metrics = metrics::compute(&sub.y, &predicted)?;
    Ok(SplitResult {
        indices,
        actual: sub.y,
        predicted,
        metrics,
    })
}

/// Search box around the clustered premises: centers within
/// `+-scale` standard deviations, widths between the spread floor and `scale`.
/// Inputs are z-scores, so one standard deviation is one unit.
fn premise_bounds(init: &[f64], scale: f64) -> Vec<(f64, f64)> {
    init.chunks_exact(PARAMS_PER_MF)
        .flat_map(|cw| [(cw[0] - scale, cw[0] + scale), (SPREAD_FLOOR_FRACTION, scale)])
        .collect()
}

/// Derived seeds keep the split, clustering and swarm streams independent.
fn sub_seed(seed: u64, stream: u64) -> u64 {
    seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<TrainReport> {
    config.validate()?;
    let idx = split_indices(dataset.len(), config.split_fraction, sub_seed(config.seed, 0))?;
    let train_set = dataset.subset(&idx.train);
    if train_set.len() < config.n_clusters {
        return Err(AnfisError::InsufficientData {
            needed: config.n_clusters,
            found: train_set.len(),
        });
    }
    let n_inputs = dataset.n_features();
    let mut warnings = Vec::new();

    let normalization = Normalization::fit(&train_set.x, &train_set.y)?;
    let scaled: Vec<Vec<f64>> = train_set
        .x
        .iter()
        .map(|r| normalization.scale_input(r))
        .collect();
    let seeds = clustering::cluster(&scaled, config.n_clusters, sub_seed(config.seed, 1))?;
    let seeded = clustering::seed_model(&seeds, n_inputs)?;
    let gaps = clustering::coverage_gaps(&seeded, &scaled);
    if !gaps.is_empty() {
        warnings.push(format!(
            "{} training rows lie outside every seeded rule's support",
            gaps.len()
        ));
    }
    let template = seeded.replace_normalization(normalization)?;

    let bounds = premise_bounds(&pack_parameters(&template), config.premise_bounds_scale);
    let init: Vec<f64> = pack_parameters(&template)
        .iter()
        .zip(&bounds)
        .map(|(&v, &(lo, hi))| v.clamp(lo, hi))
        .collect();
    let swarm = config.pso.with_bounds(bounds, sub_seed(config.seed, 2));
    let objective = PremiseFitness::new(template, &train_set.x, &train_set.y, config.ridge)?;

    let outcome = pso::optimize(&swarm, |p: &[f64]| objective.rmse(p), Some(&init))?;
    if !outcome.best_fitness.is_finite() {
        return Err(AnfisError::Numeric(
            "no premise configuration produced a finite training error".into(),
        ));
    }

    let (initial_model, _, init_deficient) = objective.fit(&init)?;
    let (mut model, _, mut rank_deficient) = objective.fit(&outcome.best_position)?;

    let initial_rmse = metrics::rmse(&train_set.y, &initial_model.evaluate_batch(&train_set.x)?);
    // The swarm compares in scaled space; rounding on the way back to target
    // units must not make the result look worse than its starting point.
    let final_rmse = metrics::rmse(&train_set.y, &model.evaluate_batch(&train_set.x)?);
    if final_rmse.is_nan() || final_rmse > initial_rmse {
        model = initial_model;
        rank_deficient = init_deficient;
    }
    if rank_deficient {
        warnings.push("final consequent solve was rank deficient; minimum-norm solution used".into());
    }
    let target_scale = model.normalization().target.scale;
    let rmse_history = outcome
        .history
        .iter()
        .map(|&(i, f)| (i, f * target_scale))
        .collect();

    let train = split_result(&model, dataset, idx.train)?;
    let test = split_result(&model, dataset, idx.test)?;
    Ok(TrainReport {
        model,
        rmse_history,
        initial_rmse,
        train,
        test,
        n_tunable: tunable_parameter_count(config.n_clusters, n_inputs),
        n_premise_parameters: premise_parameter_count(config.n_clusters, n_inputs),
        warnings,
    })
}
