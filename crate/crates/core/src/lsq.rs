//! Least-squares fit of the consequent parameters for fixed premises.
//!
//! With premises frozen the model output is linear in the stacked consequent
//! vector, so the best consequents solve an ordinary linear least-squares
//! problem. The solve goes through an SVD and returns the minimum-norm
//! solution, which stays well-defined when rules nearly coincide.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{AnfisError, Result};
use crate::fuzzy::AnfisModel;

/// Rows are samples; each row holds one block `[w_i z_1, .., w_i z_n, w_i]`
/// per rule, with `w_i` the normalized firing strength and `z` the scaled
/// input.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    matrix: DMatrix<f64>,
    n_rules: usize,
}

impl DesignMatrix {
    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn n_rules(&self) -> usize {
        self.n_rules
    }

    pub fn row(&self, k: usize) -> Vec<f64> {
        self.matrix.row(k).iter().copied().collect()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `design * theta`.
    pub fn apply(&self, theta: &[f64]) -> Result<Vec<f64>> {
        if theta.len() != self.ncols() {
            return Err(AnfisError::Shape {
                context: "consequent vector",
                expected: self.ncols(),
                found: theta.len(),
            });
        }
        let out = &self.matrix * DVector::from_column_slice(theta);
        Ok(out.iter().copied().collect())
    }
}

/// Build the design matrix for raw input rows.
///
/// `design * theta` equals the model's scaled-target output for consequents
/// `theta`; with identity normalization that is exactly `evaluate`.
pub fn assemble_design<R: AsRef<[f64]>>(model: &AnfisModel, rows: &[R]) -> Result<DesignMatrix> {
    let scaled = rows
        .iter()
        .map(|r| model.scale_input(r.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    assemble_design_scaled(model, &scaled)
}

/// Build the design matrix for rows already in the model's scaled space.
pub fn assemble_design_scaled<R: AsRef<[f64]>>(
    model: &AnfisModel,
    rows: &[R],
) -> Result<DesignMatrix> {
    if rows.is_empty() {
        return Err(AnfisError::InsufficientData {
            needed: 1,
            found: 0,
        });
    }
    let n = model.n_inputs();
    let block = n + 1;
    let n_rules = model.n_rules();
    let mut matrix = DMatrix::zeros(rows.len(), n_rules * block);
    let mut wbar = vec![0.0; n_rules];
    for (k, row) in rows.iter().enumerate() {
        let z = row.as_ref();
        if z.len() != n {
            return Err(AnfisError::Shape {
                context: "design row",
                expected: n,
                found: z.len(),
            });
        }
        model.normalized_strengths_scaled(z, &mut wbar);
        for (i, &w) in wbar.iter().enumerate() {
            let base = i * block;
            for (j, &v) in z.iter().enumerate() {
                matrix[(k, base + j)] = w * v;
            }
            matrix[(k, base + n)] = w;
        }
    }
    Ok(DesignMatrix { matrix, n_rules })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsqSolution {
    /// Stacked consequents, rule-major.
    pub theta: Vec<f64>,
    /// Numerical rank of the design matrix.
    pub rank: usize,
    /// Set when the rank is below `min(rows, cols)`; the returned solution is
    /// then the minimum-norm one.
    pub rank_deficient: bool,
}

/// Minimum-norm least-squares solution of `design * theta ~ y`.
pub fn solve_consequents(design: &DesignMatrix, y: &[f64]) -> Result<LsqSolution> {
    solve_consequents_damped(design, y, 0.0)
}

/// Tikhonov-damped solve: minimizes `|design * theta - y|^2 + ridge |theta|^2`.
/// `ridge = 0` gives the minimum-norm least-squares solution.
pub fn solve_consequents_damped(
    design: &DesignMatrix,
    y: &[f64],
    ridge: f64,
) -> Result<LsqSolution> {
    if y.len() != design.nrows() {
        return Err(AnfisError::Shape {
            context: "least-squares target",
            expected: design.nrows(),
            found: y.len(),
        });
    }
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(AnfisError::InvalidArgument(format!(
            "ridge must be finite and non-negative, got {ridge}"
        )));
    }
    if design.matrix.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(AnfisError::Numeric(
            "least-squares inputs contain non-finite values".into(),
        ));
    }

    let (m, n) = design.matrix.shape();
    let svd = SVD::try_new(design.matrix.clone(), true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| AnfisError::Numeric("SVD did not converge".into()))?;
    let (u, v_t) = match (svd.u.as_ref(), svd.v_t.as_ref()) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(AnfisError::Numeric("SVD factors unavailable".into())),
    };
    let s = &svd.singular_values;
    let s_max = s.iter().copied().fold(0.0, f64::max);
    let tol = s_max * (m.max(n) as f64) * f64::EPSILON;

    let y = DVector::from_column_slice(y);
    let mut theta = DVector::zeros(n);
    let mut rank = 0;
    for (i, &si) in s.iter().enumerate() {
        if si <= tol {
            continue;
        }
        rank += 1;
        let coeff = u.column(i).dot(&y) * si / (si * si + ridge);
        theta.axpy(coeff, &v_t.row(i).transpose(), 1.0);
    }
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(AnfisError::Numeric(
            "least-squares solution is not finite".into(),
        ));
    }
    Ok(LsqSolution {
        theta: theta.iter().copied().collect(),
        rank,
        rank_deficient: rank < m.min(n),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzzy::{GaussianMF, Rule};

    fn one_input_model(centers: &[f64]) -> AnfisModel {
        let rules = centers
            .iter()
            .map(|&c| Rule::with_zero_consequent(vec![GaussianMF::new(c, 1.0).unwrap()]).unwrap())
            .collect();
        AnfisModel::new(rules).unwrap()
    }

    #[test]
    fn single_rule_row() {
        let d = assemble_design(&one_input_model(&[0.0]), &[[3.0]]).unwrap();
        assert_eq!(d.row(0), vec![3.0, 1.0]);
    }

    #[test]
    fn equal_firing_rules_split_weight() {
        let d = assemble_design(&one_input_model(&[1.0, 1.0]), &[[2.0]]).unwrap();
        assert_eq!(d.row(0), vec![1.0, 0.5, 1.0, 0.5]);
    }

    #[test]
    fn design_dimension_mismatch() {
        let model = one_input_model(&[0.0]);
        assert!(assemble_design(&model, &[[1.0, 2.0]]).is_err());
        let empty: [[f64; 1]; 0] = [];
        assert!(assemble_design(&model, &empty).is_err());
    }

    #[test]
    fn zero_target_gives_zero_solution() {
        let model = one_input_model(&[0.0, 2.0]);
        let d = assemble_design(&model, &[[0.0], [1.0], [2.0]]).unwrap();
        let sol = solve_consequents(&d, &[0.0; 3]).unwrap();
        assert!(sol.theta.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn underdetermined_beats_zero() {
        let model = one_input_model(&[0.0, 2.0, 4.0]);
        let d = assemble_design(&model, &[[0.5], [3.0]]).unwrap();
        let y = [1.0, -2.0];
        let sol = solve_consequents(&d, &y).unwrap();
        assert_eq!(sol.rank, 2);
        let resid: f64 = d
            .apply(&sol.theta)
            .unwrap()
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        let zero_resid: f64 = y.iter().map(|v| v * v).sum();
        assert!(resid <= zero_resid);
    }

    #[test]
    fn duplicate_rules_flag_rank_deficiency() {
        let model = one_input_model(&[1.0, 1.0]);
        let rows: Vec<[f64; 1]> = (0..6).map(|i| [i as f64]).collect();
        let d = assemble_design(&model, &rows).unwrap();
        let y: Vec<f64> = rows.iter().map(|r| 2.0 * r[0] - 1.0).collect();
        let sol = solve_consequents(&d, &y).unwrap();
        assert!(sol.rank_deficient);
        assert_eq!(sol.rank, 2);
        // minimum norm splits the line evenly between the twins
        for (t, e) in sol.theta.iter().zip([2.0, -1.0, 2.0, -1.0]) {
            assert!((t - e).abs() < 1e-10);
        }
    }

    #[test]
    fn ridge_shrinks_solution() {
        let model = one_input_model(&[0.0, 1.5]);
        let rows: Vec<[f64; 1]> = (0..8).map(|i| [i as f64 * 0.3]).collect();
        let d = assemble_design(&model, &rows).unwrap();
        let y: Vec<f64> = rows.iter().map(|r| (r[0] * 2.0).sin()).collect();
        let plain = solve_consequents(&d, &y).unwrap();
        let damped = solve_consequents_damped(&d, &y, 1.0).unwrap();
        let norm = |t: &[f64]| t.iter().map(|v| v * v).sum::<f64>();
        assert!(norm(&damped.theta) < norm(&plain.theta));
        assert!(solve_consequents_damped(&d, &y, -1.0).is_err());
    }

    #[test]
    fn rejects_non_finite_targets() {
        let model = one_input_model(&[0.0]);
        let d = assemble_design(&model, &[[0.0], [1.0]]).unwrap();
        assert!(matches!(
            solve_consequents(&d, &[1.0, f64::NAN]),
            Err(AnfisError::Numeric(_))
        ));
        assert!(solve_consequents(&d, &[1.0]).is_err());
    }
}
