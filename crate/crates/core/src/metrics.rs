//! Regression accuracy statistics.
//!
//! Relative measures divide by the actual value and are left undefined
//! (`None`) when any actual value is zero. R² is undefined when the actual
//! values have zero variance.

use serde::{Deserialize, Serialize};

use crate::error::{AnfisError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub rmse: f64,
    pub mse: f64,
    /// Mean absolute relative error, percent.
    pub mare_pct: Option<f64>,
    /// Mean signed relative error `(a - p) / a`, percent.
    pub mre_pct: Option<f64>,
    pub r2: Option<f64>,
    /// Per-sample `(p - a) / a`, percent.
    pub relative_deviations: Option<Vec<f64>>,
}

impl Metrics {
    pub fn relative_defined(&self) -> bool {
        self.relative_deviations.is_some()
    }
}

pub fn mse(actual: &[f64], predicted: &[f64]) -> f64 {
    actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p) * (a - p))
        .sum::<f64>()
        / actual.len() as f64
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> f64 {
    mse(actual, predicted).sqrt()
}

pub fn compute(actual: &[f64], predicted: &[f64]) -> Result<Metrics> {
    if actual.len() != predicted.len() {
        return Err(AnfisError::Shape {
            context: "metrics",
            expected: actual.len(),
            found: predicted.len(),
        });
    }
    let m = actual.len();
    if m < 2 {
        return Err(AnfisError::InsufficientData {
            needed: 2,
            found: m,
        });
    }
    if actual.iter().chain(predicted).any(|v| !v.is_finite()) {
        return Err(AnfisError::Numeric(
            "metrics inputs contain non-finite values".into(),
        ));
    }
    let n = m as f64;

    let sse: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p) * (a - p))
        .sum();
    let mse = sse / n;

    let mean = actual.iter().sum::<f64>() / n;
    let sst: f64 = actual.iter().map(|a| (a - mean) * (a - mean)).sum();
    let r2 = (sst > 0.0).then(|| 1.0 - sse / sst);

    let (mare_pct, mre_pct, relative_deviations) = if actual.contains(&0.0) {
        (None, None, None)
    } else {
        let rel: Vec<f64> = actual
            .iter()
            .zip(predicted)
            .map(|(a, p)| (a - p) / a)
            .collect();
        let mare = 100.0 * rel.iter().map(|r| r.abs()).sum::<f64>() / n;
        let mre = 100.0 * rel.iter().sum::<f64>() / n;
        let dev = rel.iter().map(|r| -100.0 * r).collect();
        (Some(mare), Some(mre), Some(dev))
    };

    Ok(Metrics {
        n: m,
        rmse: mse.sqrt(),
        mse,
        mare_pct,
        mre_pct,
        r2,
        relative_deviations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_fit() {
        let a = [1.0, 2.5, -3.0, 4.0];
        let m = compute(&a, &a).unwrap();
        assert_eq!(m.rmse, 0.0);
        assert_eq!(m.mse, 0.0);
        assert_eq!(m.mare_pct, Some(0.0));
        assert_eq!(m.mre_pct, Some(0.0));
        assert_eq!(m.r2, Some(1.0));
        assert!(m.relative_deviations.unwrap().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn hand_computed_case() {
        let m = compute(&[1.0, 2.0, 3.0], &[1.1, 1.9, 3.0]).unwrap();
        assert!((m.mse - 0.02 / 3.0).abs() < 1e-15);
        assert!((m.mare_pct.unwrap() - 5.0).abs() < 1e-12);
        // signed: (1 - 1.1)/1 + (2 - 1.9)/2 = -0.1 + 0.05
        assert!((m.mre_pct.unwrap() - 100.0 * -0.05 / 3.0).abs() < 1e-12);
        // sst = 2
        assert!((m.r2.unwrap() - (1.0 - 0.02 / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn mean_prediction_has_zero_r2() {
        let a = [2.0, 4.0, 9.0];
        let m = compute(&a, &[5.0; 3]).unwrap();
        assert!(m.r2.unwrap().abs() < 1e-15);
    }

    #[test]
    fn zero_actual_leaves_relative_undefined() {
        let m = compute(&[0.0, 1.0, 2.0], &[0.1, 1.0, 2.0]).unwrap();
        assert!(m.mare_pct.is_none() && m.mre_pct.is_none());
        assert!(!m.relative_defined());
        assert!(m.mse > 0.0);
        assert!(m.r2.is_some());
    }

    #[test]
    fn constant_actual_leaves_r2_undefined() {
        let m = compute(&[3.0, 3.0], &[3.0, 3.5]).unwrap();
        assert!(m.r2.is_none());
        assert!(m.mare_pct.is_some());
    }

    #[test]
    fn input_errors() {
        assert!(compute(&[1.0], &[1.0]).is_err());
        assert!(compute(&[1.0, 2.0], &[1.0]).is_err());
        assert!(compute(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
    }
}
