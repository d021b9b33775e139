//! Five-layer Takagi-Sugeno inference.
//!
//! Layer 1 maps every input through the premise membership functions, layer 2
//! multiplies them into rule firing strengths, layer 3 normalizes the strengths,
//! layer 4 weights each rule's first-order linear output and layer 5 sums.
//!
//! Rules live in a scaled coordinate system: [`Normalization`] maps raw
//! features to z-scores before layer 1 and maps the layer 5 output back to
//! target units.

use crate::error::{AnfisError, Result};

/// Absolute lower bound on a Gaussian width in scaled (z-score) units.
pub const WIDTH_FLOOR: f64 = 1e-6;

/// Gaussian membership function `exp(-(x - c)^2 / (2 s^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMF {
    center: f64,
    width: f64,
}

impl GaussianMF {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !center.is_finite() {
            return Err(AnfisError::InvalidArgument(format!(
                "membership center must be finite, got {center}"
            )));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(AnfisError::InvalidArgument(format!(
                "membership width must be finite and positive, got {width}"
            )));
        }
        Ok(GaussianMF { center, width })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Squared distance to the center in units of `width`, halved. This is the
    /// negated log-membership.
    #[inline]
    pub(crate) fn neg_log(&self, x: f64) -> f64 {
        let d = (x - self.center) / self.width;
        0.5 * d * d
    }

    #[inline]
    pub fn grade(&self, x: f64) -> f64 {
        (-self.neg_log(x)).exp()
    }
}

/// Membership grade of `x`, with argument checking.
pub fn membership(mf: &GaussianMF, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(AnfisError::InvalidArgument(format!(
            "membership input must be finite, got {x}"
        )));
    }
    Ok(mf.grade(x))
}

/// One fuzzy if-then rule with a first-order Sugeno consequent.
///
/// The consequent holds one coefficient per input followed by the bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    premise: Vec<GaussianMF>,
    consequent: Vec<f64>,
}

impl Rule {
    pub fn new(premise: Vec<GaussianMF>, consequent: Vec<f64>) -> Result<Self> {
        if premise.is_empty() {
            return Err(AnfisError::InvalidArgument(
                "rule premise must have at least one membership function".into(),
            ));
        }
        if consequent.len() != premise.len() + 1 {
            return Err(AnfisError::Shape {
                context: "rule consequent",
                expected: premise.len() + 1,
                found: consequent.len(),
            });
        }
        Ok(Rule {
            premise,
            consequent,
        })
    }

    /// A rule whose consequent is all zeros.
    pub fn with_zero_consequent(premise: Vec<GaussianMF>) -> Result<Self> {
        let n = premise.len();
        Rule::new(premise, vec![0.0; n + 1])
    }

    pub fn premise(&self) -> &[GaussianMF] {
        &self.premise
    }

    pub fn consequent(&self) -> &[f64] {
        &self.consequent
    }

    pub fn n_inputs(&self) -> usize {
        self.premise.len()
    }

    /// Product of the premise grades (layer 2) for a scaled input.
    pub fn firing_strength(&self, z: &[f64]) -> f64 {
        self.premise
            .iter()
            .zip(z)
            .map(|(mf, &v)| mf.grade(v))
            .product()
    }

    #[inline]
    pub(crate) fn log_strength(&self, z: &[f64]) -> f64 {
        -self
            .premise
            .iter()
            .zip(z)
            .map(|(mf, &v)| mf.neg_log(v))
            .sum::<f64>()
    }

    /// The rule's linear output `p . z + r` for a scaled input.
    pub fn linear_output(&self, z: &[f64]) -> f64 {
        let (coef, bias) = self.consequent.split_at(self.premise.len());
        coef.iter().zip(z).map(|(c, v)| c * v).sum::<f64>() + bias[0]
    }
}

/// Affine map between a raw quantity and its z-score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaler {
    pub mean: f64,
    pub scale: f64,
}

impl Scaler {
    pub const IDENTITY: Scaler = Scaler {
        mean: 0.0,
        scale: 1.0,
    };

    pub fn new(mean: f64, scale: f64) -> Result<Self> {
        if !(mean.is_finite() && scale.is_finite() && scale > 0.0) {
            return Err(AnfisError::InvalidArgument(format!(
                "scaler needs finite mean and positive scale, got ({mean}, {scale})"
            )));
        }
        Ok(Scaler { mean, scale })
    }

    /// Mean and population standard deviation of `values`; a zero spread maps
    /// to scale 1 so that constant columns stay representable.
    pub fn fit(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        let values: Vec<f64> = values.into_iter().collect();
        if values.is_empty() {
            return Err(AnfisError::InvalidArgument(
                "cannot fit a scaler to an empty column".into(),
            ));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        Scaler::new(mean, if sd > 0.0 { sd } else { 1.0 })
    }

    #[inline]
    pub fn apply(&self, v: f64) -> f64 {
        (v - self.mean) / self.scale
    }

    #[inline]
    pub fn invert(&self, z: f64) -> f64 {
        z * self.scale + self.mean
    }
}

/// Per-feature input scalers plus the target scaler.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub inputs: Vec<Scaler>,
    pub target: Scaler,
}

impl Normalization {
    pub fn identity(n_inputs: usize) -> Self {
        Normalization {
            inputs: vec![Scaler::IDENTITY; n_inputs],
            target: Scaler::IDENTITY,
        }
    }

    /// Z-score statistics of the given rows and targets.
    pub fn fit<R: AsRef<[f64]>>(rows: &[R], targets: &[f64]) -> Result<Self> {
        let n = rows.first().map(|r| r.as_ref().len()).ok_or_else(|| {
            AnfisError::InvalidArgument("cannot fit normalization to zero rows".into())
        })?;
        let inputs = (0..n)
            .map(|j| Scaler::fit(rows.iter().map(|r| r.as_ref()[j])))
            .collect::<Result<Vec<_>>>()?;
        Ok(Normalization {
            inputs,
            target: Scaler::fit(targets.iter().copied())?,
        })
    }

    pub fn scale_input(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.inputs).map(|(&v, s)| s.apply(v)).collect()
    }
}

/// Layer 3: divide each firing strength by the total.
pub fn normalize_strengths(w: &[f64]) -> Result<Vec<f64>> {
    if w.is_empty() {
        return Err(AnfisError::DegenerateFiring("no firing strengths".into()));
    }
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(AnfisError::DegenerateFiring(
            "firing strengths must be finite and non-negative".into(),
        ));
    }
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(AnfisError::DegenerateFiring(
            "firing strengths sum to zero".into(),
        ));
    }
    Ok(w.iter().map(|v| v / total).collect())
}

/// A first-order Takagi-Sugeno system with Gaussian premises.
#[derive(Debug, Clone, PartialEq)]
pub struct AnfisModel {
    n_inputs: usize,
    rules: Vec<Rule>,
    normalization: Normalization,
}

impl AnfisModel {
    /// Model operating directly on raw units.
    pub fn new(rules: Vec<Rule>) -> Result<Self> {
        let n = rules.first().map(Rule::n_inputs).unwrap_or(0);
        AnfisModel::with_normalization(rules, Normalization::identity(n))
    }

    pub fn with_normalization(rules: Vec<Rule>, normalization: Normalization) -> Result<Self> {
        let first = rules.first().ok_or_else(|| {
            AnfisError::InvalidArgument("a model needs at least one rule".into())
        })?;
        let n_inputs = first.n_inputs();
        for rule in &rules {
            if rule.n_inputs() != n_inputs {
                return Err(AnfisError::Shape {
                    context: "rule premise",
                    expected: n_inputs,
                    found: rule.n_inputs(),
                });
            }
        }
        if normalization.inputs.len() != n_inputs {
            return Err(AnfisError::Shape {
                context: "input normalization",
                expected: n_inputs,
                found: normalization.inputs.len(),
            });
        }
        Ok(AnfisModel {
            n_inputs,
            rules,
            normalization,
        })
    }

    /// Same rules, interpreted under different scaling statistics.
    pub fn replace_normalization(self, normalization: Normalization) -> Result<Self> {
        AnfisModel::with_normalization(self.rules, normalization)
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_rules(&self) -> usize {
        self.rules.len()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn normalization(&self) -> &Normalization {
        &self.normalization
    }

    /// Same premises and normalization, new consequents (rule-major, one
    /// block of `n_inputs + 1` per rule).
    pub fn with_consequents(&self, theta: &[f64]) -> Result<Self> {
        let block = self.n_inputs + 1;
        if theta.len() != block * self.rules.len() {
            return Err(AnfisError::Shape {
                context: "consequent vector",
                expected: block * self.rules.len(),
                found: theta.len(),
            });
        }
        let rules = self
            .rules
            .iter()
            .zip(theta.chunks_exact(block))
            .map(|(r, c)| Rule::new(r.premise.clone(), c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(AnfisModel {
            n_inputs: self.n_inputs,
            rules,
            normalization: self.normalization.clone(),
        })
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_inputs {
            return Err(AnfisError::Shape {
                context: "model input",
                expected: self.n_inputs,
                found: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(AnfisError::InvalidArgument(
                "model input contains a non-finite value".into(),
            ));
        }
        Ok(())
    }

    /// Raw input to the scaled coordinates the rules are expressed in.
    pub fn scale_input(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.normalization.scale_input(x))
    }

    /// Layer 2 output for a raw input.
    pub fn firing_strengths(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.scale_input(x)?;
        Ok(self.rules.iter().map(|r| r.firing_strength(&z)).collect())
    }

    /// Layer 3 output for a raw input.
    pub fn normalized_strengths(&self, x: &[f64]) -> Result<Vec<f64>> {
        let z = self.scale_input(x)?;
        let mut out = vec![0.0; self.rules.len()];
        self.normalized_strengths_scaled(&z, &mut out);
        Ok(out)
    }

    /// Layer 3 on a scaled input, written into `out`.
    ///
    /// Works in the log domain so that inputs far from every center (where
    /// each product underflows to zero) still yield a partition of unity.
    pub(crate) fn normalized_strengths_scaled(&self, z: &[f64], out: &mut [f64]) {
        let mut max = f64::NEG_INFINITY;
        for (o, rule) in out.iter_mut().zip(&self.rules) {
            *o = rule.log_strength(z);
            max = max.max(*o);
        }
        let mut total = 0.0;
        for o in out.iter_mut() {
            *o = (*o - max).exp();
            total += *o;
        }
        for o in out.iter_mut() {
            *o /= total;
        }
    }

    /// Layers 1-5 on a scaled input; the result is in scaled target units.
    pub fn evaluate_scaled(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.n_inputs {
            return Err(AnfisError::Shape {
                context: "model input",
                expected: self.n_inputs,
                found: z.len(),
            });
        }
        let mut wbar = vec![0.0; self.rules.len()];
        Ok(self.evaluate_scaled_with(z, &mut wbar))
    }

    fn evaluate_scaled_with(&self, z: &[f64], wbar: &mut [f64]) -> f64 {
        self.normalized_strengths_scaled(z, wbar);
        self.rules
            .iter()
            .zip(wbar.iter())
            .map(|(r, w)| w * r.linear_output(z))
            .sum()
    }

    /// Model output in target units for a raw input.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let z = self.scale_input(x)?;
        let mut wbar = vec![0.0; self.rules.len()];
        let out = self.evaluate_scaled_with(&z, &mut wbar);
        Ok(self.normalization.target.invert(out))
    }

    pub fn evaluate_batch<R: AsRef<[f64]>>(&self, rows: &[R]) -> Result<Vec<f64>> {
        rows.iter().map(|r| self.evaluate(r.as_ref())).collect()
    }
}
