//! Tabular datasets: CSV input/output, seeded splits and a synthetic generator
//! that mimics the coal-boiler mercury schema.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{AnfisError, Result};
use crate::fuzzy::{AnfisModel, GaussianMF, Normalization, Rule, Scaler};

/// Feature matrix plus a target column.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub target_name: String,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl Dataset {
    pub fn new(
        feature_names: Vec<String>,
        target_name: String,
        x: Vec<Vec<f64>>,
        y: Vec<f64>,
    ) -> Result<Self> {
        if x.is_empty() {
            return Err(AnfisError::InsufficientData {
                needed: 1,
                found: 0,
            });
        }
        if x.len() != y.len() {
            return Err(AnfisError::Shape {
                context: "dataset targets",
                expected: x.len(),
                found: y.len(),
            });
        }
        if let Some(row) = x.iter().find(|r| r.len() != feature_names.len()) {
            return Err(AnfisError::Shape {
                context: "dataset row",
                expected: feature_names.len(),
                found: row.len(),
            });
        }
        if x.iter().flatten().chain(&y).any(|v| !v.is_finite()) {
            return Err(AnfisError::InvalidArgument(
                "dataset contains non-finite values".into(),
            ));
        }
        Ok(Dataset {
            feature_names,
            target_name,
            x,
            y,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            feature_names: self.feature_names.clone(),
            target_name: self.target_name.clone(),
            x: indices.iter().map(|&i| self.x[i].clone()).collect(),
            y: indices.iter().map(|&i| self.y[i]).collect(),
        }
    }

    /// Write as comma-separated text with a header; features first, target last.
    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let io_err = |e: csv::Error| AnfisError::Data {
            path: path.to_path_buf(),
            message: e.to_string(),
        };
        let mut w = csv::Writer::from_path(path).map_err(io_err)?;
        let mut header = self.feature_names.clone();
        header.push(self.target_name.clone());
        w.write_record(&header).map_err(io_err)?;
        for (row, y) in self.x.iter().zip(&self.y) {
            let mut rec: Vec<String> = row.iter().map(f64::to_string).collect();
            rec.push(y.to_string());
            w.write_record(&rec).map_err(io_err)?;
        }
        w.flush().map_err(|source| AnfisError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// A numeric CSV table with its header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }
}

/// Read a header-plus-numbers CSV file. Row numbers in errors are 1-based
/// file lines (the header is line 1).
pub fn read_table(path: &Path) -> Result<Table> {
    let file = std::fs::File::open(path).map_err(|source| AnfisError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(file);
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| AnfisError::Data {
            path: path.to_path_buf(),
            message: format!("unreadable header: {e}"),
        })?
        .iter()
        .map(str::to_owned)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(AnfisError::Data {
            path: path.to_path_buf(),
            message: "missing header row".into(),
        });
    }

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2;
        let record = record.map_err(|e| AnfisError::Parse {
            path: path.to_path_buf(),
            row: line,
            column: "-".into(),
            message: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(AnfisError::Parse {
                path: path.to_path_buf(),
                row: line,
                column: "-".into(),
                message: format!(
                    "expected {} fields, found {}",
                    headers.len(),
                    record.len()
                ),
            });
        }
        let mut row = Vec::with_capacity(headers.len());
        for (cell, name) in record.iter().zip(&headers) {
            let parse_err = |message: String| AnfisError::Parse {
                path: path.to_path_buf(),
                row: line,
                column: name.clone(),
                message,
            };
            if cell.is_empty() {
                return Err(parse_err("empty cell".into()));
            }
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(format!("not a number: {cell:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(format!("non-finite value: {cell:?}")));
            }
            row.push(v);
        }
        rows.push(row);
    }
    Ok(Table { headers, rows })
}

/// Load a labeled dataset. The target is the named column, or the last
/// column when `target` is `None`.
pub fn load_csv(path: &Path, target: Option<&str>) -> Result<Dataset> {
    let table = read_table(path)?;
    if table.headers.len() < 2 {
        return Err(AnfisError::Data {
            path: path.to_path_buf(),
            message: "need at least one feature column and a target column".into(),
        });
    }
    if table.rows.is_empty() {
        return Err(AnfisError::Data {
            path: path.to_path_buf(),
            message: "no data rows".into(),
        });
    }
    let t = match target {
        Some(name) => table.column_index(name).ok_or_else(|| AnfisError::Data {
            path: path.to_path_buf(),
            message: format!("target column {name:?} not found"),
        })?,
        None => table.headers.len() - 1,
    };
    let feature_names = table
        .headers
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != t)
        .map(|(_, h)| h.clone())
        .collect();
    let (x, y) = table
        .rows
        .into_iter()
        .map(|mut r| {
            let y = r.remove(t);
            (r, y)
        })
        .unzip();
    Dataset::new(feature_names, table.headers[t].clone(), x, y)
}

/// Shuffled index partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// `ceil(fraction * m)` rows go to training. Products within 1e-9 of an
/// integer are taken as that integer.
pub fn train_size(m: usize, fraction: f64) -> usize {
    let t = fraction * m as f64;
    if (t - t.round()).abs() < 1e-9 {
        t.round() as usize
    } else {
        t.ceil() as usize
    }
}

pub fn split_indices(m: usize, fraction: f64, seed: u64) -> Result<SplitIndices> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(AnfisError::config(
            "split_fraction",
            format!("must lie strictly between 0 and 1, got {fraction}"),
        ));
    }
    let n_train = train_size(m, fraction);
    if n_train == 0 || n_train >= m {
        return Err(AnfisError::Split(format!(
            "fraction {fraction} of {m} rows leaves an empty part"
        )));
    }
    let mut idx: Vec<usize> = (0..m).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = idx.split_off(n_train);
    Ok(SplitIndices { train: idx, test })
}

/// Seeded shuffle, then the first `ceil(fraction * m)` rows train.
pub fn split(dataset: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let idx = split_indices(dataset.len(), fraction, seed)?;
    Ok((dataset.subset(&idx.train), dataset.subset(&idx.test)))
}

/// Name, unit and plausible range of one variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableSpec {
    pub name: String,
    pub unit: String,
    pub lo: f64,
    pub hi: f64,
}

impl VariableSpec {
    fn new(name: &str, unit: &str, lo: f64, hi: f64) -> Self {
        VariableSpec {
            name: name.into(),
            unit: unit.into(),
            lo,
            hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaSpec {
    pub features: Vec<VariableSpec>,
    pub target: VariableSpec,
}

impl Default for SchemaSpec {
    /// Six coal and boiler inputs with elemental mercury in the flue gas as
    /// the target. Ranges are plausible values, not measurements.
    fn default() -> Self {
        SchemaSpec {
            features: vec![
                VariableSpec::new("mercury_in_coal", "ppm", 0.02, 0.35),
                VariableSpec::new("ash", "wt%", 5.0, 30.0),
                VariableSpec::new("chlorine", "ppm", 50.0, 2500.0),
                VariableSpec::new("heating_value", "MJ/kg", 18.0, 32.0),
                VariableSpec::new("sulfur", "wt%", 0.3, 4.5),
                VariableSpec::new("temperature", "degC", 120.0, 180.0),
            ],
            target: VariableSpec::new("elemental_mercury", "ug/Nm3", 0.5, 15.0),
        }
    }
}

impl SchemaSpec {
    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(AnfisError::config("features", "schema needs at least one feature"));
        }
        for (i, v) in self.features.iter().enumerate() {
            if !(v.lo.is_finite() && v.hi.is_finite() && v.lo < v.hi) {
                return Err(AnfisError::config(
                    format!("features[{i}]"),
                    format!("range of {:?} must be finite with lo < hi", v.name),
                ));
            }
        }
        let t = &self.target;
        if !(t.lo.is_finite() && t.hi.is_finite() && t.lo < t.hi) {
            return Err(AnfisError::config(
                "target",
                "range must be finite with lo < hi",
            ));
        }
        Ok(())
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name.clone()).collect()
    }

    /// Maps each feature's range to a z-score under a uniform distribution and
    /// the target midpoint to zero with a quarter-range spanning four units.
    fn teacher_normalization(&self) -> Normalization {
        let sqrt12 = 12f64.sqrt();
        Normalization {
            inputs: self
                .features
                .iter()
                .map(|f| Scaler {
                    mean: 0.5 * (f.lo + f.hi),
                    scale: (f.hi - f.lo) / sqrt12,
                })
                .collect(),
            target: Scaler {
                mean: 0.5 * (self.target.lo + self.target.hi),
                scale: (self.target.hi - self.target.lo) / 8.0,
            },
        }
    }
}

/// Closed-form targets for the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalyticTeacher {
    /// Smooth positive response: grows with the first feature, interacts the
    /// third with the last, and adds mild curvature in the rest.
    MercuryProxy,
}

impl AnalyticTeacher {
    fn eval(self, schema: &SchemaSpec, x: &[f64]) -> f64 {
        match self {
            AnalyticTeacher::MercuryProxy => {
                let u: Vec<f64> = x
                    .iter()
                    .zip(&schema.features)
                    .map(|(v, f)| (v - f.lo) / (f.hi - f.lo))
                    .collect();
                let at = |j: usize| u.get(j).copied().unwrap_or(0.5);
                let shape = 0.05
                    + 0.35 * at(0)
                    + 0.15 * at(2) * (1.0 - at(u.len().saturating_sub(1)))
                    + 0.1 * (std::f64::consts::PI * at(1)).sin()
                    + 0.1 * at(4) * at(3)
                    + 0.2 * at(u.len().saturating_sub(1)).powi(2);
                let t = &schema.target;
                t.lo + (t.hi - t.lo) * shape / 0.95
            }
        }
    }
}

/// Source of generator targets.
#[derive(Debug, Clone, PartialEq)]
pub enum Teacher {
    Model(AnfisModel),
    Analytic(AnalyticTeacher),
}

/// Random Takagi-Sugeno teacher over the schema's ranges. Rules are broad
/// (widths 1-2 in uniform z-score units) and consequents small enough that
/// the output stays inside the schema's target range.
pub fn planted_teacher(schema: &SchemaSpec, n_rules: usize, seed: u64) -> Result<AnfisModel> {
    schema.validate()?;
    if n_rules == 0 {
        return Err(AnfisError::config("teacher.n_rules", "must be at least 1"));
    }
    let n = schema.features.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Per-rule output magnitude stays below 3.5 scaled units for inputs
    // in range (|z| <= sqrt(3)).
    let coef_bound = 3.0 / (n as f64 * 3f64.sqrt());
    let rules = (0..n_rules)
        .map(|_| {
            let premise = (0..n)
                .map(|_| {
                    GaussianMF::new(rng.random_range(-1.5..=1.5), rng.random_range(1.0..=2.0))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut consequent: Vec<f64> = (0..n)
                .map(|_| rng.random_range(-coef_bound..=coef_bound))
                .collect();
            consequent.push(rng.random_range(-0.5..=0.5));
            Rule::new(premise, consequent)
        })
        .collect::<Result<Vec<_>>>()?;
    AnfisModel::with_normalization(rules, schema.teacher_normalization())
}

/// Draw `m` rows uniformly inside the schema ranges and label them with the
/// teacher plus Gaussian noise of `noise_level` times the clean targets'
/// standard deviation.
pub fn generate_synthetic(
    schema: &SchemaSpec,
    m: usize,
    teacher: &Teacher,
    noise_level: f64,
    seed: u64,
) -> Result<Dataset> {
    schema.validate()?;
    if m == 0 {
        return Err(AnfisError::config("rows", "must be at least 1"));
    }
    if !(noise_level.is_finite() && noise_level >= 0.0) {
        return Err(AnfisError::config("noise_level", "must be finite and >= 0"));
    }
    if let Teacher::Model(model) = teacher {
        if model.n_inputs() != schema.features.len() {
            return Err(AnfisError::Shape {
                context: "teacher inputs",
                expected: schema.features.len(),
                found: model.n_inputs(),
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            schema
                .features
                .iter()
                .map(|f| rng.random_range(f.lo..=f.hi))
                .collect()
        })
        .collect();
    let mut y = x
        .iter()
        .map(|row| match teacher {
            Teacher::Model(model) => model.evaluate(row),
            Teacher::Analytic(a) => Ok(a.eval(schema, row)),
        })
        .collect::<Result<Vec<f64>>>()?;

    if noise_level > 0.0 {
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let sd = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        for v in &mut y {
            let e: f64 = rng.sample(StandardNormal);
            *v += noise_level * sd * e;
        }
    }
    Dataset::new(schema.feature_names(), schema.target.name.clone(), x, y)
}
