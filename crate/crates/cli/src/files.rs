//! On-disk formats: TOML training config and generator spec, JSON model and
//! report files.

use std::fs;
use std::path::Path;

use anfis_core::data::{AnalyticTeacher, VariableSpec};
use anfis_core::trainer::SplitResult;
use anfis_core::{
    AnfisModel, GaussianMF, Metrics, Normalization, Rule, Scaler, SchemaSpec, TrainConfig,
    TrainReport,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MODEL_FORMAT: &str = "anfis-model";
pub const REPORT_FORMAT: &str = "anfis-report";
pub const FORMAT_VERSION: u32 = 1;

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Parse TOML, reporting the dotted path of whatever failed.
pub fn parse_toml<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    let de = toml::Deserializer::parse(text).map_err(|e| CliError::Config {
        path: path.into(),
        key: "<document>".into(),
        message: crate::error::single_line(&e.to_string()),
    })?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        CliError::Config {
            path: path.into(),
            key: if key == "." { "<root>".into() } else { key },
            message: crate::error::single_line(&e.into_inner().to_string()),
        }
    })
}

pub fn load_train_config(path: &Path) -> Result<TrainConfig> {
    let config: TrainConfig = parse_toml(path, &read_text(path)?)?;
    config.validate()?;
    Ok(config)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the fully resolved configuration, defaults included.
pub fn config_hash(config: &TrainConfig) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    sha256_hex(canonical.as_bytes())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalerRecord {
    pub mean: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalizationRecord {
    pub inputs: Vec<ScalerRecord>,
    pub target: ScalerRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleRecord {
    pub centers: Vec<f64>,
    pub widths: Vec<f64>,
    /// Input coefficients followed by the bias.
    pub consequent: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    /// Seconds since the Unix epoch.
    pub trained_at: Option<u64>,
    pub n_tunable: Option<usize>,
    pub n_premise_parameters: Option<usize>,
}

/// Saved model. Rules live in the z-score space described by
/// `normalization`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub n_inputs: usize,
    pub feature_names: Vec<String>,
    pub target_name: String,
    pub normalization: NormalizationRecord,
    pub rules: Vec<RuleRecord>,
    pub provenance: Provenance,
}

fn scaler_record(s: &Scaler) -> ScalerRecord {
    ScalerRecord {
        mean: s.mean,
        scale: s.scale,
    }
}

impl ModelFile {
    pub fn from_model(
        model: &AnfisModel,
        feature_names: Vec<String>,
        target_name: String,
        provenance: Provenance,
    ) -> Self {
        let norm = model.normalization();
        ModelFile {
            format: MODEL_FORMAT.into(),
            version: FORMAT_VERSION,
            n_inputs: model.n_inputs(),
            feature_names,
            target_name,
            normalization: NormalizationRecord {
                inputs: norm.inputs.iter().map(scaler_record).collect(),
                target: scaler_record(&norm.target),
            },
            rules: model
                .rules()
                .iter()
                .map(|r| RuleRecord {
                    centers: r.premise().iter().map(GaussianMF::center).collect(),
                    widths: r.premise().iter().map(GaussianMF::width).collect(),
                    consequent: r.consequent().to_vec(),
                })
                .collect(),
            provenance,
        }
    }

    pub fn to_model(&self) -> Result<AnfisModel> {
        if self.feature_names.len() != self.n_inputs {
            return Err(anfis_core::AnfisError::Shape {
                context: "model feature names",
                expected: self.n_inputs,
                found: self.feature_names.len(),
            }
            .into());
        }
        let rules = self
            .rules
            .iter()
            .map(|r| {
                if r.widths.len() != r.centers.len() {
                    return Err(anfis_core::AnfisError::Shape {
                        context: "rule widths",
                        expected: r.centers.len(),
                        found: r.widths.len(),
                    });
                }
                let premise = r
                    .centers
                    .iter()
                    .zip(&r.widths)
                    .map(|(&c, &s)| GaussianMF::new(c, s))
                    .collect::<anfis_core::Result<Vec<_>>>()?;
                Rule::new(premise, r.consequent.clone())
            })
            .collect::<anfis_core::Result<Vec<_>>>()?;
        let scaler = |s: &ScalerRecord| Scaler::new(s.mean, s.scale);
        let normalization = Normalization {
            inputs: self
                .normalization
                .inputs
                .iter()
                .map(scaler)
                .collect::<anfis_core::Result<Vec<_>>>()?,
            target: scaler(&self.normalization.target)?,
        };
        let model = AnfisModel::with_normalization(rules, normalization)?;
        if model.n_inputs() != self.n_inputs {
            return Err(anfis_core::AnfisError::Shape {
                context: "model inputs",
                expected: self.n_inputs,
                found: model.n_inputs(),
            }
            .into());
        }
        Ok(model)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes") + "\n"
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let de = &mut serde_json::Deserializer::from_str(&text);
        let file: ModelFile = serde_path_to_error::deserialize(de).map_err(|e| CliError::Format {
            path: path.into(),
            message: format!("at `{}`: {}", e.path(), e.inner()),
        })?;
        if file.format != MODEL_FORMAT || file.version != FORMAT_VERSION {
            return Err(CliError::Format {
                path: path.into(),
                message: format!(
                    "unsupported model format {} v{} (expected {MODEL_FORMAT} v{FORMAT_VERSION})",
                    file.format, file.version
                ),
            });
        }
        Ok(file)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaRecord {
    pub feature_names: Vec<String>,
    pub target_name: String,
    pub n_rows: usize,
    pub data_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub iteration: usize,
    pub rmse: f64,
}

/// One row of an actual-vs-predicted series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairPoint {
    pub row: usize,
    pub actual: f64,
    pub predicted: f64,
    /// `(predicted - actual) / actual * 100`; null when `actual` is zero.
    pub deviation_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSection {
    pub n_rows: usize,
    pub metrics: Metrics,
    pub pairs: Vec<PairPoint>,
}

impl SplitSection {
    fn new(split: &SplitResult) -> Self {
        let pairs = split
            .indices
            .iter()
            .zip(split.actual.iter().zip(&split.predicted))
            .map(|(&row, (&actual, &predicted))| PairPoint {
                row,
                actual,
                predicted,
                deviation_pct: (actual != 0.0).then(|| (predicted - actual) / actual * 100.0),
            })
            .collect();
        SplitSection {
            n_rows: split.indices.len(),
            metrics: split.metrics.clone(),
            pairs,
        }
    }
}

/// Training report. Holds no timestamps, so reruns with the same inputs are
/// byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub format: String,
    pub version: u32,
    pub config: TrainConfig,
    pub config_hash: String,
    pub schema: SchemaRecord,
    pub n_tunable: usize,
    pub n_premise_parameters: usize,
    pub initial_train_rmse: f64,
    /// Global-best training RMSE per swarm iteration, target units.
    pub rmse_history: Vec<HistoryPoint>,
    pub train: SplitSection,
    pub test: SplitSection,
    pub warnings: Vec<String>,
}

impl ReportFile {
    pub fn new(config: &TrainConfig, schema: SchemaRecord, report: &TrainReport) -> Self {
        ReportFile {
            format: REPORT_FORMAT.into(),
            version: FORMAT_VERSION,
            config: config.clone(),
            config_hash: config_hash(config),
            schema,
            n_tunable: report.n_tunable,
            n_premise_parameters: report.n_premise_parameters,
            initial_train_rmse: report.initial_rmse,
            rmse_history: report
                .rmse_history
                .iter()
                .map(|&(iteration, rmse)| HistoryPoint { iteration, rmse })
                .collect(),
            train: SplitSection::new(&report.train),
            test: SplitSection::new(&report.test),
            warnings: report.warnings.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TeacherSpec {
    /// Random rule base; `seed` defaults to one derived from `--seed`.
    Planted {
        n_rules: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    Analytic { name: AnalyticTeacher },
}

/// Synthetic-data recipe. Missing `features`/`target` fall back to the
/// built-in six-feature flue-gas schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    #[serde(default)]
    pub noise_level: f64,
    pub teacher: TeacherSpec,
    #[serde(default)]
    pub features: Option<Vec<VariableSpec>>,
    #[serde(default)]
    pub target: Option<VariableSpec>,
}

impl GenSpec {
    pub fn load(path: &Path) -> Result<Self> {
        parse_toml(path, &read_text(path)?)
    }

    pub fn schema(&self) -> Result<SchemaSpec> {
        let default = SchemaSpec::default();
        let schema = SchemaSpec {
            features: self.features.clone().unwrap_or(default.features),
            target: self.target.clone().unwrap_or(default.target),
        };
        schema.validate()?;
        Ok(schema)
    }
}
