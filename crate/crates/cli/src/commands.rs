use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anfis_core::data::{generate_synthetic, planted_teacher, read_table, Table};
use anfis_core::{metrics, train, AnfisError, Dataset, Metrics, Teacher};

use crate::error::{CliError, Result};
use crate::files::{
    config_hash, load_train_config, sha256_hex, write_text, GenSpec, ModelFile, Provenance,
    ReportFile, SchemaRecord, TeacherSpec,
};

fn write_line(out: &mut dyn Write, line: &str) -> Result<()> {
    writeln!(out, "{line}").map_err(|e| CliError::io("<stdout>", e))
}

/// Stream offset for teacher seeds derived from the data seed.
const TEACHER_STREAM: u64 = 0x5EED_7EAC_4E70_0001;

pub fn cmd_train(
    config_path: &Path,
    data_path: &Path,
    out_model: &Path,
    out_report: &Path,
    target: Option<&str>,
    out: &mut dyn Write,
) -> Result<()> {
    let config = load_train_config(config_path)?;
    let raw = std::fs::read(data_path).map_err(|e| CliError::io(data_path, e))?;
    let dataset = anfis_core::load_csv(data_path, target)?;
    let report = train(&dataset, &config)?;

    let trained_at = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .ok();
    let model_file = ModelFile::from_model(
        &report.model,
        dataset.feature_names.clone(),
        dataset.target_name.clone(),
        Provenance {
            config_hash: Some(config_hash(&config)),
            seed: Some(config.seed),
            trained_at,
            n_tunable: Some(report.n_tunable),
            n_premise_parameters: Some(report.n_premise_parameters),
        },
    );
    let schema = SchemaRecord {
        feature_names: dataset.feature_names.clone(),
        target_name: dataset.target_name.clone(),
        n_rows: dataset.len(),
        data_sha256: sha256_hex(&raw),
    };
    let report_file = ReportFile::new(&config, schema, &report);
    write_text(out_model, &model_file.to_json())?;
    write_text(out_report, &report_file.to_json())?;

    let summary = serde_json::json!({
        "train_rmse": report.train.metrics.rmse,
        "test_rmse": report.test.metrics.rmse,
        "test_r2": report.test.metrics.r2,
        "test_mare_pct": report.test.metrics.mare_pct,
        "iterations": report.rmse_history.len(),
    });
    write_line(out, &summary.to_string())
}

/// Pick the model's feature columns out of `table`: by header name when
/// every feature name is present, otherwise by position when the counts line
/// up (optionally with one trailing target column).
fn feature_columns(table: &Table, model: &ModelFile, allow_target: bool) -> Result<Vec<usize>> {
    let by_name: Option<Vec<usize>> = model
        .feature_names
        .iter()
        .map(|n| table.column_index(n))
        .collect();
    if let Some(cols) = by_name {
        return Ok(cols);
    }
    let n = model.n_inputs;
    let width = table.headers.len();
    if width == n || (allow_target && width == n + 1) {
        return Ok((0..n).collect());
    }
    Err(AnfisError::Shape {
        context: "input columns",
        expected: n,
        found: width,
    }
    .into())
}

fn select(rows: &[Vec<f64>], cols: &[usize]) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| cols.iter().map(|&c| r[c]).collect())
        .collect()
}

pub fn parse_inline(input: &str) -> Result<Vec<f64>> {
    input
        .split(',')
        .map(|t| {
            let t = t.trim();
            match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(CliError::Usage(format!("--input: `{t}` is not a finite number"))),
            }
        })
        .collect()
}

pub fn cmd_predict(
    model_path: &Path,
    data_path: Option<&Path>,
    input: Option<&str>,
    out: &mut dyn Write,
) -> Result<()> {
    let file = ModelFile::load(model_path)?;
    let model = file.to_model()?;
    let rows = match (data_path, input) {
        (Some(path), None) => {
            let table = read_table(path)?;
            let cols = feature_columns(&table, &file, false)?;
            select(&table.rows, &cols)
        }
        (None, Some(text)) => vec![parse_inline(text)?],
        _ => {
            return Err(CliError::Usage(
                "exactly one of --data or --input is required".into(),
            ))
        }
    };
    if let Some(row) = rows.iter().find(|r| r.len() != model.n_inputs()) {
        return Err(AnfisError::Shape {
            context: "input values",
            expected: model.n_inputs(),
            found: row.len(),
        }
        .into());
    }
    for y in model.evaluate_batch(&rows)? {
        write_line(out, &y.to_string())?;
    }
    Ok(())
}

/// Features and targets of a labelled file, columns matched to the model.
pub fn labelled_rows(path: &Path, file: &ModelFile) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let table = read_table(path)?;
    if table.rows.is_empty() {
        return Err(AnfisError::Data {
            path: path.into(),
            message: "no data rows".into(),
        }
        .into());
    }
    let cols = feature_columns(&table, file, true)?;
    let target = match table.column_index(&file.target_name) {
        Some(t) => t,
        None if table.headers.len() == file.n_inputs + 1 => file.n_inputs,
        None => {
            return Err(AnfisError::Data {
                path: path.into(),
                message: format!("target column `{}` not found", file.target_name),
            }
            .into())
        }
    };
    let y = table.rows.iter().map(|r| r[target]).collect();
    Ok((select(&table.rows, &cols), y))
}

pub fn evaluate_file(model_path: &Path, data_path: &Path) -> Result<Metrics> {
    let file = ModelFile::load(model_path)?;
    let model = file.to_model()?;
    let (x, y) = labelled_rows(data_path, &file)?;
    let predicted = model.evaluate_batch(&x)?;
    Ok(metrics::compute(&y, &predicted)?)
}

pub fn cmd_evaluate(model_path: &Path, data_path: &Path, out: &mut dyn Write) -> Result<()> {
    let m = evaluate_file(model_path, data_path)?;
    write_line(out, &serde_json::to_string_pretty(&m).expect("metrics serialize"))
}

pub fn cmd_gen_data(
    spec_path: &Path,
    rows: usize,
    seed: u64,
    out_path: &Path,
    out_teacher: Option<&Path>,
) -> Result<()> {
    let spec = GenSpec::load(spec_path)?;
    let schema = spec.schema()?;
    let teacher = match &spec.teacher {
        TeacherSpec::Planted { n_rules, seed: t } => Teacher::Model(planted_teacher(
            &schema,
            *n_rules,
            t.unwrap_or(seed ^ TEACHER_STREAM),
        )?),
        TeacherSpec::Analytic { name } => Teacher::Analytic(*name),
    };
    let data: Dataset = generate_synthetic(&schema, rows, &teacher, spec.noise_level, seed)?;
    data.save_csv(out_path)?;
    if let Some(path) = out_teacher {
        let Teacher::Model(model) = &teacher else {
            return Err(CliError::Usage(
                "--out-teacher needs a planted teacher".into(),
            ));
        };
        let file = ModelFile::from_model(
            model,
            schema.feature_names(),
            schema.target.name.clone(),
            Provenance {
                config_hash: None,
                seed: None,
                trained_at: None,
                n_tunable: None,
                n_premise_parameters: None,
            },
        );
        write_text(path, &file.to_json())?;
    }
    Ok(())
}
