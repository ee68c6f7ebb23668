//! Evaluation report (JSON) and the per-point score dump (CSV).
//! Both artifacts are fully deterministic: no timestamps, no
//! environment-dependent fields, stable field order.

use std::path::Path;

use serde::{Deserialize, Serialize};

use evoad::dataset::Label;
use evoad::ensemble::{EnsembleModel, Metrics};
use evoad::partition::Partition;

use crate::config::CliError;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub voting_rule: String,
    pub point_adjust: bool,
    pub partition: Partition,
    pub submodels: Vec<SubmodelReport>,
    pub confusion: ConfusionReport,
    pub metrics: MetricsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjusted_metrics: Option<MetricsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineReport>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SubmodelReport {
    pub group: Vec<usize>,
    pub threshold: f64,
    pub final_train_loss: f64,
    pub test_scores: ScoreSummary,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

impl ScoreSummary {
    pub fn of(scores: &[f64]) -> ScoreSummary {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for &s in scores {
            min = min.min(s);
            max = max.max(s);
            sum += s;
        }
        ScoreSummary {
            min,
            mean: sum / scores.len().max(1) as f64,
            max,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ConfusionReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MetricsReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BaselineReport {
    pub threshold: f64,
    pub confusion: ConfusionReport,
    pub metrics: MetricsReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adjusted_metrics: Option<MetricsReport>,
}

impl From<&Metrics> for ConfusionReport {
    fn from(m: &Metrics) -> Self {
        ConfusionReport {
            tp: m.tp,
            fp: m.fp,
            fn_: m.fn_,
            tn: m.tn,
        }
    }
}

impl From<&Metrics> for MetricsReport {
    fn from(m: &Metrics) -> Self {
        MetricsReport {
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
        }
    }
}

pub fn submodel_reports(ensemble: &EnsembleModel, test_scores: &[Vec<f64>]) -> Vec<SubmodelReport> {
    ensemble
        .submodels
        .iter()
        .zip(test_scores)
        .map(|(s, scores)| SubmodelReport {
            group: s.group.iter().collect(),
            threshold: s.threshold.unwrap_or(f64::NAN),
            final_train_loss: s.meta.final_loss,
            test_scores: ScoreSummary::of(scores),
        })
        .collect()
}

/// Per-point dump: index, truth, ensemble prediction, one score column
/// per submodel.
pub fn write_scores_csv(
    path: &Path,
    truth: &[Label],
    pred: &[Label],
    scores: &[Vec<f64>],
) -> Result<(), CliError> {
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| CliError::Runtime(format!("scores dump: {e}")))?;
    let mut header = vec!["index".to_string(), "truth".to_string(), "pred".to_string()];
    header.extend((0..scores.len()).map(|i| format!("score_{i}")));
    writer
        .write_record(&header)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    for t in 0..truth.len() {
        let mut record = vec![
            t.to_string(),
            if truth[t].is_anomaly() { "1" } else { "0" }.to_string(),
            if pred[t].is_anomaly() { "1" } else { "0" }.to_string(),
        ];
        record.extend(scores.iter().map(|s| format!("{}", s[t])));
        writer
            .write_record(&record)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    writer.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(())
}

/// Read `truth` and `pred` back from a score dump.
pub fn read_scores_csv(path: &Path) -> Result<(Vec<Label>, Vec<Label>), CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Validation(e.to_string()))?
        .clone();
    let col = |name: &str| -> Result<usize, CliError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Validation(format!("score dump lacks a {name:?} column")))
    };
    let (truth_col, pred_col) = (col("truth")?, col("pred")?);
    let parse = |field: &str, row: usize| -> Result<Label, CliError> {
        match field.trim() {
            "0" => Ok(Label::Normal),
            "1" => Ok(Label::Anomaly),
            other => Err(CliError::Validation(format!(
                "row {row}: label {other:?} is not 0/1"
            ))),
        }
    };
    let mut truth = Vec::new();
    let mut pred = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Validation(e.to_string()))?;
        truth.push(parse(&record[truth_col], row + 1)?);
        pred.push(parse(&record[pred_col], row + 1)?);
    }
    if truth.is_empty() {
        return Err(CliError::Validation("score dump is empty".into()));
    }
    Ok((truth, pred))
}
