use std::path::Path;

use crate::dataset::series::{Label, TimeSeries};
use crate::dataset::DatasetError;

/// Load a CSV with a header row; every non-label column must parse as a
/// real number ('.' decimal separator). When `label_column` is given,
/// that column is removed from the values and parsed as 0 = normal,
/// 1 = anomaly. Column order becomes feature order; rows are reported
/// 1-based in errors.
pub fn load_csv(path: &Path, label_column: Option<&str>) -> Result<TimeSeries, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::NotFound => {
                DatasetError::MissingFile(path.display().to_string())
            }
            _ => DatasetError::Csv(e.to_string()),
        })?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| DatasetError::Csv(e.to_string()))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let label_idx = match label_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DatasetError::MissingLabelColumn(name.to_string()))?,
        ),
        None => None,
    };
    let feature_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != label_idx)
        .map(|(_, h)| h.clone())
        .collect();
    if feature_names.is_empty() {
        return Err(DatasetError::Invalid("no feature columns in CSV".into()));
    }

    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let row = row_idx + 1;
        let record = record.map_err(|e| DatasetError::Csv(e.to_string()))?;
        if record.len() != headers.len() {
            return Err(DatasetError::Csv(format!(
                "row {row} has {} fields, header has {}",
                record.len(),
                headers.len()
            )));
        }
        for (col, field) in record.iter().enumerate() {
            if Some(col) == label_idx {
                let raw: f64 = field.trim().parse().map_err(|_| DatasetError::BadLabel {
                    row,
                    value: field.to_string(),
                })?;
                labels.push(if raw == 0.0 {
                    Label::Normal
                } else if raw == 1.0 {
                    Label::Anomaly
                } else {
                    return Err(DatasetError::BadLabel {
                        row,
                        value: field.to_string(),
                    });
                });
            } else {
                let v: f64 = field.trim().parse().map_err(|_| DatasetError::NonNumericCell {
                    row,
                    column: headers[col].clone(),
                    value: field.to_string(),
                })?;
                values.push(v);
            }
        }
    }
    if values.is_empty() {
        return Err(DatasetError::Invalid(format!("{} has no data rows", path.display())));
    }
    TimeSeries::new(values, feature_names, label_idx.map(|_| labels), None)
}

/// Write a series in the same CSV dialect; the label column (named by
/// `label_column`) is appended only when the series carries labels.
pub fn write_csv(ts: &TimeSeries, path: &Path, label_column: &str) -> Result<(), DatasetError> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| DatasetError::Csv(e.to_string()))?;
    let mut header: Vec<String> = ts.feature_names().to_vec();
    if ts.labels().is_some() {
        header.push(label_column.to_string());
    }
    writer
        .write_record(&header)
        .map_err(|e| DatasetError::Csv(e.to_string()))?;
    for p in 0..ts.n_points() {
        let mut record: Vec<String> = ts.row(p).iter().map(|v| format!("{v}")).collect();
        if let Some(labels) = ts.labels() {
            record.push(if labels[p].is_anomaly() { "1".into() } else { "0".into() });
        }
        writer
            .write_record(&record)
            .map_err(|e| DatasetError::Csv(e.to_string()))?;
    }
    writer.flush().map_err(|e| DatasetError::Csv(e.to_string()))?;
    Ok(())
}
