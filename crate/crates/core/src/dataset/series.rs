use serde::{Deserialize, Serialize};

use crate::dataset::DatasetError;
use crate::partition::FeatureGroup;

/// Per-point anomaly label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Normal,
    Anomaly,
}

impl Label {
    pub fn is_anomaly(self) -> bool {
        self == Label::Anomaly
    }
}

/// Feature-major matrix of sensor readings with optional per-point
/// anomaly labels. Rows are time points, columns are features; row
/// order is time order.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Vec<f64>, // row-major [n_points x n_features]
    n_features: usize,
    labels: Option<Vec<Label>>,
    feature_names: Vec<String>,
    sample_period: Option<f64>,
}

impl TimeSeries {
    pub fn new(
        values: Vec<f64>,
        feature_names: Vec<String>,
        labels: Option<Vec<Label>>,
        sample_period: Option<f64>,
    ) -> Result<Self, DatasetError> {
        let n_features = feature_names.len();
        if n_features == 0 {
            return Err(DatasetError::Invalid("a series needs at least one feature".into()));
        }
        if values.is_empty() || !values.len().is_multiple_of(n_features) {
            return Err(DatasetError::Invalid(format!(
                "value buffer of {} does not form rows of {} features",
                values.len(),
                n_features
            )));
        }
        let n_points = values.len() / n_features;
        if let Some(l) = &labels {
            if l.len() != n_points {
                return Err(DatasetError::Invalid(format!(
                    "{} labels for {} points",
                    l.len(),
                    n_points
                )));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for name in &feature_names {
            if !seen.insert(name) {
                return Err(DatasetError::Invalid(format!("duplicate feature name {name:?}")));
            }
        }
        Ok(TimeSeries {
            values,
            n_features,
            labels,
            feature_names,
            sample_period,
        })
    }

    /// Series with generated feature names `f0..f{n-1}`.
    pub fn from_rows(values: Vec<f64>, n_features: usize, labels: Option<Vec<Label>>) -> Result<Self, DatasetError> {
        let names = (0..n_features).map(|i| format!("f{i}")).collect();
        TimeSeries::new(values, names, labels, None)
    }

    pub fn n_points(&self) -> usize {
        self.values.len() / self.n_features
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, point: usize) -> &[f64] {
        &self.values[point * self.n_features..(point + 1) * self.n_features]
    }

    pub fn value(&self, point: usize, feature: usize) -> f64 {
        self.values[point * self.n_features + feature]
    }

    pub fn column(&self, feature: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().skip(feature).step_by(self.n_features).copied()
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn sample_period(&self) -> Option<f64> {
        self.sample_period
    }

    pub fn has_anomalies(&self) -> bool {
        self.labels
            .as_ref()
            .map(|l| l.iter().any(|x| x.is_anomaly()))
            .unwrap_or(false)
    }

    /// Restrict the feature axis to a group, preserving ascending index
    /// order (duplicates inside a group are already collapsed).
    pub fn select_features(&self, group: &FeatureGroup) -> Result<TimeSeries, DatasetError> {
        if group.is_empty() {
            return Err(DatasetError::Invalid("cannot select an empty feature group".into()));
        }
        if let Some(max) = group.max() {
            if max >= self.n_features {
                return Err(DatasetError::FeatureOutOfRange {
                    index: max,
                    n_features: self.n_features,
                });
            }
        }
        let picked: Vec<usize> = group.iter().collect();
        let mut values = Vec::with_capacity(self.n_points() * picked.len());
        for row in self.values.chunks_exact(self.n_features) {
            for &f in &picked {
                values.push(row[f]);
            }
        }
        Ok(TimeSeries {
            values,
            n_features: picked.len(),
            labels: self.labels.clone(),
            feature_names: picked.iter().map(|&f| self.feature_names[f].clone()).collect(),
            sample_period: self.sample_period,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn serie() -> TimeSeries {
        TimeSeries::from_rows(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 3, None).unwrap()
    }

    #[test]
    fn accessors() {
        let ts = serie();
        assert_eq!(ts.n_points(), 2);
        assert_eq!(ts.n_features(), 3);
        assert_eq!(ts.row(1), &[4.0, 5.0, 6.0]);
        assert_eq!(ts.column(2).collect::<Vec<_>>(), vec![3.0, 6.0]);
    }

    #[test]
    fn select_projects_columns() {
        let ts = serie();
        let s = ts.select_features(&FeatureGroup::new([0, 2])).unwrap();
        assert_eq!(s.n_features(), 2);
        assert_eq!(s.values(), &[1.0, 3.0, 4.0, 6.0]);
        assert_eq!(s.feature_names(), &["f0".to_string(), "f2".to_string()]);
    }

    #[test]
    fn select_all_is_identity() {
        let ts = serie();
        let s = ts.select_features(&FeatureGroup::full(3)).unwrap();
        assert_eq!(s, ts);
    }

    #[test]
    fn select_out_of_range_errors() {
        let ts = serie();
        let err = ts.select_features(&FeatureGroup::new([5])).unwrap_err();
        assert!(matches!(err, DatasetError::FeatureOutOfRange { index: 5, .. }));
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = TimeSeries::new(
            vec![1.0, 2.0],
            vec!["a".into(), "a".into()],
            None,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, DatasetError::Invalid(_)));
    }

    #[test]
    fn label_length_must_match() {
        let err = TimeSeries::from_rows(vec![1.0, 2.0], 1, Some(vec![Label::Normal])).unwrap_err();
        assert!(matches!(err, DatasetError::Invalid(_)));
    }
}
