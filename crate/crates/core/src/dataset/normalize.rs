use serde::{Deserialize, Serialize};

use crate::dataset::series::TimeSeries;
use crate::dataset::DatasetError;
use crate::partition::FeatureGroup;

/// Per-feature min/max, fitted on training data only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl NormStats {
    /// Fit per-feature minima and maxima.
    pub fn fit(ts: &TimeSeries) -> NormStats {
        let n = ts.n_features();
        let mut min = vec![f64::INFINITY; n];
        let mut max = vec![f64::NEG_INFINITY; n];
        for row in ts.values().chunks_exact(n) {
            for (f, &v) in row.iter().enumerate() {
                if v < min[f] {
                    min[f] = v;
                }
                if v > max[f] {
                    max[f] = v;
                }
            }
        }
        NormStats { min, max }
    }

    /// Rebuild stats from stored vectors, enforcing `min <= max`.
    pub fn from_min_max(min: Vec<f64>, max: Vec<f64>) -> Result<NormStats, DatasetError> {
        if min.len() != max.len() || min.is_empty() {
            return Err(DatasetError::Invalid(format!(
                "norm stats of {} minima vs {} maxima",
                min.len(),
                max.len()
            )));
        }
        if min.iter().zip(&max).any(|(lo, hi)| lo > hi) {
            return Err(DatasetError::Invalid("norm stats with min > max".into()));
        }
        Ok(NormStats { min, max })
    }

    /// Pass-through stats (min 0, max 1) for a disabled-normalisation run.
    pub fn identity(n_features: usize) -> NormStats {
        NormStats {
            min: vec![0.0; n_features],
            max: vec![1.0; n_features],
        }
    }

    pub fn n_features(&self) -> usize {
        self.min.len()
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    fn check(&self, ts: &TimeSeries) -> Result<(), DatasetError> {
        if ts.n_features() != self.n_features() {
            return Err(DatasetError::StatsMismatch {
                stats: self.n_features(),
                series: ts.n_features(),
            });
        }
        Ok(())
    }

    /// Map every feature to `(x - min) / (max - min)`; constant features
    /// map to 0. Out-of-range inputs are allowed (test data may exceed
    /// the training range).
    pub fn apply(&self, ts: &TimeSeries) -> Result<TimeSeries, DatasetError> {
        self.check(ts)?;
        let n = ts.n_features();
        let span: Vec<f64> = self.min.iter().zip(&self.max).map(|(&lo, &hi)| hi - lo).collect();
        let mut values = Vec::with_capacity(ts.values().len());
        for row in ts.values().chunks_exact(n) {
            for (f, &v) in row.iter().enumerate() {
                values.push(if span[f] > 0.0 { (v - self.min[f]) / span[f] } else { 0.0 });
            }
        }
        TimeSeries::new(
            values,
            ts.feature_names().to_vec(),
            ts.labels().map(|l| l.to_vec()),
            ts.sample_period(),
        )
    }

    /// Invert [`NormStats::apply`] for features with `max > min`
    /// (constant features stay at their minimum).
    pub fn invert(&self, ts: &TimeSeries) -> Result<TimeSeries, DatasetError> {
        self.check(ts)?;
        let n = ts.n_features();
        let mut values = Vec::with_capacity(ts.values().len());
        for row in ts.values().chunks_exact(n) {
            for (f, &v) in row.iter().enumerate() {
                let span = self.max[f] - self.min[f];
                values.push(if span > 0.0 { v * span + self.min[f] } else { self.min[f] });
            }
        }
        TimeSeries::new(
            values,
            ts.feature_names().to_vec(),
            ts.labels().map(|l| l.to_vec()),
            ts.sample_period(),
        )
    }

    /// Stats restricted to a feature group, in group order.
    pub fn select(&self, group: &FeatureGroup) -> Result<NormStats, DatasetError> {
        if let Some(max) = group.max() {
            if max >= self.n_features() {
                return Err(DatasetError::FeatureOutOfRange {
                    index: max,
                    n_features: self.n_features(),
                });
            }
        }
        Ok(NormStats {
            min: group.iter().map(|f| self.min[f]).collect(),
            max: group.iter().map(|f| self.max[f]).collect(),
        })
    }
}
