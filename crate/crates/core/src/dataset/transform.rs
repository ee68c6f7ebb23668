use crate::dataset::series::{Label, TimeSeries};
use crate::dataset::DatasetError;
use crate::nn::{Scalar, Tensor};
use crate::partition::FeatureGroup;

/// Aggregate consecutive non-overlapping buckets of `ratio` points:
/// values by mean, labels by any-anomaly. A trailing partial bucket is
/// kept and aggregated rather than dropped.
pub fn downsample(ts: &TimeSeries, ratio: usize) -> Result<TimeSeries, DatasetError> {
    if ratio == 0 {
        return Err(DatasetError::Invalid("downsample ratio must be >= 1".into()));
    }
    if ratio == 1 {
        return Ok(ts.clone());
    }
    let n = ts.n_features();
    let n_points = ts.n_points();
    let n_out = n_points.div_ceil(ratio);
    let mut values = Vec::with_capacity(n_out * n);
    for bucket in 0..n_out {
        let start = bucket * ratio;
        let end = (start + ratio).min(n_points);
        let len = (end - start) as f64;
        for f in 0..n {
            let mut sum = 0.0;
            for p in start..end {
                sum += ts.value(p, f);
            }
            values.push(sum / len);
        }
    }
    let labels = ts.labels().map(|labels| {
        (0..n_out)
            .map(|bucket| {
                let start = bucket * ratio;
                let end = (start + ratio).min(n_points);
                if labels[start..end].iter().any(|l| l.is_anomaly()) {
                    Label::Anomaly
                } else {
                    Label::Normal
                }
            })
            .collect()
    });
    TimeSeries::new(values, ts.feature_names().to_vec(), labels, ts.sample_period().map(|p| p * ratio as f64))
}

/// Chronological split: the first `1 - val_fraction` of the points form
/// the training side, the remainder the validation side. Labelled input
/// must be anomaly-free. `min_points` is the largest window any
/// configured model will ask for; a side shorter than that is an error.
pub fn split_train_val(
    ts: &TimeSeries,
    val_fraction: f64,
    min_points: usize,
) -> Result<(TimeSeries, TimeSeries), DatasetError> {
    if !(0.0..1.0).contains(&val_fraction) || val_fraction == 0.0 {
        return Err(DatasetError::Invalid(format!(
            "val_fraction {val_fraction} outside (0, 1)"
        )));
    }
    if ts.has_anomalies() {
        return Err(DatasetError::Invalid(
            "train/validation split expects anomaly-free data".into(),
        ));
    }
    let n = ts.n_points();
    let n_train = ((n as f64) * (1.0 - val_fraction)).floor() as usize;
    let n_val = n - n_train;
    if n_train < min_points.max(1) || n_val < min_points.max(1) {
        return Err(DatasetError::SplitTooSmall {
            n_train,
            n_val,
            min_points: min_points.max(1),
        });
    }
    let take = |from: usize, to: usize| -> Result<TimeSeries, DatasetError> {
        TimeSeries::new(
            ts.values()[from * ts.n_features()..to * ts.n_features()].to_vec(),
            ts.feature_names().to_vec(),
            ts.labels().map(|l| l[from..to].to_vec()),
            ts.sample_period(),
        )
    };
    Ok((take(0, n_train)?, take(n_train, n)?))
}

/// Sliding-window view over a series: `n_windows` sub-sequences of
/// `width` points taken every `stride` points.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowBatch {
    data: Vec<f64>, // [n_windows x width x n_features]
    n_windows: usize,
    width: usize,
    stride: usize,
    n_features: usize,
    origin_index: Vec<usize>,
}

impl WindowBatch {
    pub fn n_windows(&self) -> usize {
        self.n_windows
    }
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn stride(&self) -> usize {
        self.stride
    }
    pub fn n_features(&self) -> usize {
        self.n_features
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Index of the source point each window ends on (strictly increasing).
    pub fn origin_index(&self) -> &[usize] {
        &self.origin_index
    }

    pub fn window(&self, i: usize) -> &[f64] {
        let per = self.width * self.n_features;
        &self.data[i * per..(i + 1) * per]
    }

    /// Restrict the feature axis to a group.
    pub fn select_features(&self, group: &FeatureGroup) -> Result<WindowBatch, DatasetError> {
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
        let mut data = Vec::with_capacity(self.n_windows * self.width * picked.len());
        for row in self.data.chunks_exact(self.n_features) {
            for &f in &picked {
                data.push(row[f]);
            }
        }
        Ok(WindowBatch {
            data,
            n_windows: self.n_windows,
            width: self.width,
            stride: self.stride,
            n_features: picked.len(),
            origin_index: self.origin_index.clone(),
        })
    }

    /// Tensor of shape `[n_windows, width, n_features]`.
    pub fn to_tensor<T: Scalar>(&self) -> Tensor<T> {
        Tensor::from_vec(
            &[self.n_windows, self.width, self.n_features],
            self.data.iter().map(|&v| T::from_f64(v)).collect(),
        )
    }

    /// Tensor of shape `[n_windows, width * n_features]` for dense models.
    pub fn to_flat_tensor<T: Scalar>(&self) -> Tensor<T> {
        self.to_tensor::<T>().reshaped(&[self.n_windows, self.width * self.n_features])
    }
}

/// Cut a series into sliding windows; window `i` covers points
/// `[i*stride, i*stride + width)`, so
/// `n_windows = (n_points - width) / stride + 1`.
pub fn window(ts: &TimeSeries, width: usize, stride: usize) -> Result<WindowBatch, DatasetError> {
    if width == 0 || stride == 0 {
        return Err(DatasetError::Invalid("window width and stride must be >= 1".into()));
    }
    let n_points = ts.n_points();
    if width > n_points {
        return Err(DatasetError::WindowTooWide {
            width,
            n_points,
        });
    }
    let n_windows = (n_points - width) / stride + 1;
    let n = ts.n_features();
    let mut data = Vec::with_capacity(n_windows * width * n);
    let mut origin_index = Vec::with_capacity(n_windows);
    for i in 0..n_windows {
        let start = i * stride;
        data.extend_from_slice(&ts.values()[start * n..(start + width) * n]);
        origin_index.push(start + width - 1);
    }
    Ok(WindowBatch {
        data,
        n_windows,
        width,
        stride,
        n_features: n,
        origin_index,
    })
}
