//! Loading, normalising, downsampling, splitting, windowing and
//! synthesising labelled multivariate time series. All operations are
//! pure: they never mutate their inputs.

mod csv_io;
mod normalize;
mod series;
mod synth;
mod transform;

use thiserror::Error;

pub use csv_io::{load_csv, write_csv};
pub use normalize::NormStats;
pub use series::{Label, TimeSeries};
pub use synth::{synth_generate, AnomalySegment, SynthConfig};
pub use transform::{downsample, split_train_val, window, WindowBatch};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("file not found: {0}")]
    MissingFile(String),
    #[error("csv error: {0}")]
    Csv(String),
    #[error("non-numeric cell {value:?} at row {row}, column {column}")]
    NonNumericCell { row: usize, column: String, value: String },
    #[error("label {value:?} at row {row} is outside {{0, 1}}")]
    BadLabel { row: usize, value: String },
    #[error("label column {0:?} not present in header")]
    MissingLabelColumn(String),
    #[error("normalisation stats cover {stats} features, series has {series}")]
    StatsMismatch { stats: usize, series: usize },
    #[error("feature index {index} out of range for {n_features} features")]
    FeatureOutOfRange { index: usize, n_features: usize },
    #[error("window of {width} points does not fit a series of {n_points}")]
    WindowTooWide { width: usize, n_points: usize },
    #[error("split leaves {n_train} train / {n_val} validation points, need at least {min_points} on each side")]
    SplitTooSmall { n_train: usize, n_val: usize, min_points: usize },
    #[error("{0}")]
    Invalid(String),
}
