//! Shared data-preparation path: resolve the dataset source, downsample,
//! split chronologically, fit normalisation on the training side only.

use evoad::dataset::{
    downsample, load_csv, split_train_val, synth_generate, NormStats, TimeSeries,
};

use crate::config::{CliError, RunConfig};

/// Everything the evolve and train-eval commands need.
pub struct PreparedData {
    /// Normalised training split (fed to fitness and final training).
    pub train: TimeSeries,
    /// Normalised validation split (fed to fitness).
    pub val: TimeSeries,
    /// Downsampled, unnormalised validation split (threshold
    /// calibration; submodels normalise internally).
    pub val_raw: TimeSeries,
    /// Fitted per-feature stats (identity when normalisation is off).
    pub stats: NormStats,
}

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

/// Raw training series from whichever source the config names.
pub fn load_train_series(cfg: &RunConfig) -> Result<TimeSeries, CliError> {
    if let Some(csv) = &cfg.dataset.csv {
        let has_label = {
            // peek at the header: the train file may or may not carry the label column
            let text = std::fs::read_to_string(&csv.train)
                .map_err(|e| validation(format!("{}: {e}", csv.train.display())))?;
            text.lines()
                .next()
                .map(|h| h.split(',').any(|c| c.trim() == csv.label_column))
                .unwrap_or(false)
        };
        let label = has_label.then_some(csv.label_column.as_str());
        let ts = load_csv(&csv.train, label).map_err(validation)?;
        if ts.has_anomalies() {
            return Err(CliError::Validation(
                "training data contains anomaly labels; training expects normal data only".into(),
            ));
        }
        Ok(ts)
    } else if let Some(synth) = &cfg.dataset.synth {
        let (train, _) = synth_generate(&cfg.synth_config(synth)).map_err(validation)?;
        Ok(train)
    } else {
        Err(CliError::Validation("no dataset source configured".into()))
    }
}

/// Raw labelled test series; required by train-eval.
pub fn load_test_series(cfg: &RunConfig) -> Result<TimeSeries, CliError> {
    if let Some(csv) = &cfg.dataset.csv {
        let test = csv
            .test
            .as_ref()
            .ok_or_else(|| CliError::Validation("dataset.csv.test is required for evaluation".into()))?;
        let ts = load_csv(test, Some(csv.label_column.as_str())).map_err(validation)?;
        Ok(ts)
    } else if let Some(synth) = &cfg.dataset.synth {
        let (_, test) = synth_generate(&cfg.synth_config(synth)).map_err(validation)?;
        Ok(test)
    } else {
        Err(CliError::Validation("no dataset source configured".into()))
    }
}

/// Downsample/split/normalise the training series per the configured
/// order. The largest model window bounds the smallest admissible side.
pub fn prepare(cfg: &RunConfig, train_raw: &TimeSeries) -> Result<PreparedData, CliError> {
    let width = cfg.model_family().window();
    let pp = &cfg.preprocess;
    let (train_side, val_side) = if pp.downsample_first {
        let ds = downsample(train_raw, pp.downsample_ratio).map_err(validation)?;
        split_train_val(&ds, pp.val_fraction, width).map_err(validation)?
    } else {
        let (t, v) = split_train_val(train_raw, pp.val_fraction, width).map_err(validation)?;
        (
            downsample(&t, pp.downsample_ratio).map_err(validation)?,
            downsample(&v, pp.downsample_ratio).map_err(validation)?,
        )
    };
    if train_side.n_points() < width || val_side.n_points() < width {
        return Err(CliError::Validation(format!(
            "downsampled split too short for window {width}: {} train / {} validation points",
            train_side.n_points(),
            val_side.n_points()
        )));
    }
    let stats = if pp.normalize {
        NormStats::fit(&train_side)
    } else {
        NormStats::identity(train_side.n_features())
    };
    Ok(PreparedData {
        train: stats.apply(&train_side).map_err(validation)?,
        val: stats.apply(&val_side).map_err(validation)?,
        val_raw: val_side,
        stats,
    })
}

/// Downsampled raw test series (labels aggregated by any-anomaly).
pub fn prepare_test(cfg: &RunConfig, test_raw: &TimeSeries) -> Result<TimeSeries, CliError> {
    downsample(test_raw, cfg.preprocess.downsample_ratio).map_err(validation)
}
