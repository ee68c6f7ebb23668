//! Final ensemble: train one submodel per non-empty group of the best
//! partition, calibrate per-submodel thresholds on clean validation
//! data, vote per point, and score the predictions.

mod metrics;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autoencoders::{train_family, ModelFamily, TrainError, TrainedSubmodel};
use crate::dataset::{window, DatasetError, Label, NormStats, TimeSeries};
use crate::partition::Partition;
use crate::seeds;

pub use metrics::{evaluate, percentile_linear, point_adjust, Metrics};

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("every group of the partition is empty")]
    NoSubmodels,
    #[error("ensemble is not calibrated (submodel {0} has no threshold)")]
    Uncalibrated(usize),
    #[error("calibration percentile {0} outside (50, 100]")]
    BadPercentile(f64),
    #[error("prediction of {pred} points scored against {truth} truth labels")]
    LengthMismatch { pred: usize, truth: usize },
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

/// How per-submodel votes combine into the ensemble decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VotingRule {
    /// Anomaly when votes reach `ceil(v / 2)` of `v` submodels.
    Majority,
    /// Anomaly on any single vote.
    Any,
    /// Anomaly when votes reach the fixed quorum.
    Quorum(usize),
}

impl VotingRule {
    pub fn votes_needed(&self, n_submodels: usize) -> usize {
        match *self {
            VotingRule::Majority => n_submodels.div_ceil(2),
            VotingRule::Any => 1,
            VotingRule::Quorum(q) => q,
        }
    }
}

/// Where the ensemble's partition came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub run_id: String,
    pub generation: Option<usize>,
}

pub struct EnsembleModel {
    pub submodels: Vec<TrainedSubmodel>,
    pub rule: VotingRule,
    pub provenance: Provenance,
}

/// Final-training parameters.
#[derive(Debug, Clone)]
pub struct FinalTrainConfig {
    pub family: ModelFamily,
    pub final_epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

/// Seed stream of the submodel trained on group `group_idx`; training a
/// standalone model with this seed reproduces the ensemble member bit
/// for bit.
pub fn submodel_seed(master: u64, group_idx: usize) -> u64 {
    seeds::derive(master, "final", &[group_idx as u64])
}

/// Train one submodel per non-empty group on normalised training data.
/// Empty groups are skipped with a log entry; a partition with no
/// features at all is a configuration error. Submodels train in
/// parallel, each on its own derived seed.
pub fn train_ensemble(
    partition: &Partition,
    train_normalised: &TimeSeries,
    stats: &NormStats,
    cfg: &FinalTrainConfig,
    provenance: Provenance,
) -> Result<EnsembleModel, EnsembleError> {
    let width = cfg.family.window();
    let train_windows = window(train_normalised, width, 1)?;
    let jobs: Vec<(usize, &crate::partition::FeatureGroup)> = partition
        .groups()
        .iter()
        .enumerate()
        .filter(|(_, g)| !g.is_empty())
        .collect();
    for (gi, g) in partition.groups().iter().enumerate() {
        if g.is_empty() {
            log::info!("skipping empty group {gi} of the partition");
        }
    }
    if jobs.is_empty() {
        return Err(EnsembleError::NoSubmodels);
    }
    let submodels: Vec<Result<TrainedSubmodel, EnsembleError>> = jobs
        .par_iter()
        .map(|&(gi, group)| {
            let seed = submodel_seed(cfg.seed, gi);
            let selected = train_windows.select_features(group)?;
            let (nets, meta) = train_family(&cfg.family, &selected, cfg.final_epochs, cfg.batch_size, seed)?;
            Ok(TrainedSubmodel {
                group: group.clone(),
                window: width,
                nets,
                norm_stats: stats.select(group)?,
                threshold: None,
                meta,
            })
        })
        .collect();
    let submodels = submodels.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(EnsembleModel {
        submodels,
        rule: VotingRule::Majority,
        provenance,
    })
}

impl EnsembleModel {
    pub fn is_calibrated(&self) -> bool {
        self.submodels.iter().all(|s| s.threshold.is_some())
    }

    /// Set each submodel's threshold to the given percentile (linear
    /// interpolation) of its scores on anomaly-free validation data.
    pub fn calibrate_thresholds(&mut self, val: &TimeSeries, percentile: f64) -> Result<(), EnsembleError> {
        if !(50.0..=100.0).contains(&percentile) || percentile == 50.0 {
            return Err(EnsembleError::BadPercentile(percentile));
        }
        for submodel in self.submodels.iter_mut() {
            let mut scores = submodel.score(val)?;
            scores.sort_by(f64::total_cmp);
            submodel.threshold = Some(percentile_linear(&scores, percentile));
        }
        Ok(())
    }

    /// Per-submodel score series for a raw series (scoring normalises
    /// internally). Parallel across submodels.
    pub fn score_all(&self, ts: &TimeSeries) -> Result<Vec<Vec<f64>>, EnsembleError> {
        let scores: Vec<Result<Vec<f64>, TrainError>> =
            self.submodels.par_iter().map(|s| s.score(ts)).collect();
        Ok(scores.into_iter().collect::<Result<Vec<_>, _>>()?)
    }

    /// Threshold every submodel's scores and combine the votes.
    pub fn vote(&self, ts: &TimeSeries) -> Result<Vec<Label>, EnsembleError> {
        let thresholds: Vec<f64> = self
            .submodels
            .iter()
            .enumerate()
            .map(|(i, s)| s.threshold.ok_or(EnsembleError::Uncalibrated(i)))
            .collect::<Result<_, _>>()?;
        let scores = self.score_all(ts)?;
        Ok(combine_votes(&scores, &thresholds, self.rule))
    }
}

/// Pure voting core: submodel `i` votes anomaly at point `t` iff
/// `scores[i][t] > thresholds[i]`; the rule decides how many votes flag
/// the point.
pub fn combine_votes(scores: &[Vec<f64>], thresholds: &[f64], rule: VotingRule) -> Vec<Label> {
    assert_eq!(scores.len(), thresholds.len());
    assert!(!scores.is_empty());
    let n_points = scores[0].len();
    let needed = rule.votes_needed(scores.len());
    (0..n_points)
        .map(|t| {
            let votes = scores
                .iter()
                .zip(thresholds)
                .filter(|(s, &thr)| s[t] > thr)
                .count();
            if votes >= needed {
                Label::Anomaly
            } else {
                Label::Normal
            }
        })
        .collect()
}
