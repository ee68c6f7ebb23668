//! Fitness: the negated sum of per-group, size-normalised,
//! train/val-length-weighted reconstruction losses. The aggregation is
//! factored out of the training so it can be verified against hand
//! computations with stubbed losses.

use crate::autoencoders::{family_eval_loss, train_family, ModelFamily};
use crate::dataset::{window, TimeSeries, WindowBatch};
use crate::evolution::{EvolutionConfig, EvolveError};
use crate::partition::Partition;
use crate::seeds;

/// What happened to one group during a fitness evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupOutcome {
    Empty,
    /// Training or evaluation failed (non-finite loss); penalised like
    /// an empty group and logged, never fatal.
    Diverged,
    Trained { train_loss: f64, val_loss: f64 },
}

/// Pure aggregation step: weight each trained group's train/val losses
/// by the dataset lengths, normalise by group size, sum, negate. Empty
/// and diverged groups contribute `penalty_empty`.
pub fn fitness_from_outcomes(
    group_sizes: &[usize],
    outcomes: &[GroupOutcome],
    n_train_points: usize,
    n_val_points: usize,
    penalty_empty: f64,
) -> f64 {
    assert_eq!(group_sizes.len(), outcomes.len());
    let total = (n_train_points + n_val_points) as f64;
    let w_train = n_train_points as f64 / total;
    let w_val = n_val_points as f64 / total;
    let mut contributions: Vec<f64> = group_sizes
        .iter()
        .zip(outcomes)
        .map(|(&size, outcome)| match outcome {
            GroupOutcome::Empty | GroupOutcome::Diverged => penalty_empty,
            GroupOutcome::Trained { train_loss, val_loss } => {
                (w_train * train_loss + w_val * val_loss) / size as f64
            }
        })
        .collect();
    // Summing floats is order-sensitive at the last bit; a canonical
    // order makes the fitness exactly invariant under group permutation.
    contributions.sort_by(f64::total_cmp);
    -contributions.iter().sum::<f64>()
}

/// Train a fresh model on one group and evaluate it on train and
/// validation windows. Divergence is reported, not propagated.
pub fn evaluate_group(
    family: &ModelFamily,
    train_windows: &WindowBatch,
    val_windows: &WindowBatch,
    group: &crate::partition::FeatureGroup,
    fitness_epochs: usize,
    batch_size: usize,
    seed: u64,
) -> GroupOutcome {
    let run = || -> Result<GroupOutcome, crate::autoencoders::TrainError> {
        let tw = train_windows.select_features(group)?;
        let vw = val_windows.select_features(group)?;
        let (nets, _) = train_family(family, &tw, fitness_epochs, batch_size, seed)?;
        let train_loss = family_eval_loss(&nets, &tw)?;
        let val_loss = family_eval_loss(&nets, &vw)?;
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Ok(GroupOutcome::Diverged);
        }
        Ok(GroupOutcome::Trained { train_loss, val_loss })
    };
    match run() {
        Ok(outcome) => outcome,
        Err(err) => {
            log::warn!("group {group:?} penalised after training failure: {err}");
            GroupOutcome::Diverged
        }
    }
}

/// Evaluate a whole solution. Group seeds derive from the group content,
/// so group order never changes the result and identical group sets give
/// identical fitness.
pub fn fitness(
    partition: &Partition,
    train: &TimeSeries,
    val: &TimeSeries,
    cfg: &EvolutionConfig,
) -> Result<f64, EvolveError> {
    partition.validate(train.n_features())?;
    let width = cfg.family.window();
    let train_windows = window(train, width, 1)?;
    let val_windows = window(val, width, 1)?;
    let outcomes: Vec<GroupOutcome> = partition
        .groups()
        .iter()
        .enumerate()
        .map(|(gi, group)| {
            if group.is_empty() {
                GroupOutcome::Empty
            } else {
                let seed = seeds::derive(cfg.seed, "fitness-group", &[partition.content_seed(gi)]);
                evaluate_group(
                    &cfg.family,
                    &train_windows,
                    &val_windows,
                    group,
                    cfg.fitness_epochs,
                    cfg.batch_size,
                    seed,
                )
            }
        })
        .collect();
    let sizes: Vec<usize> = partition.groups().iter().map(|g| g.len()).collect();
    Ok(fitness_from_outcomes(
        &sizes,
        &outcomes,
        train.n_points(),
        val.n_points(),
        cfg.penalty_empty,
    ))
}
