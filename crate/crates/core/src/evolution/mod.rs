//! The genetic algorithm over feature-group partitions: correlation-
//! clustered initialisation, loss-based fitness, elitist selection,
//! group-wise crossover, and the three mutations.

mod cluster;
mod fitness;
mod operators;
mod run;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::autoencoders::{ModelFamily, TrainError};
use crate::dataset::DatasetError;
use crate::partition::PartitionError;

pub use cluster::{correlation_base_partition, correlation_matrix};
pub use fitness::{evaluate_group, fitness, fitness_from_outcomes, GroupOutcome};
pub use operators::{
    crossover, crossover_group_at, mutate_move, mutate_new_features, mutate_vanish, select_parents,
};
pub use run::{evolve, evolve_with_observer, init_population, EvolveOutcome, GenerationRecord};

#[derive(Debug, Error)]
pub enum EvolveError {
    #[error("invalid evolution configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

/// All genetic-algorithm and fitness-training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    /// Number of groups per solution (maximal number of submodels).
    pub k: usize,
    /// Per-group probability of the moving mutation.
    pub mutation_prob: f64,
    pub n_generations: usize,
    pub population_size: usize,
    /// Parents kept unchanged each generation (elitism).
    pub n_parents: usize,
    /// Training epochs per group while calculating fitness.
    pub fitness_epochs: usize,
    /// Loss contribution of an empty (or diverged) group.
    pub penalty_empty: f64,
    /// Probability of reassigning each feature when jittering the
    /// correlation-clustered base partition.
    pub init_jitter: f64,
    pub batch_size: usize,
    pub family: ModelFamily,
    pub seed: u64,
}

impl EvolutionConfig {
    /// Defaults: population 8, 4 parents, mutation 0.1, 10 generations,
    /// 15 fitness epochs, batch 32.
    pub fn new(k: usize, family: ModelFamily) -> Self {
        EvolutionConfig {
            k,
            mutation_prob: 0.1,
            n_generations: 10,
            population_size: 8,
            n_parents: 4,
            fitness_epochs: 15,
            penalty_empty: 10.0,
            init_jitter: 0.1,
            batch_size: 32,
            family,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), EvolveError> {
        if self.k == 0
            || self.n_generations == 0
            || self.population_size == 0
            || self.n_parents == 0
            || self.fitness_epochs == 0
            || self.batch_size == 0
        {
            return Err(EvolveError::Config("all counts must be >= 1".into()));
        }
        if self.n_parents > self.population_size {
            return Err(EvolveError::Config(format!(
                "n_parents {} exceeds population size {}",
                self.n_parents, self.population_size
            )));
        }
        if !(0.0..=1.0).contains(&self.mutation_prob) {
            return Err(EvolveError::Config(format!(
                "mutation probability {} outside [0, 1]",
                self.mutation_prob
            )));
        }
        if !(0.0..=1.0).contains(&self.init_jitter) {
            return Err(EvolveError::Config(format!(
                "init jitter {} outside [0, 1]",
                self.init_jitter
            )));
        }
        if !self.penalty_empty.is_finite() || self.penalty_empty < 0.0 {
            return Err(EvolveError::Config(format!(
                "penalty_empty {} must be a finite non-negative loss",
                self.penalty_empty
            )));
        }
        Ok(())
    }
}
