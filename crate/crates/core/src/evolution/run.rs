use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{window, TimeSeries};
use crate::evolution::cluster::correlation_base_partition;
use crate::evolution::fitness::{evaluate_group, fitness_from_outcomes, GroupOutcome};
use crate::evolution::operators::{
    crossover, mutate_move, mutate_new_features, mutate_vanish, select_parents,
};
use crate::evolution::{EvolutionConfig, EvolveError};
use crate::partition::Partition;
use crate::seeds;

/// One generation of bookkeeping; `best_so_far` is non-decreasing under
/// elitism.
#[derive(Debug, Clone, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub fitness: Vec<f64>,
    pub best_index: usize,
    pub best_fitness: f64,
    pub best_so_far: f64,
    pub best_partition: Partition,
    pub duration_secs: f64,
}

#[derive(Debug, Clone)]
pub struct EvolveOutcome {
    pub best: Partition,
    pub best_fitness: f64,
    pub history: Vec<GenerationRecord>,
}

/// Correlation-clustered base partition plus jittered copies: member 0
/// is the unperturbed base; every other member independently reassigns
/// each feature to a uniformly random group with probability
/// `init_jitter`.
pub fn init_population(train: &TimeSeries, cfg: &EvolutionConfig) -> Result<Vec<Partition>, EvolveError> {
    let n_features = train.n_features();
    if n_features < cfg.k {
        return Err(EvolveError::Config(format!(
            "{} features cannot form k={} groups",
            n_features, cfg.k
        )));
    }
    let base = correlation_base_partition(train, cfg.k)?;
    let mut base_assignment = vec![0usize; n_features];
    for (gi, g) in base.groups().iter().enumerate() {
        for f in g.iter() {
            base_assignment[f] = gi;
        }
    }
    let mut population = Vec::with_capacity(cfg.population_size);
    population.push(base.clone());
    for member in 1..cfg.population_size {
        let mut rng = seeds::rng(cfg.seed, "init", &[member as u64]);
        let mut assignment = base_assignment.clone();
        for slot in assignment.iter_mut() {
            if rng.gen::<f64>() < cfg.init_jitter {
                *slot = rng.gen_range(0..cfg.k);
            }
        }
        let mut groups = vec![Vec::new(); cfg.k];
        for (f, &gi) in assignment.iter().enumerate() {
            groups[gi].push(f);
        }
        population.push(Partition::new(
            groups.into_iter().map(crate::partition::FeatureGroup::new).collect(),
        ));
    }
    Ok(population)
}

/// The generational loop: evaluate everyone, keep the `n_parents` best
/// unchanged (elitism), fill the population back up with mutated
/// crossover offspring. Fitness jobs run in parallel; each `(generation,
/// solution, group)` job owns a derived RNG stream, so the outcome is
/// identical to a sequential run.
pub fn evolve_with_observer(
    train: &TimeSeries,
    val: &TimeSeries,
    cfg: &EvolutionConfig,
    mut on_generation: impl FnMut(&GenerationRecord),
) -> Result<EvolveOutcome, EvolveError> {
    cfg.validate()?;
    let n_features = train.n_features();
    let width = cfg.family.window();
    let train_windows = window(train, width, 1)?;
    let val_windows = window(val, width, 1)?;

    let mut population = init_population(train, cfg)?;
    let mut best: Option<(Partition, f64)> = None;
    let mut history = Vec::with_capacity(cfg.n_generations);

    for generation in 0..cfg.n_generations {
        let started = Instant::now();

        let jobs: Vec<(usize, usize)> = population
            .iter()
            .enumerate()
            .flat_map(|(sol, p)| p.non_empty_groups().map(move |(gi, _)| (sol, gi)))
            .collect();
        let results: Vec<((usize, usize), GroupOutcome)> = jobs
            .par_iter()
            .map(|&(sol, gi)| {
                let seed = seeds::derive(
                    cfg.seed,
                    "fitness",
                    &[generation as u64, sol as u64, gi as u64],
                );
                let outcome = evaluate_group(
                    &cfg.family,
                    &train_windows,
                    &val_windows,
                    population[sol].group(gi),
                    cfg.fitness_epochs,
                    cfg.batch_size,
                    seed,
                );
                ((sol, gi), outcome)
            })
            .collect();
        let mut outcomes: Vec<Vec<GroupOutcome>> = population
            .iter()
            .map(|p| vec![GroupOutcome::Empty; p.k()])
            .collect();
        for ((sol, gi), outcome) in results {
            outcomes[sol][gi] = outcome;
        }

        let fitness: Vec<f64> = population
            .iter()
            .zip(&outcomes)
            .map(|(p, o)| {
                let sizes: Vec<usize> = p.groups().iter().map(|g| g.len()).collect();
                fitness_from_outcomes(&sizes, o, train.n_points(), val.n_points(), cfg.penalty_empty)
            })
            .collect();

        let best_index = select_parents(&fitness, 1)[0];
        let best_fitness = fitness[best_index];
        if best.as_ref().is_none_or(|(_, f)| best_fitness > *f) {
            best = Some((population[best_index].clone(), best_fitness));
        }
        let best_so_far = best.as_ref().map(|(_, f)| *f).unwrap();

        let record = GenerationRecord {
            generation,
            fitness: fitness.clone(),
            best_index,
            best_fitness,
            best_so_far,
            best_partition: population[best_index].clone(),
            duration_secs: started.elapsed().as_secs_f64(),
        };
        on_generation(&record);
        history.push(record);

        // Parents survive unchanged; offspring fill the remaining slots.
        let parent_idx = select_parents(&fitness, cfg.n_parents);
        let parents: Vec<Partition> = parent_idx.iter().map(|&i| population[i].clone()).collect();
        let mut next = parents.clone();
        for child in 0..cfg.population_size - cfg.n_parents {
            let mut rng = seeds::rng(cfg.seed, "offspring", &[generation as u64, child as u64]);
            let a = rng.gen_range(0..parents.len());
            let b = if parents.len() > 1 {
                loop {
                    let b = rng.gen_range(0..parents.len());
                    if b != a {
                        break b;
                    }
                }
            } else {
                a
            };
            let bred = crossover(&parents[a], &parents[b], &mut rng);
            let moved = mutate_move(&bred, cfg.mutation_prob, &mut rng);
            let vanished = mutate_vanish(&moved, &mut rng);
            let refreshed = mutate_new_features(&vanished, n_features, &mut rng);
            next.push(refreshed);
        }
        population = next;
    }

    let (best, best_fitness) = best.expect("at least one generation ran");
    Ok(EvolveOutcome {
        best,
        best_fitness,
        history,
    })
}

pub fn evolve(train: &TimeSeries, val: &TimeSeries, cfg: &EvolutionConfig) -> Result<EvolveOutcome, EvolveError> {
    evolve_with_observer(train, val, cfg, |_| {})
}
