//! The genetic operators: elitist parent selection, group-wise
//! crossover, and the three mutations (move, vanish, new-features).
//! Every operator is pure — it returns a fresh partition and leaves its
//! inputs untouched — and preserves "exactly k groups".

use rand::Rng;

use crate::partition::{FeatureGroup, Partition};

/// Indices of the `n_parents` highest-fitness solutions, ties broken by
/// lower population index.
pub fn select_parents(fitnesses: &[f64], n_parents: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..fitnesses.len()).collect();
    idx.sort_by(|&a, &b| {
        fitnesses[b]
            .partial_cmp(&fitnesses[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    idx.truncate(n_parents);
    idx
}

fn union_min_max(g1: &FeatureGroup, g2: &FeatureGroup) -> Option<(usize, usize)> {
    let lo = match (g1.min(), g2.min()) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => return None,
    };
    let hi = match (g1.max(), g2.max()) {
        (Some(a), Some(b)) => a.max(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => unreachable!(),
    };
    Some((lo, hi))
}

/// The deterministic core of crossover: features of `g1` strictly below
/// the split point joined with features of `g2` strictly above it. The
/// split point itself lands in neither half.
pub fn crossover_group_at(g1: &FeatureGroup, g2: &FeatureGroup, split: usize) -> FeatureGroup {
    FeatureGroup::new(
        g1.iter()
            .filter(|&f| f < split)
            .chain(g2.iter().filter(|&f| f > split)),
    )
}

/// Group-wise crossover of two parents with equal `k`. For each group
/// pair the split point is drawn uniformly (inclusive) from the min/max
/// over the union of both groups; a pair of empty groups yields an empty
/// child group without consuming a draw.
pub fn crossover(a: &Partition, b: &Partition, rng: &mut impl Rng) -> Partition {
    assert_eq!(a.k(), b.k(), "crossover expects parents of equal k");
    let groups = a
        .groups()
        .iter()
        .zip(b.groups())
        .map(|(g1, g2)| match union_min_max(g1, g2) {
            None => FeatureGroup::empty(),
            Some((lo, hi)) => crossover_group_at(g1, g2, rng.gen_range(lo..=hi)),
        })
        .collect();
    Partition::new(groups)
}

/// With probability `p` per group, duplicate one uniformly chosen
/// feature of group `i` into group `(i+1) mod k` (the source keeps its
/// copy; a duplicate already present in the target is a no-op). Empty
/// groups are skipped silently after the probability draw.
pub fn mutate_move(p: &Partition, mutation_prob: f64, rng: &mut impl Rng) -> Partition {
    let mut s = p.clone();
    let k = s.k();
    for i in 0..k {
        if rng.gen::<f64>() < mutation_prob {
            let group = &s.groups()[i];
            if group.is_empty() {
                continue;
            }
            let feature = group.as_slice()[rng.gen_range(0..group.len())];
            s.groups_mut()[(i + 1) % k].insert(feature);
        }
    }
    s
}

/// Remove each occurrence of a feature independently with probability
/// `1 - 1/count`, where `count` is the feature's occurrence count across
/// all groups, frozen before any removal (two-pass semantics). A feature
/// present in exactly one group is never removed.
pub fn mutate_vanish(p: &Partition, rng: &mut impl Rng) -> Partition {
    let n = p
        .groups()
        .iter()
        .filter_map(|g| g.max())
        .max()
        .map(|m| m + 1)
        .unwrap_or(0);
    let counts = p.feature_counts(n);
    let groups = p
        .groups()
        .iter()
        .map(|g| {
            FeatureGroup::new(g.iter().filter(|&f| {
                // removal fires when the draw exceeds 1/count
                let removed = rng.gen::<f64>() > 1.0 / counts[f] as f64;
                !removed
            }))
        })
        .collect();
    Partition::new(groups)
}

/// For every feature of `0..n_features` absent from all groups, add it
/// to each group independently with probability `1 - 1/k`. With `k = 1`
/// the probability is zero and lost features stay lost; that degenerate
/// configuration is logged.
pub fn mutate_new_features(p: &Partition, n_features: usize, rng: &mut impl Rng) -> Partition {
    let k = p.k();
    let mut s = p.clone();
    let threshold = 1.0 / k as f64;
    let mut logged = false;
    for f in 0..n_features {
        if !p.contains_feature(f) {
            if k == 1 && !logged {
                log::warn!("new-features mutation with k=1 can never restore lost features");
                logged = true;
            }
            for gi in 0..k {
                if rng.gen::<f64>() > threshold {
                    s.groups_mut()[gi].insert(f);
                }
            }
        }
    }
    s
}
