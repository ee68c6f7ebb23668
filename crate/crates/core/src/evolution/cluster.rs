//! Correlation-driven initial partition: hierarchical agglomerative
//! clustering (average linkage) over the distance `1 - |pearson|`.

use crate::dataset::TimeSeries;
use crate::evolution::EvolveError;
use crate::partition::{FeatureGroup, Partition};

/// Pearson correlation matrix of the features. A zero-variance feature
/// correlates 0 with everything else by convention (diagonal stays 1).
pub fn correlation_matrix(ts: &TimeSeries) -> Vec<f64> {
    let n = ts.n_features();
    let points = ts.n_points() as f64;
    let mut mean = vec![0.0f64; n];
    for row in ts.values().chunks_exact(n) {
        for (m, &v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= points;
    }
    // covariance and variance accumulators
    let mut cov = vec![0.0f64; n * n];
    let mut var = vec![0.0f64; n];
    for row in ts.values().chunks_exact(n) {
        for i in 0..n {
            let di = row[i] - mean[i];
            var[i] += di * di;
            for j in (i + 1)..n {
                cov[i * n + j] += di * (row[j] - mean[j]);
            }
        }
    }
    let mut corr = vec![0.0f64; n * n];
    for i in 0..n {
        corr[i * n + i] = 1.0;
        for j in (i + 1)..n {
            let denom = (var[i] * var[j]).sqrt();
            let c = if denom > 0.0 { cov[i * n + j] / denom } else { 0.0 };
            corr[i * n + j] = c;
            corr[j * n + i] = c;
        }
    }
    corr
}

/// Cut an average-linkage dendrogram at `k` clusters and return the
/// clusters as a partition, ordered by smallest member index. Ties on
/// merge distance resolve towards the lowest cluster indices, so the
/// result is deterministic.
pub fn correlation_base_partition(ts: &TimeSeries, k: usize) -> Result<Partition, EvolveError> {
    let n = ts.n_features();
    if k == 0 || n < k {
        return Err(EvolveError::Config(format!(
            "cannot cut {n} features into {k} clusters"
        )));
    }
    let corr = correlation_matrix(ts);
    let mut dist = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = if i == j { 0.0 } else { 1.0 - corr[i * n + j].abs() };
        }
    }

    let mut members: Vec<Vec<usize>> = (0..n).map(|f| vec![f]).collect();
    let mut alive: Vec<bool> = vec![true; n];
    let mut n_alive = n;
    while n_alive > k {
        let mut best = (usize::MAX, usize::MAX, f64::INFINITY);
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            for j in (i + 1)..n {
                if !alive[j] {
                    continue;
                }
                let d = dist[i * n + j];
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        let (i, j, _) = best;
        // average linkage: size-weighted mean of the merged distances
        let (si, sj) = (members[i].len() as f64, members[j].len() as f64);
        for other in 0..n {
            if !alive[other] || other == i || other == j {
                continue;
            }
            let d = (si * dist[i * n + other] + sj * dist[j * n + other]) / (si + sj);
            dist[i * n + other] = d;
            dist[other * n + i] = d;
        }
        let moved = std::mem::take(&mut members[j]);
        members[i].extend(moved);
        alive[j] = false;
        n_alive -= 1;
    }

    let mut groups: Vec<FeatureGroup> = members
        .into_iter()
        .zip(alive)
        .filter(|(_, a)| *a)
        .map(|(m, _)| FeatureGroup::new(m))
        .collect();
    groups.sort_by_key(|g| g.min().unwrap_or(usize::MAX));
    Ok(Partition::new(groups))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Three trios of identical columns must cluster back into trios.
    #[test]
    fn perfectly_correlated_trios_cluster_together() {
        let n_points = 64;
        let mut values = Vec::new();
        for t in 0..n_points {
            let drivers = [
                (t as f64 * 0.3).sin(),
                (t as f64 * 0.7).cos(),
                (t as f64 * 0.11).sin() * 2.0 + 0.3,
            ];
            for d in drivers {
                values.extend_from_slice(&[d, d * 2.0, -d]);
            }
        }
        let ts = TimeSeries::from_rows(values, 9, None).unwrap();
        let base = correlation_base_partition(&ts, 3).unwrap();
        let groups: Vec<Vec<usize>> = base.groups().iter().map(|g| g.iter().collect()).collect();
        assert_eq!(groups, vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]]);
    }

    #[test]
    fn k_equal_to_features_gives_singletons() {
        let ts = TimeSeries::from_rows((0..40).map(|i| i as f64 * 0.7).collect(), 4, None).unwrap();
        let base = correlation_base_partition(&ts, 4).unwrap();
        assert_eq!(base.k(), 4);
        assert!(base.groups().iter().all(|g| g.len() == 1));
    }

    #[test]
    fn zero_variance_feature_correlates_zero() {
        let values = vec![
            1.0, 7.0, //
            2.0, 7.0, //
            3.0, 7.0,
        ];
        let ts = TimeSeries::from_rows(values, 2, None).unwrap();
        let corr = correlation_matrix(&ts);
        assert_eq!(corr[0], 1.0);
        assert_eq!(corr[3], 1.0);
        assert_eq!(corr[1], 0.0);
        assert_eq!(corr[2], 0.0);
    }

    #[test]
    fn too_many_clusters_rejected() {
        let ts = TimeSeries::from_rows(vec![0.0, 1.0], 2, None).unwrap();
        assert!(correlation_base_partition(&ts, 3).is_err());
    }
}
