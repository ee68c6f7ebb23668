//! Ensemble-level properties: vote-threshold monotonicity, the
//! calibration false-positive bound, and anomaly-score separation on
//! synthetic data.

use evoad::autoencoders::{train_family, CnnAeSpec, ModelFamily, TrainedSubmodel};
use evoad::dataset::{synth_generate, window, AnomalySegment, NormStats, SynthConfig};
use evoad::ensemble::{combine_votes, EnsembleModel, Provenance, VotingRule};
use evoad::partition::FeatureGroup;
use proptest::prelude::*;

fn flagged(scores: &[Vec<f64>], thresholds: &[f64], rule: VotingRule) -> Vec<usize> {
    combine_votes(scores, thresholds, rule)
        .iter()
        .enumerate()
        .filter(|(_, l)| l.is_anomaly())
        .map(|(i, _)| i)
        .collect()
}

proptest! {
    /// any ⊇ majority ⊇ quorum(v): raising the vote threshold can only
    /// shrink the flagged set.
    #[test]
    fn voting_rules_are_monotone(
        raw in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 20), 1..6),
        thr in 0.05f64..0.95,
    ) {
        let v = raw.len();
        let thresholds = vec![thr; v];
        let any = flagged(&raw, &thresholds, VotingRule::Any);
        let majority = flagged(&raw, &thresholds, VotingRule::Majority);
        let quorum_all = flagged(&raw, &thresholds, VotingRule::Quorum(v));
        prop_assert!(majority.iter().all(|i| any.contains(i)), "majority not within any");
        prop_assert!(quorum_all.iter().all(|i| majority.contains(i)), "quorum(v) not within majority");
        // quorum is monotone in q as well
        let mut previous = any.len();
        for q in 1..=v {
            let count = flagged(&raw, &thresholds, VotingRule::Quorum(q)).len();
            prop_assert!(count <= previous, "quorum({}) flagged more than quorum({})", q, q - 1);
            previous = count;
        }
    }
}

fn trained_submodel(seed: u64, n_features: usize, train: &evoad::dataset::TimeSeries, stats: &NormStats) -> TrainedSubmodel {
    let family = ModelFamily::Cnn1d(CnnAeSpec {
        filters: [4, 6, 8],
        ..CnnAeSpec::default()
    });
    let normalised = stats.apply(train).unwrap();
    let batch = window(&normalised, 4, 1).unwrap();
    let (nets, meta) = train_family(&family, &batch, 3, 32, seed).unwrap();
    TrainedSubmodel {
        group: FeatureGroup::full(n_features),
        window: 4,
        nets,
        norm_stats: stats.clone(),
        threshold: None,
        meta,
    }
}

/// Calibrating at percentile p on anomaly-free validation data leaves at
/// most (100 - p)% of that same data above the threshold (plus slack for
/// the interpolated quantile and the pre-window points that share one
/// score).
#[test]
fn calibration_bounds_validation_false_positives() {
    let cfg = SynthConfig {
        n_train: 900,
        n_test: 50,
        n_features: 4,
        n_clusters: 2,
        intra_cluster_corr: 0.8,
        anomaly_segments: vec![],
        seed: 5,
    };
    let (train, _) = synth_generate(&cfg).unwrap();
    let stats = NormStats::fit(&train);
    let submodel = trained_submodel(11, 4, &train, &stats);
    let mut ensemble = EnsembleModel {
        submodels: vec![submodel],
        rule: VotingRule::Any,
        provenance: Provenance::default(),
    };
    for percentile in [95.0, 99.0, 100.0] {
        ensemble.calibrate_thresholds(&train, percentile).unwrap();
        let submodel = &ensemble.submodels[0];
        let scores = submodel.score(&train).unwrap();
        let threshold = submodel.threshold.unwrap();
        let fp = scores.iter().filter(|&&s| s > threshold).count();
        let n = scores.len() as f64;
        let bound = (100.0 - percentile) / 100.0 + 8.0 / n;
        assert!(
            (fp as f64 / n) <= bound,
            "percentile {percentile}: {fp}/{n} validation points above threshold (bound {bound:.4})"
        );
        if percentile == 100.0 {
            assert_eq!(fp, 0, "max threshold must flag nothing on its own data");
        }
    }
}

/// Trained models score injected-anomaly points higher than normal test
/// points (5-seed median of the mean-score ratio).
#[test]
fn anomalies_score_above_normal_points() {
    let mut ratios = Vec::new();
    for seed in 1..=5u64 {
        let cfg = SynthConfig {
            n_train: 900,
            n_test: 300,
            n_features: 4,
            n_clusters: 2,
            intra_cluster_corr: 0.85,
            anomaly_segments: vec![
                AnomalySegment { start: 60, end: 100, cluster: 0, magnitude: 3.0 },
                AnomalySegment { start: 180, end: 230, cluster: 1, magnitude: 3.0 },
            ],
            seed,
        };
        let (train, test) = synth_generate(&cfg).unwrap();
        let stats = NormStats::fit(&train);
        let submodel = trained_submodel(seed, 4, &train, &stats);
        let scores = submodel.score(&test).unwrap();
        let labels = test.labels().unwrap();
        let mean = |anomalous: bool| {
            let picked: Vec<f64> = scores
                .iter()
                .zip(labels)
                .filter(|(_, l)| l.is_anomaly() == anomalous)
                .map(|(&s, _)| s)
                .collect();
            picked.iter().sum::<f64>() / picked.len() as f64
        };
        ratios.push(mean(true) / mean(false));
    }
    ratios.sort_by(f64::total_cmp);
    let median = ratios[2];
    assert!(
        median > 1.0,
        "median anomalous/normal mean-score ratio {median:.3} (all: {ratios:?})"
    );
}
