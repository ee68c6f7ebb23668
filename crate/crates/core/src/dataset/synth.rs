//! Synthetic correlated sensor data with injected anomalies — a
//! desk-scale stand-in for licensed plant datasets.
//!
//! Features are organised in clusters that share a sinusoidal latent
//! driver; the mixing weight is chosen so two features of one cluster
//! have Pearson correlation close to `intra_cluster_corr` while features
//! of different clusters stay near zero. An anomaly segment perturbs
//! every feature of one cluster with zero-mean noise whose standard
//! deviation is `magnitude` times the feature's own, in the test set
//! only (a plain level shift would be partially reconstructable by a
//! wide autoencoder; fresh noise never is).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::series::{Label, TimeSeries};
use crate::dataset::DatasetError;
use crate::seeds;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalySegment {
    /// First affected test point (inclusive).
    pub start: usize,
    /// One past the last affected test point.
    pub end: usize,
    /// Cluster whose features are shifted.
    pub cluster: usize,
    /// Shift in units of the feature's standard deviation.
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_train: usize,
    pub n_test: usize,
    pub n_features: usize,
    pub n_clusters: usize,
    pub intra_cluster_corr: f64,
    pub anomaly_segments: Vec<AnomalySegment>,
    pub seed: u64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.n_train == 0 || self.n_test == 0 {
            return Err(DatasetError::Invalid("synth: empty train or test split".into()));
        }
        if self.n_clusters == 0 || self.n_features < self.n_clusters {
            return Err(DatasetError::Invalid(format!(
                "synth: {} features cannot form {} clusters",
                self.n_features, self.n_clusters
            )));
        }
        if !(0.0..=1.0).contains(&self.intra_cluster_corr) {
            return Err(DatasetError::Invalid(format!(
                "synth: intra_cluster_corr {} outside [0, 1]",
                self.intra_cluster_corr
            )));
        }
        for (i, seg) in self.anomaly_segments.iter().enumerate() {
            if seg.start >= seg.end || seg.end > self.n_test {
                return Err(DatasetError::Invalid(format!(
                    "synth: segment {i} [{}, {}) outside the test range 0..{}",
                    seg.start, seg.end, self.n_test
                )));
            }
            if seg.cluster >= self.n_clusters {
                return Err(DatasetError::Invalid(format!(
                    "synth: segment {i} names cluster {} of {}",
                    seg.cluster, self.n_clusters
                )));
            }
            if !seg.magnitude.is_finite() || seg.magnitude < 0.0 {
                return Err(DatasetError::Invalid(format!(
                    "synth: segment {i} magnitude {} invalid",
                    seg.magnitude
                )));
            }
        }
        Ok(())
    }

    /// Even feature-to-cluster assignment, remainder to the last cluster.
    pub fn cluster_of(&self, feature: usize) -> usize {
        let base = self.n_features / self.n_clusters;
        (feature / base).min(self.n_clusters - 1)
    }
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller; clamp away from zero so ln stays finite.
    let u1: f64 = rng.gen::<f64>().max(1e-300);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Generate `(train, test)`; bitwise deterministic for a fixed seed.
/// The train side carries no labels, the test side marks the configured
/// segments (even when their magnitude is zero).
pub fn synth_generate(cfg: &SynthConfig) -> Result<(TimeSeries, TimeSeries), DatasetError> {
    cfg.validate()?;
    let mut rng = seeds::rng(cfg.seed, "synth", &[]);

    // Cluster drivers: distinct frequencies, random phases.
    let phases: Vec<f64> = (0..cfg.n_clusters).map(|_| rng.gen::<f64>() * std::f64::consts::TAU).collect();
    let cycles_per_kpoint: Vec<f64> = (0..cfg.n_clusters).map(|c| 3.0 + 2.0 * c as f64).collect();

    // Per-feature affine placement.
    let offsets: Vec<f64> = (0..cfg.n_features).map(|_| rng.gen::<f64>() * 10.0 - 5.0).collect();
    let scales: Vec<f64> = (0..cfg.n_features).map(|_| 0.5 + rng.gen::<f64>() * 1.5).collect();

    let driver_weight = cfg.intra_cluster_corr.sqrt();
    let noise_weight = (1.0 - cfg.intra_cluster_corr).sqrt();
    let n_total = cfg.n_train + cfg.n_test;

    let mut values = Vec::with_capacity(n_total * cfg.n_features);
    for t in 0..n_total {
        let drivers: Vec<f64> = (0..cfg.n_clusters)
            .map(|c| {
                let angle = std::f64::consts::TAU * cycles_per_kpoint[c] * t as f64 / 1000.0 + phases[c];
                angle.sin() * std::f64::consts::SQRT_2
            })
            .collect();
        for f in 0..cfg.n_features {
            let z = drivers[cfg.cluster_of(f)];
            let e = gaussian(&mut rng);
            values.push(offsets[f] + scales[f] * (driver_weight * z + noise_weight * e));
        }
    }

    let train_values = values[..cfg.n_train * cfg.n_features].to_vec();
    let mut test_values = values[cfg.n_train * cfg.n_features..].to_vec();

    // The perturbation draws from its own stream so segment edits never
    // shift the base series.
    let mut anomaly_rng = seeds::rng(cfg.seed, "synth-anomaly", &[]);
    let mut test_labels = vec![Label::Normal; cfg.n_test];
    for seg in &cfg.anomaly_segments {
        for t in seg.start..seg.end {
            test_labels[t] = Label::Anomaly;
            for f in 0..cfg.n_features {
                if cfg.cluster_of(f) == seg.cluster {
                    test_values[t * cfg.n_features + f] +=
                        seg.magnitude * scales[f] * gaussian(&mut anomaly_rng);
                }
            }
        }
    }

    let names: Vec<String> = (0..cfg.n_features)
        .map(|f| format!("c{}_s{}", cfg.cluster_of(f), f))
        .collect();
    let train = TimeSeries::new(train_values, names.clone(), None, Some(1.0))?;
    let test = TimeSeries::new(test_values, names, Some(test_labels), Some(1.0))?;
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_cfg() -> SynthConfig {
        SynthConfig {
            n_train: 2000,
            n_test: 500,
            n_features: 9,
            n_clusters: 3,
            intra_cluster_corr: 0.9,
            anomaly_segments: vec![AnomalySegment {
                start: 100,
                end: 150,
                cluster: 1,
                magnitude: 3.0,
            }],
            seed: 7,
        }
    }

    fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let mut cov = 0.0;
        let mut vx = 0.0;
        let mut vy = 0.0;
        for (&x, &y) in xs.iter().zip(ys) {
            cov += (x - mx) * (y - my);
            vx += (x - mx) * (x - mx);
            vy += (y - my) * (y - my);
        }
        cov / (vx.sqrt() * vy.sqrt())
    }

    #[test]
    fn same_seed_is_bitwise_identical() {
        let cfg = base_cfg();
        let (a_train, a_test) = synth_generate(&cfg).unwrap();
        let (b_train, b_test) = synth_generate(&cfg).unwrap();
        assert_eq!(a_train, b_train);
        assert_eq!(a_test, b_test);
    }

    #[test]
    fn zero_magnitude_marks_labels_but_not_values() {
        let mut cfg = base_cfg();
        cfg.anomaly_segments[0].magnitude = 0.0;
        let (_, test) = synth_generate(&cfg).unwrap();
        let mut clean = cfg.clone();
        clean.anomaly_segments.clear();
        let (_, unperturbed) = synth_generate(&clean).unwrap();
        assert_eq!(test.values(), unperturbed.values());
        assert_eq!(test.labels().unwrap()[120], Label::Anomaly);
        assert_eq!(test.labels().unwrap()[50], Label::Normal);
    }

    #[test]
    fn train_side_has_no_anomalies() {
        let (train, _) = synth_generate(&base_cfg()).unwrap();
        assert!(!train.has_anomalies());
    }

    #[test]
    fn intra_cluster_correlation_dominates() {
        let (train, _) = synth_generate(&base_cfg()).unwrap();
        let col = |f: usize| train.column(f).collect::<Vec<_>>();
        let within = pearson(&col(0), &col(1));
        let across = pearson(&col(0), &col(4));
        assert!(
            within > across.abs(),
            "within-cluster {within} should dominate cross-cluster {across}"
        );
        assert!(within > 0.7, "within-cluster correlation too weak: {within}");
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut cfg = base_cfg();
        cfg.n_clusters = 12;
        assert!(synth_generate(&cfg).is_err());

        let mut cfg = base_cfg();
        cfg.anomaly_segments[0].end = 10_000;
        assert!(synth_generate(&cfg).is_err());

        let mut cfg = base_cfg();
        cfg.anomaly_segments[0].cluster = 5;
        assert!(synth_generate(&cfg).is_err());
    }
}
