use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::ensemble::EnsembleError;

/// Point-wise confusion counts and derived scores, anomaly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

/// Point-wise precision/recall/F1 with anomaly as the positive class;
/// zero denominators yield zero scores.
pub fn evaluate(pred: &[Label], truth: &[Label]) -> Result<Metrics, EnsembleError> {
    if pred.len() != truth.len() {
        return Err(EnsembleError::LengthMismatch {
            pred: pred.len(),
            truth: truth.len(),
        });
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &t) in pred.iter().zip(truth) {
        match (p.is_anomaly(), t.is_anomaly()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let precision = if tp + fp > 0 { tp as f64 / (tp + fp) as f64 } else { 0.0 };
    let recall = if tp + fn_ > 0 { tp as f64 / (tp + fn_) as f64 } else { 0.0 };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(Metrics {
        precision,
        recall,
        f1,
        tp,
        fp,
        fn_,
        tn,
    })
}

/// Segment-level credit: if any point of a contiguous true-anomaly
/// segment is predicted anomalous, the whole segment counts as
/// predicted. Predictions outside true segments are unchanged. Off by
/// default in evaluation reports.
pub fn point_adjust(pred: &[Label], truth: &[Label]) -> Result<Vec<Label>, EnsembleError> {
    if pred.len() != truth.len() {
        return Err(EnsembleError::LengthMismatch {
            pred: pred.len(),
            truth: truth.len(),
        });
    }
    let mut adjusted = pred.to_vec();
    let mut i = 0;
    while i < truth.len() {
        if truth[i].is_anomaly() {
            let start = i;
            while i < truth.len() && truth[i].is_anomaly() {
                i += 1;
            }
            if pred[start..i].iter().any(|p| p.is_anomaly()) {
                for slot in adjusted[start..i].iter_mut() {
                    *slot = Label::Anomaly;
                }
            }
        } else {
            i += 1;
        }
    }
    Ok(adjusted)
}

/// Linear-interpolation percentile over a sorted slice: at rank
/// `p/100 * (n-1)` the two neighbouring order statistics are blended.
pub fn percentile_linear(sorted: &[f64], percentile: f64) -> f64 {
    assert!(!sorted.is_empty());
    assert!((0.0..=100.0).contains(&percentile));
    if sorted.len() == 1 {
        return sorted[0];
    }
    let rank = percentile / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}
