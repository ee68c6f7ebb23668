use std::io::{self, Read, Write};

use serde::{Deserialize, Serialize};

use crate::autoencoders::cnn::{build_cnn_ae, CnnAeSpec};
use crate::autoencoders::train::{
    reconstruction_window_scores, train_reconstruction, TrainError,
};
use crate::autoencoders::usad::{build_usad, train_usad, usad_window_scores, UsadNets, UsadSpec};
use crate::dataset::{window, NormStats, TimeSeries, WindowBatch};
use crate::nn::{CheckpointError, Network};
use crate::partition::FeatureGroup;
use crate::seeds;

/// Which submodel family a run trains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelFamily {
    Cnn1d(CnnAeSpec),
    Usad(UsadSpec),
}

impl ModelFamily {
    pub fn window(&self) -> usize {
        match self {
            ModelFamily::Cnn1d(s) => s.window,
            ModelFamily::Usad(s) => s.window,
        }
    }

    pub fn lr(&self) -> f64 {
        match self {
            ModelFamily::Cnn1d(s) => s.lr,
            ModelFamily::Usad(s) => s.lr,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelFamily::Cnn1d(_) => "cnn1d",
            ModelFamily::Usad(_) => "usad",
        }
    }
}

/// Trained parameters of one submodel.
#[derive(Debug, Clone)]
pub enum FamilyNets {
    Cnn1d(Network<f32>),
    Usad {
        nets: UsadNets<f32>,
        alpha: f64,
        beta: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub epochs: usize,
    pub final_loss: f64,
    /// Final AE2 loss for the adversarial family.
    pub final_adversarial_loss: Option<f64>,
    pub seed: u64,
}

/// A fitted autoencoder bound to one feature group plus its calibrated
/// anomaly threshold. Normalisation is applied internally when scoring,
/// with stats restricted to the group.
#[derive(Debug, Clone)]
pub struct TrainedSubmodel {
    pub group: FeatureGroup,
    pub window: usize,
    pub nets: FamilyNets,
    pub norm_stats: NormStats,
    pub threshold: Option<f64>,
    pub meta: TrainMeta,
}

/// Build and train one family model on (already group-selected,
/// normalised) windows. The parameter stream and the batch order both
/// derive from `seed`, so results are reproducible and independent of
/// scheduling.
pub fn train_family(
    family: &ModelFamily,
    windows: &WindowBatch,
    epochs: usize,
    batch_size: usize,
    seed: u64,
) -> Result<(FamilyNets, TrainMeta), TrainError> {
    let n_features = windows.n_features();
    match family {
        ModelFamily::Cnn1d(spec) => {
            let mut net = build_cnn_ae::<f32>(spec, n_features, &mut seeds::rng(seed, "init", &[]))?;
            let history = train_reconstruction(&mut net, &windows.to_tensor::<f32>(), epochs, spec.lr, batch_size, seed)?;
            let meta = TrainMeta {
                epochs,
                final_loss: history.last().copied().unwrap_or(f64::NAN),
                final_adversarial_loss: None,
                seed,
            };
            Ok((FamilyNets::Cnn1d(net), meta))
        }
        ModelFamily::Usad(spec) => {
            let mut nets = build_usad::<f32>(spec, n_features, &mut seeds::rng(seed, "init", &[]))?;
            let history = train_usad(&mut nets, &windows.to_flat_tensor::<f32>(), epochs.max(1), spec.lr, batch_size, seed)?;
            let meta = TrainMeta {
                epochs: epochs.max(1),
                final_loss: history.ae1.last().copied().unwrap_or(f64::NAN),
                final_adversarial_loss: history.ae2.last().copied(),
                seed,
            };
            Ok((
                FamilyNets::Usad {
                    nets,
                    alpha: spec.score_alpha,
                    beta: spec.score_beta,
                },
                meta,
            ))
        }
    }
}

/// Per-window anomaly scores of a trained family model, eval mode.
pub fn family_window_scores(nets: &FamilyNets, windows: &WindowBatch) -> Result<Vec<f64>, TrainError> {
    match nets {
        FamilyNets::Cnn1d(net) => reconstruction_window_scores(net, &windows.to_tensor::<f32>()),
        FamilyNets::Usad { nets, alpha, beta } => {
            usad_window_scores(nets, &windows.to_flat_tensor::<f32>(), *alpha, *beta)
        }
    }
}

/// Mean per-window score; the loss used when evaluating fitness.
pub fn family_eval_loss(nets: &FamilyNets, windows: &WindowBatch) -> Result<f64, TrainError> {
    let scores = family_window_scores(nets, windows)?;
    if scores.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Spread window scores onto points: each window's score lands on its
/// last point; every point before the first complete window keeps the
/// first available score (and trailing points keep the last one).
pub fn window_scores_to_points(window_scores: &[f64], origins: &[usize], n_points: usize) -> Vec<f64> {
    assert_eq!(window_scores.len(), origins.len());
    assert!(!window_scores.is_empty());
    let mut out = Vec::with_capacity(n_points);
    let mut wi = 0usize;
    for p in 0..n_points {
        while wi + 1 < origins.len() && origins[wi] < p {
            wi += 1;
        }
        out.push(window_scores[wi]);
    }
    out
}

impl TrainedSubmodel {
    /// Per-point anomaly scores for a raw (unnormalised) series that
    /// contains at least the submodel's features.
    pub fn score(&self, ts: &TimeSeries) -> Result<Vec<f64>, TrainError> {
        let selected = ts.select_features(&self.group)?;
        let normalised = self.norm_stats.apply(&selected)?;
        let batch = window(&normalised, self.window, 1)?;
        let wscores = family_window_scores(&self.nets, &batch)?;
        Ok(window_scores_to_points(&wscores, batch.origin_index(), ts.n_points()))
    }
}

// ---------------------------------------------------------------------------
// Submodel container: magic, version, JSON header, embedded network blobs.
// ---------------------------------------------------------------------------

pub const SUBMODEL_MAGIC: &[u8; 4] = b"EVSM";
pub const SUBMODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SubmodelHeader {
    family: String,
    group: Vec<usize>,
    window: usize,
    threshold: Option<f64>,
    norm_min: Vec<f64>,
    norm_max: Vec<f64>,
    score_alpha: Option<f64>,
    score_beta: Option<f64>,
    meta: TrainMeta,
}

impl TrainedSubmodel {
    pub fn write_to(&self, w: &mut dyn Write) -> io::Result<()> {
        let (family, alpha, beta) = match &self.nets {
            FamilyNets::Cnn1d(_) => ("cnn1d".to_string(), None, None),
            FamilyNets::Usad { alpha, beta, .. } => ("usad".to_string(), Some(*alpha), Some(*beta)),
        };
        let header = SubmodelHeader {
            family,
            group: self.group.iter().collect(),
            window: self.window,
            threshold: self.threshold,
            norm_min: self.norm_stats.min().to_vec(),
            norm_max: self.norm_stats.max().to_vec(),
            score_alpha: alpha,
            score_beta: beta,
            meta: self.meta.clone(),
        };
        let header_bytes = serde_json::to_vec(&header).expect("submodel header serialises");
        w.write_all(SUBMODEL_MAGIC)?;
        w.write_all(&SUBMODEL_FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(header_bytes.len() as u64).to_le_bytes())?;
        w.write_all(&header_bytes)?;
        let networks: Vec<&Network<f32>> = match &self.nets {
            FamilyNets::Cnn1d(net) => vec![net],
            FamilyNets::Usad { nets, .. } => vec![&nets.encoder, &nets.decoder1, &nets.decoder2],
        };
        for net in networks {
            let blob = net.to_bytes();
            w.write_all(&(blob.len() as u64).to_le_bytes())?;
            w.write_all(&blob)?;
        }
        Ok(())
    }

    pub fn read_from(r: &mut dyn Read) -> Result<TrainedSubmodel, CheckpointError> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != SUBMODEL_MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let version = u32::from_le_bytes(word);
        if version != SUBMODEL_FORMAT_VERSION {
            return Err(CheckpointError::BadVersion(version));
        }
        let mut len8 = [0u8; 8];
        r.read_exact(&mut len8)?;
        let mut header_bytes = vec![0u8; u64::from_le_bytes(len8) as usize];
        r.read_exact(&mut header_bytes)?;
        let header: SubmodelHeader = serde_json::from_slice(&header_bytes)?;

        let read_net = |r: &mut dyn Read| -> Result<Network<f32>, CheckpointError> {
            let mut len8 = [0u8; 8];
            r.read_exact(&mut len8)?;
            let mut blob = vec![0u8; u64::from_le_bytes(len8) as usize];
            r.read_exact(&mut blob)?;
            Network::from_bytes(&blob)
        };
        let nets = match header.family.as_str() {
            "cnn1d" => FamilyNets::Cnn1d(read_net(r)?),
            "usad" => FamilyNets::Usad {
                nets: UsadNets {
                    encoder: read_net(r)?,
                    decoder1: read_net(r)?,
                    decoder2: read_net(r)?,
                },
                alpha: header.score_alpha.unwrap_or(0.5),
                beta: header.score_beta.unwrap_or(0.5),
            },
            other => return Err(CheckpointError::Invalid(format!("unknown family {other:?}"))),
        };
        let norm_stats = NormStats::from_min_max(header.norm_min, header.norm_max)
            .map_err(|e| CheckpointError::Invalid(e.to_string()))?;
        Ok(TrainedSubmodel {
            group: FeatureGroup::new(header.group),
            window: header.window,
            nets,
            norm_stats,
            threshold: header.threshold,
            meta: header.meta,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to Vec cannot fail");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<TrainedSubmodel, CheckpointError> {
        let mut cursor = bytes;
        TrainedSubmodel::read_from(&mut cursor)
    }
}
