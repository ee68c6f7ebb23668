//! The two submodel families: a 1D-convolutional autoencoder and an
//! adversarially trained dense autoencoder pair with a shared encoder,
//! plus the training loops and per-point anomaly scoring shared by the
//! fitness evaluation and the final ensemble.

mod cnn;
mod submodel;
mod train;
mod usad;

pub use cnn::{build_cnn_ae, CnnAeSpec};
pub use submodel::{
    family_eval_loss, family_window_scores, train_family, window_scores_to_points, FamilyNets,
    ModelFamily, TrainMeta, TrainedSubmodel, SUBMODEL_FORMAT_VERSION, SUBMODEL_MAGIC,
};
pub use train::{
    eval_reconstruction_loss, reconstruction_window_scores, train_reconstruction, TrainError,
};
pub use usad::{
    build_usad, train_usad, usad_phase_weights, usad_window_scores, UsadHistory, UsadNets, UsadSpec,
};

/// Activation slope shared by every layer stack in both families.
pub const LRELU_SLOPE: f64 = 0.01;
pub const BN_EPSILON: f64 = 1e-5;
pub const BN_MOMENTUM: f64 = 0.1;

/// Per-point anomaly scores, one value per source point, all `>= 0`.
pub type ScoreSeries = Vec<f64>;
